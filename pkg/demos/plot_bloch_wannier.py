"""
Bloch and Wannier functions
===========================

Both models yield Bloch functions on a ring of N_L cells.  Near an ion the
exact solution oscillates as ``x sin(1/x + phi)`` while the contact model
only has a kink or jump, but outside about one R* the two agree.  Fourier
transforming a band over the full q grid gives Wannier functions; Kohn's
phase choice makes them real-valued and localised.
"""

import matplotlib
import matplotlib.pyplot as plt
import numpy as np

from genkp import (LatticeParams, PseudopotentialStrengths, apply_kohn_phase, band_structure, kp_bloch_set,
                   qdt_band_structure, qdt_bloch_set, wannier)

matplotlib.use("Agg")

PHI_E, PHI_O = -np.pi / 4, np.pi / 4

# %%
# One Bloch function from each model
# ----------------------------------
# N_L = 59 puts q R* = -0.149093 on the grid.

params = LatticeParams(15.0, PHI_E, PHI_O, N_L=59)
strengths = PseudopotentialStrengths.from_phases(PHI_E, PHI_O, mode="energy")
kp_set = kp_bloch_set(band_structure(params, strengths, 1), 1, strengths)
qdt_set = qdt_bloch_set(qdt_band_structure(params, n_bands=2), 1)
i = int(np.argmin(np.abs(params.q_grid + 0.149093)))
print(f"q = {params.q_grid[i]:.6f}, E_KP = {kp_set.energies[i]:.6f}, E_QDT = {qdt_set.energies[i]:.6f}")

# Bloch functions carry arbitrary global phases; compare moduli
kp_abs = np.abs(kp_set.state(i).values)
qdt_abs = np.abs(qdt_set.state(i).values)
x = kp_set.state(i).x
near = np.abs(x - params.d * np.round(x / params.d)) < 1.0
dev = np.max(np.abs(kp_abs - qdt_abs)[~near]) / np.max(qdt_abs)
print(f"max | |psi_KP| - |psi_QDT| | outside 1 R* of the ions: {dev:.1%} of max |psi|")

fig, (ax1, ax2) = plt.subplots(1, 2, figsize=(10, 4))
sl = slice(27, 32)
ax1.plot(x[sl].ravel(), qdt_abs[sl].ravel(), "k-", label="exact")
ax1.plot(x[sl].ravel(), kp_abs[sl].ravel(), "r--", label="KP")
ax1.set_xlabel("x / R*")
ax1.set_ylabel("|psi_q|")
ax1.legend()

# %%
# Wannier functions and the Kohn gauge
# ------------------------------------
# The plain Kohn gauge fixes the phase at the ion; the extra factor
# exp(-iqd/2) moves the centre to the bond and tightens the function.

for label, bset in (("KP", kp_set), ("exact", qdt_set)):
    for mode in ("kohn", "kohn_halfshift"):
        w = wannier(apply_kohn_phase(bset, mode), 0)
        wf = w.wavefunction
        print(f"{label:5s} {mode:15s}: norm = {wf.norm2():.12f}, spread = {wf.spread():9.3f} R*^2, "
              f"bond-cell weight = {w.home_weight():.3f}")

w = wannier(apply_kohn_phase(qdt_set, "kohn_halfshift"), 0)
sl = slice(26, 33)
ax2.plot(w.wavefunction.x[sl].ravel(), w.values[sl].real.ravel(), label="Re W")
ax2.plot(w.wavefunction.x[sl].ravel(), w.values[sl].imag.ravel(), label="Im W")
ax2.set_xlabel("x / R*")
ax2.legend()
fig.tight_layout()
plt.show()
