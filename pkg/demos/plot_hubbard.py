"""
Bose-Hubbard parameters for atoms in an ion chain
=================================================

Bosonic atoms trapped by the ions are described by a Bose-Hubbard model.
The hopping J(s) is the discrete Fourier transform of the lowest band and
the interaction U is a four-Wannier overlap (multiply by the transverse
coupling g_1D for an energy).
"""

import matplotlib
import matplotlib.pyplot as plt
import numpy as np

from genkp import LatticeParams, g1d, hubbard_parameters
from genkp.hubbard import hopping_sweep

matplotlib.use("Agg")

# %%
# Parameters at d = 15 R*
# -----------------------

params = LatticeParams(15.0, -np.pi / 4, np.pi / 4)
h = hubbard_parameters(params, "kp", "energy", intraband=False)
print(f"KP: J(1) = {h.J[1]:.4e} E*, -<W0|H|W1> = {h.J_wannier:.4e} E*")
print(f"    U0 = {h.U0:.4f}, U1 = {h.U1:.3e}, U2 = {h.U2:.3e} (1/R*)")

# %%
# Hopping versus spacing
# ----------------------
# Tunnelling through the barrier between ions falls off quickly with d.

rows = hopping_sweep((8.0, 10.0, 12.0, 15.0, 18.0, 22.0, 26.0, 30.0))
d = np.array(sorted(rows))
fig, ax = plt.subplots()
for s in range(1, 5):
    ax.semilogy(d, [abs(rows[x][s]) for x in d], "o-", label=f"|J({s})|")
ax.set_xlabel("d / R*")
ax.set_ylabel("E*")
ax.legend()

# %%
# Transverse confinement
# ----------------------
# g_1D diverges at the confinement-induced resonance.

ell = 1e-7
omega = 2 * np.pi * 50e3
for ratio in (0.1, 0.5, 0.9):
    a_s = ratio * np.sqrt(2) * ell / 1.4603
    print(f"a_s at {ratio:.1f} of the resonance: g_1D = {g1d(omega, a_s, ell):.3e} J m")
plt.show()
