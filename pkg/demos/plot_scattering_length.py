"""
Energy-dependent scattering lengths of the -1/x^4 tail
======================================================

The atom-ion interaction decays like -C4/x**4.  Its zero-energy solution
``x sin(1/x + phi)`` fixes a short-range phase ``phi``, and the static
scattering length follows as ``a = -cot(phi)`` in units of R*.  Away from
threshold the phase shift comes from the characteristic exponent ``nu``
of the Mathieu-type equation, evaluated through an infinite determinant
and a continued fraction.
"""

import matplotlib
import matplotlib.pyplot as plt
import numpy as np

from genkp import energy_dependent_a, infinite_determinant, nu_exponent, static_scattering_length

matplotlib.use("Agg")

# %%
# The determinant and the exponent
# --------------------------------
# Delta(0) = 1 and nu(0) = 1/2.  The truncation is doubled until it stops
# changing Delta.

for k in (0.0, 0.1, 0.3, 0.6):
    print(f"k = {k:.1f}: Delta = {infinite_determinant(k):.12f}, nu = {nu_exponent(k).nu:.10f}")

# %%
# Threshold behaviour
# -------------------
# a(k) tends to the static value, and the 1/x^4 tail adds a linear term
# (pi/3) R* k for every phase.

for phi in (np.pi / 6, np.pi / 4, np.pi / 3):
    a0 = static_scattering_length(phi)
    slope = (energy_dependent_a(1e-5, phi, "odd") - a0) / 1e-5
    print(f"phi = {phi:.4f}: a_static = {a0:+.6f}, a(1e-6) = {energy_dependent_a(1e-6, phi, 'odd'):+.6f}, "
          f"slope = {slope:.5f} (pi/3 = {np.pi / 3:.5f})")

# %%
# a(k) across the first few bands
# -------------------------------

k = np.linspace(0.01, 0.8, 300)
fig, ax = plt.subplots()
for phi in (-np.pi / 4, np.pi / 4, np.pi / 3):
    ax.plot(k, energy_dependent_a(k, phi, "odd"), label=f"phi = {phi:.3f}")
ax.set_xlabel("k R*")
ax.set_ylabel("a(k) / R*")
ax.set_ylim(-5, 5)
ax.legend()
plt.show()
