"""Bloch and Wannier functions for the KP and QDT chains.

Both models are sampled on the same ring of N_L bond cells [j d, (j + 1) d]
with ions on the cell edges, so their Bloch sets, Wannier functions and
overlap integrals are directly comparable.

KP Bloch functions inside cell 0 read

    psi_q(x) = N {sin(kx) + e^{-iqd} zeta sin(k(d - x))},

and are continued to the other cells by the Bloch phase e^{iqjd}.
"""
from __future__ import annotations

from dataclasses import dataclass, field, replace

import numpy as np
from scipy.optimize import minimize

from .dispersion import BandTable, PseudopotentialStrengths, band_energies
from .errors import DegeneracyError, DomainError, GridError
from .grid import DEFAULT_POINTS, SampledWavefunction, cell_grid, simpson_weights
from .qdt import QdtSettings, qdt_bloch_states
from .units import LatticeParams

KOHN_MODES = ("none", "kohn", "kohn_halfshift")


def zeta_odd_condition(q, k, a_o, d):
    """zeta from the odd-wave jump condition (value jump set by a_o)."""
    lam = np.exp(-1j * q * d)
    s, c = np.sin(k * d), np.cos(k * d)
    num = lam * s - a_o * k * (1.0 + lam * c)
    den = lam * s - a_o * k * lam * (c + lam)
    return num, den


def zeta_even_condition(q, k, inv_a_e, d):
    """zeta from the even-wave jump condition (slope jump set by 1/a_e)."""
    lam = np.exp(-1j * q * d)
    s, c = np.sin(k * d), np.cos(k * d)
    num = -(k * (1.0 - lam * c) + inv_a_e * lam * s)
    den = k * lam * (lam - c) + inv_a_e * lam * s
    return num, den


def zeta(q: float, k: float, a_o: float, d: float, inv_a_e: float | None = None,
         tol: float = 1e-12) -> complex:
    """Coefficient zeta_q(k) of the KP Bloch ansatz.

    The odd-wave condition gives the closed form
    1 + a_o k (e^{2iqd} - 1) / (a_o k + e^{iqd}[a_o k cos(kd) - sin(kd)]).
    When its denominator vanishes and ``inv_a_e`` is given, the even-wave
    condition is used instead; on a band both agree.  At q = 0 and q = pi/d
    the closed form returns 1 for every k, which is right only for band
    edges of even type; the Bloch builders pick the better-conditioned
    condition instead.

    Raises
    ------
    DegeneracyError
        If no usable condition is left.
    """
    num, den = zeta_odd_condition(q, k, a_o, d)
    scale = abs(k * d) + abs(a_o * k) + 1.0
    if abs(den) > tol * scale:
        return complex(num / den)
    if inv_a_e is not None:
        num, den = zeta_even_condition(q, k, inv_a_e, d)
        if abs(den) > tol * (abs(k) + abs(inv_a_e)):
            return complex(num / den)
    raise DegeneracyError(f"zeta is indeterminate at q={q}, k={k}")


def _zeta_best(q, k, a_o, inv_a_e, d):
    n1, d1 = zeta_odd_condition(q, k, a_o, d)
    n2, d2 = zeta_even_condition(q, k, inv_a_e, d)
    # |den| against the size of its coefficients; at q = 0, pi/d one row is 0/0
    # (num and den vanish together), which a num/den comparison cannot see
    s, c = abs(np.sin(k * d)), abs(np.cos(k * d))
    r1 = abs(d1) / (s + abs(a_o * k) * (1.0 + c))
    r2 = abs(d2) / (k * (1.0 + c) + abs(inv_a_e) * s)
    if max(r1, r2) < 1e-14:
        raise DegeneracyError(f"zeta is indeterminate at q={q}, k={k}")
    return complex(n1 / d1) if r1 >= r2 else complex(n2 / d2)


def printed_inverse_norm2(q, k, z, d, N_L):
    """1/N^2 with N_L multiplying only the first term (the commonly quoted variant)."""
    return (N_L * (d / 2 - np.sin(2 * k * d) / (4 * k)) * (1 + abs(z) ** 2)
            + abs(z) * np.cos(q * d - np.angle(z)) * (np.sin(k * d) / k - d * np.cos(k * d)))


def analytic_inverse_norm2(q, k, z, d, N_L):
    """1/N^2 from the exact cell integral; N_L multiplies both terms."""
    return N_L * ((d / 2 - np.sin(2 * k * d) / (4 * k)) * (1 + abs(z) ** 2)
                  + abs(z) * np.cos(q * d - np.angle(z)) * (np.sin(k * d) / k - d * np.cos(k * d)))


@dataclass
class KpBlochFunction:
    """Analytic KP Bloch function sampled on the ring.

    Attributes
    ----------
    q, k : float
    band : int
        1-based band index.
    zeta : complex
    norm : float
        N_q(k), fixed by quadrature so the cell integral is 1/N_L.
    theta_q : float
        Global phase.
    wavefunction : SampledWavefunction
    d_right, d_left : ndarray
        psi'(x_c^+) and psi'(x_c^-) at every site.
    """

    q: float
    k: float
    band: int
    zeta: complex
    norm: float
    theta_q: float
    wavefunction: SampledWavefunction = field(repr=False)
    d_right: np.ndarray = field(repr=False, default=None)
    d_left: np.ndarray = field(repr=False, default=None)
    norm_printed: float = float("nan")
    norm_analytic: float = float("nan")

    def jump_residuals(self, strengths: PseudopotentialStrengths):
        """Max residuals of the value and slope jump conditions over all sites.

        psi(0+) - psi(0-) = -a_o [psi'(0+) + psi'(0-)] and
        psi'(0+) - psi'(0-) + (1/a_e) [psi(0+) + psi(0-)] = 0, both relative
        to the size of the terms involved.
        """
        inv_a_e, a_o = strengths.at(self.k)
        right, left = self.wavefunction.site_limits()
        r6 = (right - left) + a_o * (self.d_right + self.d_left)
        r7 = (self.d_right - self.d_left) + inv_a_e * (right + left)
        s6 = np.abs(right) + np.abs(left) + abs(a_o) * (np.abs(self.d_right) + np.abs(self.d_left))
        s7 = np.abs(self.d_right) + np.abs(self.d_left) + abs(inv_a_e) * (np.abs(right) + np.abs(left))
        return float(np.max(np.abs(r6) / s6.max())), float(np.max(np.abs(r7) / s7.max()))

    def schrodinger_residual(self) -> float:
        """Relative residual of psi'' + k^2 psi on interior samples (4th-order differences)."""
        wf = self.wavefunction
        h = wf.d / wf.points_per_cell
        v = wf.values
        d2 = (-v[:, 4:] + 16 * v[:, 3:-1] - 30 * v[:, 2:-2] + 16 * v[:, 1:-3] - v[:, :-4]) / (12 * h * h)
        res = d2 + self.k**2 * v[:, 2:-2]
        return float(np.max(np.abs(res)) / (self.k**2 * np.max(np.abs(v))))


def kp_bloch_from_energy(q: float, E: float, band: int, strengths: PseudopotentialStrengths,
                         params: LatticeParams, theta_q: float = 0.0,
                         points_per_cell: int = DEFAULT_POINTS) -> KpBlochFunction:
    """KP Bloch function at a known (q, E) on band ``band``."""
    d = params.d
    k = float(np.sqrt(E))
    inv_a_e, a_o = (float(v) for v in strengths.at(k))
    z = _zeta_best(q, k, a_o, inv_a_e, d)
    lam = np.exp(-1j * q * d)
    y = cell_grid(d, points_per_cell)
    cell = np.sin(k * y) + lam * z * np.sin(k * (d - y))
    w = simpson_weights(points_per_cell, d / points_per_cell)
    integral = float(np.sum(np.abs(cell) ** 2 * w))
    norm = 1.0 / np.sqrt(params.N_L * integral)
    cells = params.j_indices
    phase = np.exp(1j * theta_q) * np.exp(1j * q * d * cells)
    values = phase[:, None] * (norm * cell)[None, :]
    wf = SampledWavefunction(values, d, cells, "KP", dict(q=q, E=E, band=band))
    dr0 = norm * k * (1.0 - lam * z * np.cos(k * d))
    dl0 = norm * k * (np.cos(k * d) - lam * z)
    d_right = phase * dr0
    d_left = np.roll(phase, 1) * dl0
    d_left[0] = phase[0] * np.exp(-1j * q * d) * dl0  # wraps with e^{iqd N_L} = 1
    return KpBlochFunction(q, k, band, z, norm, theta_q, wf, d_right, d_left,
                           norm_printed=float(1 / np.sqrt(printed_inverse_norm2(q, k, z, d, params.N_L))),
                           norm_analytic=float(1 / np.sqrt(analytic_inverse_norm2(q, k, z, d, params.N_L))))


def kp_bloch(q: float, band: int, strengths: PseudopotentialStrengths, params: LatticeParams,
             theta_q: float = 0.0, points_per_cell: int = DEFAULT_POINTS) -> KpBlochFunction:
    """KP Bloch function of band ``band`` (1-based) at Bloch vector q.

    The band energy is solved at q first.  Normalisation is by Simpson
    quadrature of the cell; ``norm_analytic`` and ``norm_printed`` carry the
    closed-form values for comparison.
    """
    E = band_energies(q, strengths, params.d, band)[band - 1]
    return kp_bloch_from_energy(q, E, band, strengths, params, theta_q, points_per_cell)


@dataclass
class BlochSet:
    """Bloch functions of one band on the full quantised q grid.

    Attributes
    ----------
    values : ndarray, shape (N_q, N_L, points_per_cell + 1)
    q, energies : ndarray
    reference : ndarray of complex
        Per-q value used by the Kohn prescription (see ``apply_kohn_phase``).
    """

    values: np.ndarray
    q: np.ndarray
    energies: np.ndarray
    d: float
    cells: np.ndarray
    band: int
    model_tag: str
    reference: np.ndarray
    kohn_mode: str = "none"
    phases: np.ndarray | None = None
    fallback: np.ndarray | None = None

    @property
    def N_L(self) -> int:
        return self.cells.size

    def state(self, i: int) -> SampledWavefunction:
        return SampledWavefunction(self.values[i], self.d, self.cells, self.model_tag,
                                   dict(q=float(self.q[i]), band=self.band, kohn=self.kohn_mode))

    def gram(self) -> np.ndarray:
        w = simpson_weights(self.values.shape[2] - 1, self.d / (self.values.shape[2] - 1))
        v = self.values.reshape(self.values.shape[0], -1)
        ww = np.tile(w, self.N_L)
        return np.conj(v) @ (v * ww).T


def kp_bloch_set(table: BandTable, band: int, strengths: PseudopotentialStrengths,
                 points_per_cell: int = DEFAULT_POINTS, reference: str = "site_mean") -> BlochSet:
    """KP Bloch functions of one band over the table's q grid (theta_q = 0).

    ``reference`` selects the value psi(0) the Kohn prescription acts on.
    The default "site_mean" is the average of the two one-sided limits at
    the ion, i.e. the part of psi(0) symmetric about the ion, which is the
    KP counterpart of the QDT even amplitude.  "site" is psi(0^-),
    "site_right" psi(0^+) and "bond" psi(d/2).
    """
    params = table.params
    fns = [kp_bloch_from_energy(q, E, band, strengths, params, 0.0, points_per_cell)
           for q, E in zip(table.q_grid, table.band(band))]
    values = np.stack([f.wavefunction.values for f in fns])
    ref = _reference(values, params.j_indices, reference, None)
    return BlochSet(values, table.q_grid.copy(), table.band(band).copy(), params.d,
                    params.j_indices, band, "KP", ref)


def _reference(values, cells, reference, even_amp):
    i0 = int(np.nonzero(cells == 0)[0][0])
    right = values[:, i0, 0]
    left = values[:, i0 - 1, -1]
    mid = values.shape[2] // 2
    if reference == "site":
        return left.copy()
    if reference == "site_right":
        return right.copy()
    if reference == "site_mean":
        return 0.5 * (right + left)
    if reference == "bond":
        return values[:, i0, mid].copy()
    if reference == "even_amplitude":
        if even_amp is None:
            raise DomainError("the even amplitude reference exists for QDT sets only")
        return np.asarray(even_amp, complex)
    raise DomainError(f"unknown Kohn reference {reference!r}")


def qdt_bloch_set(table: BandTable, band: int, points_per_cell: int = DEFAULT_POINTS,
                  reference: str = "even_amplitude") -> BlochSet:
    """QDT Bloch functions of one band over the table's q grid.

    The default Kohn reference is the even amplitude c_e: every QDT state
    vanishes at the ion, and near it psi ~ |x| (c_e sin(1/|x| + phi_e)
    +- c_o sin(1/|x| + phi_o)), so c_e is the part of psi(0) that is
    symmetric about the ion.
    """
    params = table.params
    settings = table.settings if isinstance(table.settings, QdtSettings) else QdtSettings()
    states, _ = qdt_bloch_states(params, table.band(band), table.q_grid, settings,
                                 points_per_cell, band=band)
    values = np.stack([s.wavefunction.values for s in states])
    ce = np.array([s.c_e for s in states])
    ref = _reference(values, params.j_indices, reference, ce)
    return BlochSet(values, table.q_grid.copy(), table.band(band).copy(), params.d,
                    params.j_indices, band, "QDT", ref)


def kohn_factors(bset: BlochSet, mode: str = "kohn", tol: float = 1e-12):
    """Unimodular factors of the Kohn prescription.

    QDT: factor * ref lies on the positive imaginary axis (Re = 0).
    KP: factor * ref is real and positive (Im = 0).
    ``kohn_halfshift`` multiplies by e^{-i q d / 2} on top.

    Returns
    -------
    factors : ndarray of complex
    fallback : ndarray of int
        Indices of q where the reference vanished and the next sample
        inside the home cell was used instead.
    """
    if mode not in KOHN_MODES:
        raise DomainError(f"mode must be one of {KOHN_MODES}")
    n = bset.q.size
    if mode == "none":
        return np.ones(n, complex), np.array([], int)
    ref = bset.reference
    small = np.abs(ref) <= tol * np.max(np.abs(ref))
    if np.any(small):
        # indeterminate phase: fall back to the neighbouring sample inside the home cell
        i0 = int(np.nonzero(bset.cells == 0)[0][0])
        ref = np.where(small, bset.values[:, i0, 1], ref)
    target = 1j if bset.model_tag == "QDT" else 1.0
    f = target * np.conj(ref) / np.abs(ref)
    if mode == "kohn_halfshift":
        f = f * np.exp(-0.5j * bset.q * bset.d)
    return f, np.nonzero(small)[0]


def apply_kohn_phase(bset: BlochSet, mode: str = "kohn") -> BlochSet:
    """Return a copy of the set with the Kohn phase factors applied."""
    if bset.kohn_mode != "none":
        raise DomainError("Kohn phases already applied")
    f, fallback = kohn_factors(bset, mode)
    return replace(bset, values=bset.values * f[:, None, None], reference=bset.reference * f,
                   kohn_mode=mode, phases=f, fallback=fallback)


@dataclass
class WannierFunction:
    """Wannier function W_n(x - x_j) sampled on the ring."""

    band: int
    home: int
    model_tag: str
    kohn_mode: str
    wavefunction: SampledWavefunction = field(repr=False)

    @property
    def values(self) -> np.ndarray:
        return self.wavefunction.values

    def home_weight(self) -> float:
        """Fraction of the norm inside the home bond cell [x_j, x_j + d]."""
        d = self.wavefunction.d
        return self.wavefunction.interval_weight(self.home * d, (self.home + 1) * d)

    def site_cell_weight(self) -> float:
        """Fraction of the norm inside [x_j - d/2, x_j + d/2]."""
        d = self.wavefunction.d
        return self.wavefunction.interval_weight((self.home - 0.5) * d, (self.home + 0.5) * d)


def wannier(bset: BlochSet, home: int = 0) -> WannierFunction:
    """W(x - x_j) = N_L^{-1/2} sum_q psi_q(x) e^{-i q x_j}.

    Raises
    ------
    GridError
        If the set does not cover all N_L quantised Bloch vectors.
    """
    N = bset.N_L
    expected = 2 * np.pi * bset.cells / (bset.d * N)
    if bset.q.size != N or not np.allclose(np.sort(bset.q), expected, atol=1e-12):
        raise GridError("the Bloch set must cover the complete quantised q grid")
    ph = np.exp(-1j * bset.q * home * bset.d) / np.sqrt(N)
    values = np.tensordot(ph, bset.values, axes=(0, 0))
    wf = SampledWavefunction(values, bset.d, bset.cells, bset.model_tag,
                             dict(band=bset.band, home=home, kohn=bset.kohn_mode))
    return WannierFunction(bset.band, home, bset.model_tag, bset.kohn_mode, wf)


def wannier_set(bset: BlochSet, homes=None) -> list[WannierFunction]:
    """Wannier functions for several home sites (all sites by default)."""
    homes = bset.cells if homes is None else homes
    return [wannier(bset, int(j)) for j in homes]


def bloch_from_wannier(w: WannierFunction, q: float, N_L: int | None = None) -> np.ndarray:
    """Inverse transform sum_j W(x - x_j) e^{i q x_j} / sqrt(N_L), using lattice translations."""
    wf = w.wavefunction
    cells = wf.cells
    out = np.zeros_like(wf.values)
    for j in cells:
        out += wf.shifted(int(j - w.home)).values * np.exp(1j * q * j * wf.d)
    return out / np.sqrt(cells.size)


def optimal_theta(kp: SampledWavefunction, ref: SampledWavefunction) -> float:
    """Global phase theta minimising the L2 distance between e^{i theta} kp and ref.

    Solved by Nelder-Mead as a cross-check of the closed form arg <kp|ref>.
    """
    kp.check_compatible(ref)

    t0 = np.angle(kp.inner(ref))
    res = minimize(lambda t: float(np.sum(np.abs(np.exp(1j * t[0]) * kp.values - ref.values) ** 2
                                          * kp.weights[None, :])),
                   x0=[t0], method="Nelder-Mead", options=dict(xatol=1e-10, fatol=1e-16))
    return float(np.mod(res.x[0] + np.pi, 2 * np.pi) - np.pi)
