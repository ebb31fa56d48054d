"""Generalised Kronig-Penney dispersion with even (delta) and odd (delta') scatterers.

Right-hand sides of cos(qd) = RHS(k) and the band solver built on them.  The
even strength is always carried as 1/a_e so that the even-free limit is an
exact zero rather than a large number.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import brentq, minimize_scalar
from scipy.optimize.elementwise import find_root

from .errors import DomainError, InsufficientRangeError, SingularityError
from .scattering import ScatteringLengthModel
from .units import LatticeParams, static_inverse_scattering_length, static_scattering_length

ROOT_TOL = 1e-12


@dataclass
class PseudopotentialStrengths:
    """Even/odd pseudopotential strengths.

    Attributes
    ----------
    inv_a_e : float
        1/a_e in 1/R*; 0 encodes a_e = infinity (static mode).
    a_o : float
        Odd scattering length in R* (static mode).
    mode : {"static", "energy"}
    model : ScatteringLengthModel or None
        Source of a_e(k), a_o(k) in energy-dependent mode.
    """

    inv_a_e: float = 0.0
    a_o: float = 0.0
    mode: str = "static"
    model: ScatteringLengthModel | None = field(default=None, repr=False)

    def __post_init__(self):
        if self.mode not in ("static", "energy"):
            raise DomainError(f"unknown mode {self.mode!r}")
        if self.mode == "energy" and self.model is None:
            raise DomainError("energy-dependent mode needs a ScatteringLengthModel")
        if self.mode == "static" and self.inv_a_e * self.a_o == 1.0:
            raise SingularityError("a_e == a_o makes the dispersion relation singular")

    @classmethod
    def free(cls) -> "PseudopotentialStrengths":
        return cls(0.0, 0.0)

    @classmethod
    def from_lengths(cls, a_e: float | None = None, a_o: float = 0.0) -> "PseudopotentialStrengths":
        """Static strengths from scattering lengths; ``a_e=None`` means a_e = infinity."""
        return cls(0.0 if a_e is None else 1.0 / a_e, a_o)

    @classmethod
    def from_phases(cls, phi_e: float, phi_o: float, mass_ratio: float = 1.0,
                    mode: str = "static", **model_opts) -> "PseudopotentialStrengths":
        """Strengths from short-range phases, static or energy dependent."""
        if mode == "static":
            return cls(static_inverse_scattering_length(phi_e, mass_ratio),
                       static_scattering_length(phi_o, mass_ratio))
        model = ScatteringLengthModel(phi_e, phi_o, mass_ratio, **model_opts)
        return cls(static_inverse_scattering_length(phi_e, mass_ratio),
                   static_scattering_length(phi_o, mass_ratio), "energy", model)

    def at(self, k):
        """(1/a_e, a_o) evaluated at k."""
        if self.mode == "static":
            shape = np.shape(k)
            return np.full(shape, self.inv_a_e)[()], np.full(shape, self.a_o)[()]
        return self.model.inv_a_e(k), self.model.a(k, "odd")

    def g_even(self, k=None, mass_ratio: float = 1.0):
        """Even coupling g_e = -hbar^2/(mu a_e) in internal units (2/mu -> 2 m/mu)."""
        inv = self.inv_a_e if k is None else self.at(k)[0]
        return -2.0 * inv / mass_ratio

    def g_odd(self, k=None, mass_ratio: float = 1.0):
        """Odd coupling g_o = -hbar^2 a_o/mu in internal units."""
        ao = self.a_o if k is None else self.at(k)[1]
        return -2.0 * ao / mass_ratio


def rhs_even(k, inv_a_e, d):
    """cos(kd) - sin(kd) (1/a_e) / k."""
    k = np.asarray(k, dtype=float)
    kd = k * d
    # same operation order as the combined form, so the a_o = 0 limit is exact
    return np.cos(kd) - (inv_a_e / k) * np.sin(kd)


def rhs_odd(k, a_o, d):
    """cos(kd) + a_o k sin(kd)."""
    k = np.asarray(k, dtype=float)
    return np.cos(k * d) + a_o * k * np.sin(k * d)


def _rhs_static(k, g, a_o, d):
    den = 1.0 - a_o * g
    if np.any(den == 0.0):
        raise SingularityError("a_e == a_o makes the dispersion relation singular")
    kd = k * d
    return ((1.0 + a_o * g) * np.cos(kd) + (k * a_o - g / k) * np.sin(kd)) / den


def rhs_combined(k, strengths: PseudopotentialStrengths, d):
    """Combined even+odd right-hand side of cos(qd) = RHS(k).

    Static mode evaluates the closed form through 1/a_e.  Energy-dependent
    mode uses the pole-free phase-shift form
    sin(kd + delta_e + delta_o) / sin(delta_e - delta_o), which is the same
    expression with a = -tan(delta)/k substituted.
    """
    k = np.asarray(k, dtype=float)
    if strengths.mode == "static":
        return _rhs_static(k, strengths.inv_a_e, strengths.a_o, d)
    se, ce, so, co = strengths.model.channels(k)
    den = se * co - ce * so
    if np.any(den == 0.0):
        raise SingularityError("a_e(k) == a_o(k) makes the dispersion relation singular")
    kd = k * d
    # sin(kd + de + do) expanded with the stored sin/cos channels
    s_sum = se * co + ce * so
    c_sum = ce * co - se * so
    return (np.sin(kd) * c_sum + np.cos(kd) * s_sum) / den


@dataclass
class BandTable:
    """Band energies E_n(q_j) on the Born-von Karman grid.

    ``bands`` has shape (n_bands, N_q); ``k`` holds the matching free
    wavenumbers sqrt(E).
    """

    params: LatticeParams
    bands: np.ndarray
    q_grid: np.ndarray
    model_tag: str
    strengths: PseudopotentialStrengths | None = field(default=None, repr=False)
    settings: object | None = field(default=None, repr=False)

    @property
    def n_bands(self) -> int:
        return self.bands.shape[0]

    @property
    def k(self) -> np.ndarray:
        return np.sqrt(np.maximum(self.bands, 0.0))

    def band(self, n: int) -> np.ndarray:
        """Energies of band ``n`` (1-based, as in the physics literature)."""
        return self.bands[n - 1]

    def symmetry_residual(self) -> float:
        return float(np.max(np.abs(self.bands - self.bands[:, ::-1])))

    def ordering_violation(self) -> float:
        """Largest overlap max_q E_n - min_q E_{n+1} (<= 0 when ordered)."""
        if self.n_bands < 2:
            return -np.inf
        return float(np.max(self.bands[:-1].max(axis=1) - self.bands[1:].min(axis=1)))

    def dispersion_residual(self) -> float:
        """max |cos(qd) - RHS(k)| over the KP table (requires strengths)."""
        if self.strengths is None:
            raise DomainError("dispersion residual needs the KP strengths")
        k = self.k
        with np.errstate(invalid="ignore", divide="ignore"):
            r = rhs_combined(np.where(k > 0, k, 1e-300), self.strengths, self.params.d)
        r = np.where(k > 0, r, 1.0)
        return float(np.max(np.abs(np.cos(self.q_grid * self.params.d)[None, :] - r)))


def _k_step(d):
    return min(np.pi / (8.0 * d), 0.01)


def _k_grid(d, k_max):
    dk = _k_step(d)
    n = int(np.ceil(k_max / dk))
    grid = np.linspace(0.0, n * dk, n + 1)
    grid[0] = dk * 1e-6
    return grid


def _brackets(f, kg, fg):
    """Sign-change brackets plus split brackets around sub-grid dips."""
    out = []
    s = np.sign(fg)
    for i in range(len(kg) - 1):
        if s[i] == 0:
            out.append((kg[i], kg[i]))
        elif s[i] * s[i + 1] < 0:
            out.append((kg[i], kg[i + 1]))
    # local minima of |f| without a sign change may hide a pair of roots
    for i in range(1, len(kg) - 1):
        if s[i - 1] == s[i] == s[i + 1] != 0 and abs(fg[i]) <= abs(fg[i - 1]) \
                and abs(fg[i]) <= abs(fg[i + 1]):
            sgn = s[i]
            res = minimize_scalar(lambda x: sgn * f(x), bounds=(kg[i - 1], kg[i + 1]),
                                  method="bounded", options={"xatol": 1e-15})
            km, fm = res.x, sgn * res.fun
            if sgn * fm < 0:
                out.append((kg[i - 1], km))
                out.append((km, kg[i + 1]))
            elif abs(fm) < ROOT_TOL:
                # tangential double root: locate the extremum through a
                # symmetric difference, which has a simple root there
                h = 1e-6 * (kg[i + 1] - kg[i - 1])
                lo, hi = kg[i - 1] + h, kg[i + 1] - h
                slope = lambda x: f(x + h) - f(x - h)
                if slope(lo) * slope(hi) < 0:
                    km = brentq(slope, lo, hi, xtol=1e-15)
                out.append((km, km))
                out.append((km, km))
    out.sort()
    return out


def _roots_scalar(f, kg, fg, n_bands):
    roots = []
    if abs(fg[0]) < ROOT_TOL:
        roots.append(0.0)  # band bottom at k = 0 (free-like q = 0 state)
    for a, b in _brackets(f, kg, fg):
        if a == b:
            roots.append(a)
        else:
            roots.append(brentq(f, a, b, xtol=1e-15, rtol=4 * np.finfo(float).eps, maxiter=200))
        if len(roots) >= n_bands:
            break
    return roots


def band_energies(q: float, strengths: PseudopotentialStrengths, d: float, n_bands: int,
                  k_max: float | None = None) -> list[float]:
    """The ``n_bands`` lowest energies E = k**2 solving RHS(k) = cos(qd).

    Roots are bracketed on a k grid of spacing min(pi/(8d), 0.01) (sub-grid
    dips are split by a bounded minimisation) and polished by Brent's method.

    Raises
    ------
    InsufficientRangeError
        If fewer than ``n_bands`` roots lie below ``k_max``.
    """
    if n_bands < 1:
        raise DomainError("n_bands must be >= 1")
    if not -np.pi / d < q <= np.pi / d + 1e-15:
        raise DomainError(f"q = {q} outside the first Brillouin zone")
    k_max = (n_bands + 2) * np.pi / d if k_max is None else k_max
    cq = np.cos(q * d)
    kg = _k_grid(d, k_max)

    def f(k):
        return float(rhs_combined(k, strengths, d)) - cq

    fg = rhs_combined(kg, strengths, d) - cq
    roots = _roots_scalar(f, kg, fg, n_bands)
    if len(roots) < n_bands:
        raise InsufficientRangeError(
            f"found {len(roots)} of {n_bands} bands below k = {k_max:.4g} at q = {q:.6g}")
    return [r * r for r in roots[:n_bands]]


def _energy_mode_structure(params, strengths, n_bands, k_max):
    # q-independent RHS on the bracketing grid, then one vectorised polish
    d = params.d
    q = params.q_grid
    kg = _k_grid(d, k_max)
    rg = rhs_combined(kg, strengths, d)
    lo = np.empty((n_bands, q.size))
    hi = np.empty_like(lo)
    for jq, qq in enumerate(q):
        cq = np.cos(qq * d)
        fg = rg - cq
        brs = [(kg[i], kg[i + 1]) for i in range(len(kg) - 1) if fg[i] * fg[i + 1] <= 0]
        if len(brs) < n_bands:
            raise InsufficientRangeError(
                f"found {len(brs)} of {n_bands} bands below k = {k_max:.4g} at q = {qq:.6g}")
        for n in range(n_bands):
            lo[n, jq], hi[n, jq] = brs[n]
    cq = np.broadcast_to(np.cos(q * d), lo.shape)

    def f(k, c):
        return rhs_combined(k, strengths, d) - c

    res = find_root(f, (lo, hi), args=(cq,),
                    tolerances=dict(xatol=1e-15, xrtol=4e-16, fatol=1e-14), maxiter=200)
    if not np.all(res.success):
        raise InsufficientRangeError("energy-dependent root polish failed to converge")
    return res.x ** 2


def band_structure(params: LatticeParams, strengths: PseudopotentialStrengths, n_bands: int,
                   k_max: float | None = None) -> BandTable:
    """KP bands on the quantised q grid of ``params``.

    In energy-dependent mode the scattering lengths are re-evaluated at every
    trial k inside the root search.
    """
    k_max = (n_bands + 2) * np.pi / params.d if k_max is None else k_max
    q = params.q_grid
    if strengths.mode == "energy":
        bands = _energy_mode_structure(params, strengths, n_bands, k_max)
    else:
        bands = np.empty((n_bands, q.size))
        for jq, qq in enumerate(q):
            try:
                bands[:, jq] = band_energies(qq, strengths, params.d, n_bands, k_max)
            except InsufficientRangeError as exc:
                raise InsufficientRangeError(f"{exc} (q index {jq})") from exc
    return BandTable(params=params, bands=bands, q_grid=q, model_tag="KP", strengths=strengths)
