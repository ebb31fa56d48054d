"""Energy-dependent 1D scattering lengths for the -C4/x**4 interaction.

The characteristic exponent nu follows from an infinite tridiagonal
determinant, the ratio S(nu) from a backward continued-fraction recursion,
and the phase shift from the quantum-defect combination of the two.

Conventions (all fixed by independent oracles, see the test suite):

* gamma_n uses k, not E.
* The Gamma-function factor of S(nu) is the symmetric ratio
  Gamma(nu/2+5/4) Gamma(nu/2+3/4) / (Gamma(5/4-nu/2) Gamma(3/4-nu/2)).
* The short-range phase enters the amplitude A_nu with a minus sign
  relative to the inner solution x sin(1/|x| + phi).

The literal alternatives stay available through the ``variant``,
``gamma_arg`` and ``phase_convention`` flags.
"""
from __future__ import annotations

import threading
from dataclasses import dataclass, field

import numpy as np
from scipy.special import gamma as gamma_fn

from .errors import ComplexBranchError, ConvergenceError, DomainError

ALPHA = 0.25


def _determinant_fixed(k, half_width, gamma_arg="k"):
    k = np.asarray(k, dtype=float)
    x = k * k if gamma_arg == "E" else k
    n = np.arange(-half_width, half_width + 1, dtype=float)
    g = 1.0 / (4.0 * n * n - ALPHA)
    d_prev2 = np.ones_like(x)
    d_prev = np.ones_like(x)
    x2 = x * x
    for i in range(1, n.size):
        d_prev2, d_prev = d_prev, d_prev - x2 * (g[i] * g[i - 1]) * d_prev2
    return d_prev


def _determinant(k, half_width, adaptive, tol, gamma_arg, max_half_width):
    value = _determinant_fixed(k, half_width, gamma_arg)
    if not adaptive:
        return value, half_width, True
    n = half_width
    while n < max_half_width:
        n *= 2
        refined = _determinant_fixed(k, n, gamma_arg)
        if np.max(np.abs(refined - value), initial=0.0) < tol:
            return refined, n, True
        value = refined
    return value, n, False


def infinite_determinant(k, half_width: int = 50, *, adaptive: bool = True, tol: float = 1e-10,
                         gamma_arg: str = "k", max_half_width: int = 1 << 14):
    """Tridiagonal determinant Delta(k) with off-diagonals k/(4 n^2 - 1/4).

    Parameters
    ----------
    k : float or array_like
        Wavenumber(s), k >= 0.
    half_width : int
        Rows n = -half_width..half_width of the starting truncation.
    adaptive : bool
        If True the truncation is doubled until two successive values differ
        by less than ``tol``; the refined value is returned.  With False the
        plain truncated determinant is returned.
    gamma_arg : {"k", "E"}
        Whether gamma_n carries k or E = k**2.

    Returns
    -------
    float or ndarray
    """
    if half_width < 5:
        raise DomainError("half_width must be at least 5")
    karr = np.asarray(k, dtype=float)
    if np.any(karr < 0):
        raise DomainError("k must be non-negative")
    value, _, converged = _determinant(karr, half_width, adaptive, tol, gamma_arg, max_half_width)
    if not converged:
        raise ConvergenceError("determinant truncation did not converge")
    return float(value) if value.ndim == 0 else value


@dataclass(frozen=True)
class NuExponent:
    """Characteristic exponent nu at wavenumber k.

    ``nu`` is real in the low-energy branch and complex (1 - i mu) above the
    point where |1 - Delta| exceeds one.
    """

    nu: complex | float
    k: float
    det_size: int
    converged: bool

    @property
    def is_real(self) -> bool:
        return np.isreal(self.nu)


def _nu_array(k, truncation, allow_complex, gamma_arg="k", tol=1e-10):
    k = np.asarray(k, dtype=float)
    delta, size, converged = _determinant(k, truncation, True, tol, gamma_arg, 1 << 14)
    c = 1.0 - delta * (1.0 - np.cos(np.pi * np.sqrt(ALPHA)))
    outside = np.abs(c) > 1.0
    if np.any(outside) and not allow_complex:
        kbad = np.atleast_1d(k)[np.atleast_1d(outside)].min()
        raise ComplexBranchError(f"cos(pi nu) leaves [-1, 1] at k = {kbad:.6g}")
    if np.any(outside):
        nu = np.arccos(c.astype(complex)) / np.pi
    else:
        nu = np.arccos(np.clip(c, -1.0, 1.0)) / np.pi
    return nu, size, converged


def nu_exponent(k: float, truncation: int = 50, *, allow_complex: bool = False,
                gamma_arg: str = "k") -> NuExponent:
    """Solve cos(pi nu) = 1 - Delta (1 - cos(pi sqrt(alpha))) for nu.

    Raises
    ------
    ComplexBranchError
        If the right-hand side leaves [-1, 1] and ``allow_complex`` is False.
    """
    if k < 0:
        raise DomainError("k must be non-negative")
    if k == 0:
        return NuExponent(nu=0.5, k=0.0, det_size=truncation, converged=True)
    nu, size, converged = _nu_array(k, truncation, allow_complex, gamma_arg)
    nu = complex(nu) if np.iscomplexobj(nu) else float(nu)
    return NuExponent(nu=nu, k=float(k), det_size=size, converged=converged)


def _b_product(nu, E, sign, depth):
    # backward recursion h_N = 1, h_n = 1/(1 - E h_{n+1} / (D_n D_{n+1}))
    h = np.ones(np.broadcast(nu, E).shape, dtype=np.result_type(nu, E, float))
    prod = np.ones_like(h)
    for n in range(depth - 1, 0, -1):
        dn = (2 * n + sign * nu) ** 2 - ALPHA
        dn1 = (2 * n + 2 + sign * nu) ** 2 - ALPHA
        h = 1.0 / (1.0 - E * h / (dn * dn1))
        prod = prod * h
    return prod


def _gamma_ratio(nu, variant):
    if variant == "printed":
        return (gamma_fn(nu / 2 + 1.25) * gamma_fn(nu / 2 + 0.75)
                / (gamma_fn(nu / 2 + 1.25) * gamma_fn(0.75 - nu / 2)))
    if variant == "symmetric":
        return (gamma_fn(nu / 2 + 1.25) * gamma_fn(nu / 2 + 0.75)
                / (gamma_fn(1.25 - nu / 2) * gamma_fn(0.75 - nu / 2)))
    raise DomainError(f"unknown S(nu) variant {variant!r}")


def s_ratio(nu, E, *, variant: str = "symmetric", depth: int = 50, tol: float = 1e-10,
            max_doublings: int = 6):
    """S(nu) = (b_inf^+ / b_inf^-) times the Gamma-function ratio.

    The recursion depth is doubled until the relative change drops below
    ``tol``.

    Raises
    ------
    ConvergenceError
        If ``max_doublings`` doublings do not reach ``tol``.
    """
    nu = np.asarray(nu)
    E = np.asarray(E, dtype=float)

    def ratio(n):
        return _b_product(nu, E, +1, n) / _b_product(nu, E, -1, n)

    b = ratio(depth)
    for _ in range(max_doublings):
        depth *= 2
        b_new = ratio(depth)
        if np.max(np.abs(b_new - b) / np.abs(b_new), initial=0.0) < tol:
            b = b_new
            break
        b = b_new
    else:
        raise ConvergenceError("S(nu) recursion did not converge")
    out = b * _gamma_ratio(nu, variant)
    return out.item() if out.ndim == 0 else out


def _phase_channel(k, phi, truncation, variant, phase_convention, gamma_arg, allow_complex):
    """Return (sin delta, cos delta) arrays without dividing by cos delta."""
    k = np.asarray(k, dtype=float)
    nu, _, _ = _nu_array(k, truncation, allow_complex, gamma_arg)
    E = k * k
    p = -phi if phase_convention == "inner" else phi
    terms = {}
    for s in (+1, -1):
        snu = s * nu
        amp = np.sin(p - snu * np.pi / 2 + np.pi / 4) / np.sin(np.pi * snu)
        m = (4.0 / k) ** snu * s_ratio(snu, E, variant=variant, depth=truncation)
        terms[s] = amp * m
    eta = 0.5 * np.pi * (nu - 0.5)
    num = terms[-1] * np.cos(eta) - terms[+1] * np.sin(eta)
    den = terms[+1] * np.cos(eta) - terms[-1] * np.sin(eta)
    # in the complex branch num/den is real; rotate both onto the real axis
    ref = np.where(np.abs(num) > np.abs(den), num, den)
    rot = np.conj(ref) / np.abs(ref)
    sn = np.real(num * rot)
    cs = np.real(den * rot)
    norm = np.hypot(sn, cs)
    return sn / norm, cs / norm


def phase_shift_channel(k, phi, *, truncation: int = 50, variant: str = "symmetric",
                        phase_convention: str = "inner", gamma_arg: str = "k",
                        allow_complex: bool = True, mass_ratio: float = 1.0):
    """Joint (sin delta, cos delta) for short-range phase ``phi``.

    Returning both components keeps scattering-length poles (cos delta = 0)
    harmless for the dispersion relation.  ``k`` is in 1/R*; for mu/m != 1 it
    is rescaled to the reduced-mass unit before evaluation.
    """
    kk = np.asarray(k, dtype=float)
    if np.any(kk <= 0):
        raise DomainError("k must be strictly positive")
    return _phase_channel(kk * np.sqrt(mass_ratio), phi, truncation, variant, phase_convention,
                          gamma_arg, allow_complex)


def energy_dependent_a(k, phi, parity: str = "even", model: "ScatteringLengthModel | None" = None,
                       **kwargs):
    """a(k) = -tan(delta(k))/k in R*.

    Parameters
    ----------
    k : float or array_like
        Wavenumber(s) > 0.
    phi : float
        Short-range phase of the requested parity (ignored when ``model`` is
        given; the model's phase for ``parity`` is used instead).
    parity : {"even", "odd"}
    model : ScatteringLengthModel, optional
        Supplies phases, truncation, flags and the cache.
    **kwargs
        Forwarded to ``phase_shift_channel`` when no model is given.
    """
    if model is not None:
        return model.a(k, parity)
    # delta is evaluated at the reduced-mass wavenumber; -tan(delta)/k is
    # then already expressed in R*
    sn, cs = phase_shift_channel(k, phi, **kwargs)
    kk = np.asarray(k, dtype=float)
    with np.errstate(divide="ignore"):
        out = -sn / (cs * kk)
    return float(out) if np.ndim(out) == 0 else out


@dataclass
class ScatteringLengthModel:
    """Static or energy-dependent even/odd scattering lengths.

    Results are cached per k; the cache is guarded by a lock so concurrent
    callers always see identical values.
    """

    phi_e: float
    phi_o: float
    mass_ratio: float = 1.0
    truncation_N: int = 50
    variant: str = "symmetric"
    phase_convention: str = "inner"
    gamma_arg: str = "k"
    allow_complex: bool = True
    _cache: dict = field(default_factory=dict, repr=False, compare=False)
    _lock: threading.Lock = field(default_factory=threading.Lock, repr=False, compare=False)

    def channels(self, k):
        """(sin d_e, cos d_e, sin d_o, cos d_o) at k (array in, arrays out)."""
        kk = np.asarray(k, dtype=float).ravel()
        with self._lock:
            missing = np.array([x for x in np.unique(kk) if x not in self._cache])
        if missing.size:
            opts = dict(truncation=self.truncation_N, variant=self.variant,
                        phase_convention=self.phase_convention, gamma_arg=self.gamma_arg,
                        allow_complex=self.allow_complex, mass_ratio=self.mass_ratio)
            se, ce = phase_shift_channel(missing, self.phi_e, **opts)
            so, co = phase_shift_channel(missing, self.phi_o, **opts)
            with self._lock:
                for i, x in enumerate(missing):
                    self._cache.setdefault(float(x), (se[i], ce[i], so[i], co[i]))
        with self._lock:
            vals = np.array([self._cache[float(x)] for x in kk])
        out = tuple(vals[:, i].reshape(np.shape(k)) for i in range(4))
        return out

    def tan_delta(self, k, parity):
        se, ce, so, co = self.channels(k)
        return se / ce if parity == "even" else so / co

    def a(self, k, parity):
        """Scattering length of the given parity in R*."""
        kk = np.asarray(k, dtype=float)
        with np.errstate(divide="ignore"):
            out = -self.tan_delta(kk, parity) / kk
        return float(out) if np.ndim(out) == 0 else out

    def inv_a_e(self, k):
        """1/a_e = -k cot(delta_e); finite at a_e poles."""
        se, ce, _, _ = self.channels(k)
        kk = np.asarray(k, dtype=float)
        with np.errstate(divide="ignore"):
            out = -kk * ce / se
        return float(out) if np.ndim(out) == 0 else out

    def static_limit(self, parity):
        from .units import static_scattering_length
        phi = self.phi_e if parity == "even" else self.phi_o
        return static_scattering_length(phi, self.mass_ratio)
