"""Exact 1D reference solver for a chain of -1/x**4 scatterers.

Even and odd solutions are started from the zero-energy asymptotic form
x sin(1/|x| + phi), with its first-order energy correction, at a small radius x0 and propagated outward to the bond
centre d/2 with Numerov's method.  The quasi-momentum at energy E follows
from the 2x2 matching matrix A(q) that glues a cell to its neighbour.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np
from scipy.interpolate import CubicSpline
from scipy.optimize import brentq, minimize
from scipy.optimize.elementwise import find_root

from .dispersion import BandTable
from .errors import DomainError, InGapError, ResolutionError
from .grid import DEFAULT_POINTS, SampledWavefunction, cell_grid
from .units import LatticeParams

X0_DEFAULT = 0.02
PPW_DEFAULT = 800
HMAX_DEFAULT = 0.05
EDGE_TOL = 1e-10


def asymptotic_pair(x, phi_e: float, phi_o: float):
    """Zero-energy solutions psi_e = |x| sin(1/|x| + phi_e), psi_o = x sin(1/|x| + phi_o)."""
    x = np.asarray(x, dtype=float)
    if np.any(x == 0):
        raise DomainError("the asymptotic pair is undefined at x = 0")
    ax = np.abs(x)
    return ax * np.sin(1.0 / ax + phi_e), x * np.sin(1.0 / ax + phi_o)


def _asymptotic(x, phi, E=0.0):
    """x sin(1/x + phi) plus its first-order energy correction.

    With t = 1/x the equation becomes f'' + f = -E f / t^4, and a Born step
    from t = inf gives f = sin(t + phi) - E cos(t + phi)/(6 t^3)
    - E sin(t + phi)/(4 t^4) + O(E t^-5).  At E = 0 this is the exact
    zero-energy solution.
    """
    t = 1.0 / x
    return x * (np.sin(t + phi) * (1.0 - 0.25 * E * x**4) - E * x**3 / 6.0 * np.cos(t + phi))


@lru_cache(maxsize=64)
def _segments(x0, x_end, emax, ppw, hmax, step):
    # step-doubling grid: a segment at step h*2**p is closed once doubling
    # keeps 2h k_local below 2 pi / ppw; integer unit offsets keep every
    # doubling point exactly on the grid
    theta = 2.0 * np.pi / ppw
    k_local = lambda x: np.sqrt(emax + x**-4.0)
    h = min(x0 / 20.0, theta / k_local(x0)) if step is None else step
    segs = []
    x, p = x0, 0
    while True:
        n, hh = 0, h * 2**p
        while True:
            n += 2
            x += 2 * hh
            if x >= x_end or (2 * hh * k_local(x) <= theta and 2 * hh <= hmax):
                break
        segs.append((p, n))
        if x >= x_end:
            break
        p += 1
    units = [0]
    for p, n in segs:
        units.extend([2**p] * n)
    offsets = np.cumsum(units)
    h0 = (x_end - x0) / offsets[-1]
    # one extra point past x_end for the endpoint derivative
    xs = x0 + h0 * np.append(offsets, offsets[-1] + 2 ** segs[-1][0])
    return h0, tuple(segs), xs


def _numerov(E, phi, x0, x_end, ppw, hmax, step, keep=True):
    E = np.atleast_1d(np.asarray(E, dtype=float))
    emax = float(max(E.max(), 0.0))
    h0, segs, xs = _segments(float(x0), float(x_end), emax, int(ppw), float(hmax), step)
    w = xs**-4.0
    store = np.empty((xs.size, E.size)) if keep else None
    # rolling window: y[i-2], y[i-1], y[i]
    ym2 = np.full(E.size, np.nan)
    ym1 = _asymptotic(xs[0], phi, E)
    yi = _asymptotic(xs[1], phi, E)
    if keep:
        store[0], store[1] = ym1, yi
    log_scale = np.zeros(E.size)
    i, first = 1, True
    for p, n in segs:
        h = h0 * 2**p
        c = h * h / 12.0
        for s in range(n - 1 if first else n):
            yj = ym1 if (s > 0 or first) else ym2
            j = i - 1 if (s > 0 or first) else i - 2
            ynew = (2.0 * (1.0 - 5.0 * c * (E + w[i])) * yi
                    - (1.0 + c * (E + w[j])) * yj) / (1.0 + c * (E + w[i + 1]))
            ym2, ym1, yi = ym1, yi, ynew
            i += 1
            if keep:
                store[i] = yi
        first = False
        big = np.max(np.abs(yi))
        if big > 1e100:  # renormalise; never triggers for E >= 0
            ym2, ym1, yi = ym2 / big, ym1 / big, yi / big
            if keep:
                store[: i + 1] /= big
            log_scale += np.log(big)
    h = h0 * 2 ** segs[-1][0]
    c = h * h / 12.0
    ynext = (2.0 * (1.0 - 5.0 * c * (E + w[i])) * yi
             - (1.0 + c * (E + w[i - 1])) * ym1) / (1.0 + c * (E + w[i + 1]))
    dy = (ynext * (1.0 + 2.0 * c * (E + w[i + 1]))
          - ym1 * (1.0 + 2.0 * c * (E + w[i - 1]))) / (2.0 * h)
    y = store[:-1] if keep else None
    return xs[:-1], y, yi, dy, h0, log_scale


@dataclass(frozen=True)
class PropagatedSolution:
    """Numerov solution on [x0, x_end] for one energy and one parity."""

    parity: str
    energy: float
    psi_half: float
    dpsi_half: float
    grid: np.ndarray = field(repr=False)
    values: np.ndarray = field(repr=False)
    x0: float = X0_DEFAULT
    step: float = 0.0
    log_scale: float = 0.0

    def derivative(self) -> np.ndarray:
        """O(h^4) derivative at grid points with equidistant neighbours (NaN elsewhere)."""
        x, y = self.grid, self.values
        out = np.full_like(y, np.nan)
        hl = x[1:-1] - x[:-2]
        hr = x[2:] - x[1:-1]
        ok = np.abs(hl - hr) <= 1e-9 * hr
        h = hr
        q = self.energy + x**-4.0
        c = h * h / 6.0
        der = (y[2:] * (1.0 + c * q[2:]) - y[:-2] * (1.0 + c * q[:-2])) / (2.0 * h)
        out[1:-1] = np.where(ok, der, np.nan)
        return out


def _check_step(step, x0, ppw_min=20.0):
    if step is None:
        return
    if step > x0 / 10.0:
        raise ResolutionError(f"step {step} exceeds x0/10 = {x0 / 10}")
    if step * x0**-2.0 > 2.0 * np.pi / ppw_min:
        raise ResolutionError("step under-resolves the local wavelength at x0")


def numerov_propagate(E: float, phi: float, parity: str = "even", x0: float = X0_DEFAULT,
                      x_end: float = 7.5, step: float | None = None, *, ppw: int = PPW_DEFAULT,
                      hmax: float = HMAX_DEFAULT) -> PropagatedSolution:
    """Propagate psi'' = -(E + 1/x^4) psi from the asymptotic form at x0 to x_end.

    The first two samples come from the energy-corrected asymptotic form, so
    the short-range phase fixes the inner region to O(E x0^4).

    Parameters
    ----------
    E : float
        Energy in E*.
    phi : float
        Short-range phase.  On x > 0 the even and odd solutions coincide;
        ``parity`` only labels how the solution extends to x < 0.
    x0, x_end : float
        Matching radius and end point.
    step : float, optional
        Initial step; by default min(x0/20, 2 pi/(ppw k_local(x0))).
    ppw : int
        Points per local wavelength that trigger a step doubling.
    hmax : float
        Largest step allowed.

    Returns
    -------
    PropagatedSolution
        Endpoint derivative from the O(h^4) Numerov-consistent formula.
    """
    if not 0 < x0 < x_end:
        raise DomainError("need 0 < x0 < x_end")
    if parity not in ("even", "odd"):
        raise DomainError("parity must be 'even' or 'odd'")
    _check_step(step, x0)
    xs, y, ye, dye, h0, ls = _numerov([E], phi, x0, x_end, ppw, hmax, step)
    return PropagatedSolution(parity, float(E), float(ye[0]), float(dye[0]), xs, y[:, 0].copy(),
                              float(x0), float(h0), float(ls[0]))


@dataclass
class HalfCellData:
    """Even/odd values and derivatives at d/2 for a batch of energies."""

    E: np.ndarray
    pe: np.ndarray
    dpe: np.ndarray
    po: np.ndarray
    dpo: np.ndarray
    grid: np.ndarray | None = None
    ye: np.ndarray | None = None
    yo: np.ndarray | None = None

    @property
    def wronskian(self) -> np.ndarray:
        return self.pe * self.dpo - self.po * self.dpe

    @property
    def cos_qd(self) -> np.ndarray:
        """Closed-form cos(qd) from the null-space condition of A(q)."""
        return (self.pe * self.dpo + self.po * self.dpe) / self.wronskian


@dataclass(frozen=True)
class QdtSettings:
    """Numerical knobs of the QDT solver."""

    x0: float = X0_DEFAULT
    ppw: int = PPW_DEFAULT
    hmax: float = HMAX_DEFAULT
    step: float | None = None


def half_cell(E, phi_e, phi_o, d, settings: QdtSettings = QdtSettings(), keep: bool = False,
              emax: float | None = None) -> HalfCellData:
    """Propagate both parities to d/2 for an array of energies."""
    E = np.atleast_1d(np.asarray(E, dtype=float))
    if emax is not None:
        # a fixed grid for every batch keeps results independent of batching
        E_grid = np.append(E, emax)
    else:
        E_grid = E
    _check_step(settings.step, settings.x0)
    n = E.size
    ends = {}
    for parity, phi in (("e", phi_e), ("o", phi_o)):
        # the top energy pins the step-doubling grid, so results do not
        # depend on how energies are batched
        xs, y, p, dp, _, _ = _numerov(E_grid, phi, settings.x0, d / 2, settings.ppw,
                                      settings.hmax, settings.step, keep=keep)
        ends[parity] = (p[:n], dp[:n], y[:, :n] if keep else None)
    out = HalfCellData(E, ends["e"][0], ends["e"][1], ends["o"][0], ends["o"][1])
    if keep:
        out.grid, out.ye, out.yo = xs, ends["e"][2], ends["o"][2]
    return out


@dataclass(frozen=True)
class InGap:
    """Marker returned when |cos(qd)| > 1 at the requested energy."""

    cos_qd: float


def matching_matrix(q: float, data: HalfCellData, d: float, index: int = 0) -> np.ndarray:
    """A(q) acting on (c_e, c_o): Bloch matching of value and slope across the cell."""
    z = np.exp(1j * q * d)
    pe, dpe, po, dpo = data.pe[index], data.dpe[index], data.po[index], data.dpo[index]
    return np.array([[pe * (1 - z), po * (1 + z)],
                     [dpe * (1 + z), dpo * (1 - z)]])


def _det_abs(theta, data, d, index=0):
    return abs(np.linalg.det(matching_matrix(theta / d, data, d, index)))


def quasimomentum_simplex(E: float, phi_e: float, phi_o: float, d: float,
                          settings: QdtSettings = QdtSettings(), data: HalfCellData | None = None):
    """q >= 0 minimising |det A(q)| with the Nelder-Mead simplex (or InGap)."""
    data = half_cell([E], phi_e, phi_o, d, settings) if data is None else data
    thetas = np.linspace(0.0, np.pi, 257)
    vals = np.array([_det_abs(t, data, d) for t in thetas])
    t0 = thetas[np.argmin(vals)]
    res = minimize(lambda t: _det_abs(np.clip(t[0], 0.0, np.pi), data, d), x0=[t0],
                   method="Nelder-Mead",
                   options=dict(xatol=1e-14, fatol=1e-300, maxiter=2000, initial_simplex=[[t0], [t0 + 1e-3]]))
    theta = float(np.clip(res.x[0], 0.0, np.pi))
    scale = np.max(np.abs(matching_matrix(theta / d, data, d))) ** 2
    if res.fun > 1e-6 * scale:
        return InGap(float(data.cos_qd[0]))
    return theta / d


def quasimomentum_for_energy(E: float, phi_e: float, phi_o: float, d: float,
                             settings: QdtSettings = QdtSettings(), *, method: str = "closed",
                             cross_check: bool = False):
    """Bloch vector q >= 0 at energy E, or ``InGap``.

    ``method="closed"`` uses cos(qd) = (pe dpo + po dpe)/(pe dpo - po dpe) at
    d/2; ``method="simplex"`` minimises |det A(q)| directly.  With
    ``cross_check`` both are computed and must agree to 1e-8 in q.
    """
    if not E > 0:
        raise DomainError("E must be positive")
    data = half_cell([E], phi_e, phi_o, d, settings)
    c = float(data.cos_qd[0])
    closed = InGap(c) if abs(c) > 1.0 + EDGE_TOL else float(np.arccos(np.clip(c, -1, 1)) / d)
    if method == "closed" and not cross_check:
        return closed
    simplex = quasimomentum_simplex(E, phi_e, phi_o, d, settings, data)
    if cross_check:
        both_gap = isinstance(closed, InGap) and isinstance(simplex, InGap)
        if not both_gap and (isinstance(closed, InGap) or isinstance(simplex, InGap)
                             or abs(closed - simplex) > 1e-8):
            raise ResolutionError(f"closed form {closed} and simplex {simplex} disagree")
    return closed if method == "closed" else simplex


def _band_windows(E, c):
    inside = np.abs(c) <= 1.0
    wins = []
    i = 0
    while i < E.size:
        if inside[i]:
            j = i
            while j + 1 < E.size and inside[j + 1]:
                j += 1
            wins.append((i, j))
            i = j + 1
        else:
            i += 1
    return wins


def default_energy_grid(d: float, n_bands: int, points_per_band: int = 2000) -> np.ndarray:
    """Log-then-linear grid up to ((n_bands + 1.2) pi / d)**2."""
    emax = ((n_bands + 1.2) * np.pi / d) ** 2
    low = np.geomspace(1e-6 * emax, 0.01 * emax, points_per_band // 4, endpoint=False)
    lin = np.linspace(0.01 * emax, emax, points_per_band * (n_bands + 1))
    return np.concatenate([low, lin])


def qdt_band_structure(params: LatticeParams, energy_grid=None, x0: float = X0_DEFAULT,
                       step: float | None = None, *, n_bands: int = 3, ppw: int = PPW_DEFAULT,
                       hmax: float = HMAX_DEFAULT) -> BandTable:
    """QDT bands on the quantised q grid.

    The energy grid locates band windows through the sign of |cos(qd)| - 1.
    Band edges and then every (band, q_j) pair are solved by a vectorised
    bracketed root search (Chandrupatla) inside the detected windows.  This
    replaces interpolation of the grid data, which would cap the accuracy
    at the grid spacing.

    Raises
    ------
    ResolutionError
        If a band window holds fewer than 4 grid energies or fewer than
        ``n_bands`` windows are found.
    """
    settings = QdtSettings(x0, ppw, hmax, step)
    d = params.d
    E = default_energy_grid(d, n_bands) if energy_grid is None else np.sort(np.asarray(energy_grid, float))
    emax = float(E.max())
    c = half_cell(E, params.phi_e, params.phi_o, d, settings, emax=emax).cos_qd
    wins = _band_windows(E, c)
    if len(wins) < n_bands:
        raise ResolutionError(f"only {len(wins)} band windows found on the energy grid")
    wins = wins[:n_bands]
    for i, j in wins:
        if j - i + 1 < 4:
            raise ResolutionError("band window resolved by fewer than 4 energies")

    def cos_qd(e):
        return half_cell(e, params.phi_e, params.phi_o, d, settings, emax=emax).cos_qd

    # edges: |cos qd| - 1 changes sign between the last outside and first inside sample
    nb = len(wins)
    first = np.array([E[i] for i, _ in wins])
    last = np.array([E[j] for _, j in wins])
    lo_out = np.array([E[i - 1] if i > 0 else 0.0 for i, _ in wins])
    hi_out = np.array([E[j + 1] if j + 1 < E.size else E[j] for _, j in wins])
    edge = find_root(lambda e: np.abs(cos_qd(e)) - 1.0,
                     (np.concatenate([lo_out, last]), np.concatenate([first, hi_out])),
                     tolerances=dict(xatol=0.0, xrtol=1e-14, fatol=1e-14), maxiter=100)
    edges_lo, edges_hi = edge.x[:nb], edge.x[nb:]
    c_lo, c_hi = cos_qd(edges_lo), cos_qd(edges_hi)

    # every (band, q_j) pair solved in one vectorised bracketed search
    q = params.q_grid
    cq = np.cos(q * d)
    target = np.clip(cq[None, :], np.minimum(c_lo, c_hi)[:, None], np.maximum(c_lo, c_hi)[:, None])
    lo = np.broadcast_to(edges_lo[:, None], target.shape).ravel()
    hi = np.broadcast_to(edges_hi[:, None], target.shape).ravel()
    res = find_root(lambda e, t: cos_qd(e) - t, (lo, hi), args=(target.ravel(),),
                    tolerances=dict(xatol=0.0, xrtol=1e-14, fatol=1e-13), maxiter=100)
    bands = res.x.reshape(target.shape)
    # the zone centre (and boundary, for even N_L never sampled) sits on an edge
    for n in range(nb):
        bands[n, np.abs(cq - c_lo[n]) <= 1e-15] = edges_lo[n]
        bands[n, np.abs(cq - c_hi[n]) <= 1e-15] = edges_hi[n]
    return BandTable(params=params, bands=bands, q_grid=q, model_tag="QDT", settings=settings)


def null_coefficients(data: HalfCellData, q, d):
    """(c_e, c_o) spanning the null space of A(q), from the better-conditioned row."""
    z = np.exp(1j * np.asarray(q) * d)
    pe, dpe, po, dpo = data.pe, data.dpe, data.po, data.dpo
    v1 = (po * (1 + z), -pe * (1 - z))
    v2 = (dpo * (1 - z), -dpe * (1 + z))
    r1 = np.hypot(np.abs(v1[0]), np.abs(v1[1])) / np.hypot(pe, po)
    r2 = np.hypot(np.abs(v2[0]), np.abs(v2[1])) / np.hypot(dpe, dpo)
    use1 = r1 >= r2
    ce = np.where(use1, v1[0], v2[0])
    co = np.where(use1, v1[1], v2[1])
    nrm = np.hypot(np.abs(ce), np.abs(co))
    return ce / nrm, co / nrm


@dataclass
class QdtBlochState:
    """QDT Bloch state psi = c_e psi_e + c_o psi_o inside the ion-centred cell."""

    energy: float
    q: float
    c_e: complex
    c_o: complex
    wavefunction: SampledWavefunction = field(repr=False)
    band: int | None = None

    def null_residual(self, data: HalfCellData, d: float, index: int = 0) -> float:
        A = matching_matrix(self.q, data, d, index)
        v = np.array([self.c_e, self.c_o])
        return float(np.linalg.norm(A @ v) / (np.linalg.norm(A) * np.linalg.norm(v)))


def _sample_half(grid, y, phi, yloc, E):
    """Solution sampled at local coordinates yloc in [0, d/2] (0 at the ion)."""
    out = np.empty((yloc.size, y.shape[1]))
    inner = yloc < grid[0]
    spline = CubicSpline(grid, y, axis=0)
    out[~inner] = spline(yloc[~inner])
    ys = yloc[inner]
    with np.errstate(divide="ignore", invalid="ignore"):
        xs = np.where(ys > 0, ys, 1.0)[:, None]
        asym = np.where(ys[:, None] > 0, _asymptotic(xs, phi, np.asarray(E)[None, :]), 0.0)
    out[inner] = asym
    return out


def qdt_bloch_states(params: LatticeParams, energies, qs, settings: QdtSettings = QdtSettings(),
                     points_per_cell: int = DEFAULT_POINTS, band: int | None = None):
    """Normalised QDT Bloch states for matching arrays of (E, q)."""
    energies = np.atleast_1d(np.asarray(energies, float))
    qs = np.atleast_1d(np.asarray(qs, float))
    d = params.d
    data = half_cell(energies, params.phi_e, params.phi_o, d, settings, keep=True)
    c = data.cos_qd
    bad = np.abs(c) > 1.0 + 1e-8
    if np.any(bad):
        raise InGapError(f"energy {energies[bad][0]} lies in a gap (cos qd = {c[bad][0]})")
    ce, co = null_coefficients(data, qs, d)
    if points_per_cell % 2:
        raise ResolutionError("points_per_cell must be even so d/2 is a sample")
    y = cell_grid(d, points_per_cell)
    half = points_per_cell // 2
    right = y[: half + 1]
    se = _sample_half(data.grid, data.ye, params.phi_e, right, energies)
    so = _sample_half(data.grid, data.yo, params.phi_o, right, energies)
    z = np.exp(1j * qs * d)
    # bond cell [0, d]: right of the ion at 0, then left of the ion at d
    vals = np.empty((qs.size, y.size), complex)
    vals[:, : half + 1] = (ce[None, :] * se + co[None, :] * so).T
    dist = d - y[half:]
    se_l = _sample_half(data.grid, data.ye, params.phi_e, dist, energies)
    so_l = _sample_half(data.grid, data.yo, params.phi_o, dist, energies)
    vals[:, half:] = (z[None, :] * (ce[None, :] * se_l - co[None, :] * so_l)).T
    cells = params.j_indices
    states = []
    w = None
    for i in range(qs.size):
        full = np.exp(1j * qs[i] * d * cells)[:, None] * vals[i][None, :]
        wf = SampledWavefunction(full, d, cells, "QDT", dict(q=float(qs[i]), E=float(energies[i]), band=band))
        if w is None:
            w = wf.weights
        cell_norm = np.sum(np.abs(vals[i]) ** 2 * w)
        scale = 1.0 / np.sqrt(cell_norm * params.N_L)
        wf.values *= scale
        states.append(QdtBlochState(float(energies[i]), float(qs[i]), complex(ce[i] * scale),
                                    complex(co[i] * scale), wf, band))
    return states, data


def qdt_bloch_state(E: float, q: float, params: LatticeParams, settings: QdtSettings = QdtSettings(),
                    points_per_cell: int = DEFAULT_POINTS) -> QdtBlochState:
    """Single QDT Bloch state normalised to 1/N_L per cell.

    Raises
    ------
    InGapError
        If E lies in a gap.
    """
    states, _ = qdt_bloch_states(params, [E], [q], settings, points_per_cell)
    return states[0]


def refine_energy_for_q(q: float, band_lo: float, band_hi: float, params: LatticeParams,
                        settings: QdtSettings = QdtSettings()) -> float:
    """Scalar solve of cos(qd) = c(E) in [band_lo, band_hi] (used for off-grid q)."""
    target = np.cos(q * params.d)

    def f(e):
        return float(half_cell([e], params.phi_e, params.phi_o, params.d, settings).cos_qd[0]) - target

    return brentq(f, band_lo, band_hi, xtol=1e-15)
