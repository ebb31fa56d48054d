"""KP versus QDT band comparison: epsilon_n = max_q |E_KP - E_QDT|."""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .dispersion import BandTable, PseudopotentialStrengths, band_structure
from .errors import DomainError
from .qdt import qdt_band_structure
from .units import LatticeParams


@dataclass
class ComparisonReport:
    """Per-band deviations between two band tables.

    Attributes
    ----------
    epsilon : ndarray
        max_q |E_a(q) - E_b(q)| per band (E*).
    residuals : ndarray, shape (n_bands, N_q)
        E_a - E_b.
    gaps_a, gaps_b : ndarray
        Gaps between consecutive bands (E*).
    """

    epsilon: np.ndarray
    residuals: np.ndarray = field(repr=False)
    q_grid: np.ndarray = field(repr=False)
    gaps_a: np.ndarray = field(default=None)
    gaps_b: np.ndarray = field(default=None)
    labels: tuple = ("KP", "QDT")
    params: LatticeParams | None = None

    def as_dict(self) -> dict:
        p = self.params
        return {
            "labels": list(self.labels),
            "epsilon": [float(e) for e in self.epsilon],
            "gaps": {self.labels[0]: [float(g) for g in self.gaps_a],
                     self.labels[1]: [float(g) for g in self.gaps_b]},
            "params": None if p is None else dict(d=p.d, phi_e=p.phi_e, phi_o=p.phi_o,
                                                  mass_ratio=p.mass_ratio, N_L=p.N_L),
        }


def _gaps(table: BandTable) -> np.ndarray:
    b = table.bands
    return b[1:].min(axis=1) - b[:-1].max(axis=1)


def compare_tables(a: BandTable, b: BandTable, n_bands: int | None = None) -> ComparisonReport:
    """epsilon_n over the q points both tables share (all bands are in-band by construction).

    Raises
    ------
    DomainError
        If either table resolves fewer than ``n_bands`` bands or the q grids differ.
    """
    n = min(a.n_bands, b.n_bands) if n_bands is None else n_bands
    if a.n_bands < n or b.n_bands < n:
        raise DomainError(f"band-count mismatch: {a.model_tag} has {a.n_bands}, "
                          f"{b.model_tag} has {b.n_bands}, {n} requested")
    if a.q_grid.shape != b.q_grid.shape or not np.allclose(a.q_grid, b.q_grid, atol=1e-14):
        raise DomainError("tables use different q grids")
    res = a.bands[:n] - b.bands[:n]
    ok = np.isfinite(res)
    eps = np.array([np.max(np.abs(r[m])) if m.any() else np.nan for r, m in zip(res, ok)])
    return ComparisonReport(eps, res, a.q_grid.copy(), _gaps(a), _gaps(b),
                            (a.model_tag, b.model_tag), a.params)


def epsilon_report(params: LatticeParams, n_bands: int, qdt_table: BandTable | None = None,
                   **qdt_opts) -> dict:
    """epsilon_n for static and energy-dependent KP against one QDT table."""
    qdt_table = qdt_band_structure(params, n_bands=n_bands, **qdt_opts) if qdt_table is None else qdt_table
    out = {"qdt": qdt_table}
    for mode in ("static", "energy"):
        s = PseudopotentialStrengths.from_phases(params.phi_e, params.phi_o, params.mass_ratio, mode=mode)
        kp = band_structure(params, s, n_bands)
        out[mode] = compare_tables(kp, qdt_table, n_bands)
        out[f"kp_{mode}"] = kp
    return out
