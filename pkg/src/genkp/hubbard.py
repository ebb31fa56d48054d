"""Bose-Hubbard parameters from band tables and Wannier functions.

Sign convention: ``hopping_from_band`` returns
J(s) = N_L^{-1} sum_q E(q) e^{i q d s}, without a leading minus.  The
Wannier matrix element -<W_k|H|W_l> carries the opposite sign, so
``hopping_from_wannier`` equals -J(l - k).  Comparisons use |J|.

Interaction integrals are the raw four-Wannier overlaps in 1/R*; multiply
by g_1D for an energy.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy import constants

from .bloch import (BlochSet, WannierFunction, apply_kohn_phase, kp_bloch_set, qdt_bloch_set,
                    wannier)
from .dispersion import BandTable, PseudopotentialStrengths, band_structure
from .errors import DomainError, GridError, PoleError
from .qdt import qdt_band_structure
from .units import LatticeParams

OLSHANII_C = 1.4603
SWEEP_SPACINGS = (8.0, 10.0, 12.0, 15.0, 18.0, 22.0, 26.0, 30.0)


def hopping_from_band(table: BandTable, band: int = 1, separation: int = 1,
                      return_residue: bool = False):
    """J(s) = N_L^{-1} sum_j E_n(q_j) e^{i q_j d s}.

    The imaginary part vanishes for a symmetric band; it is discarded and
    optionally returned.

    Raises
    ------
    GridError
        If the table does not hold all N_L quantised Bloch vectors.
    """
    p = table.params
    if table.q_grid.size != p.N_L or not np.allclose(table.q_grid, p.q_grid, atol=1e-14):
        raise GridError("hopping needs the complete quantised q grid")
    E = table.band(band)
    val = np.mean(E * np.exp(1j * table.q_grid * p.d * separation))
    if return_residue:
        return float(val.real), float(abs(val.imag))
    return float(val.real)


def hopping_table(table: BandTable, band: int = 1, max_separation: int = 4) -> dict[int, float]:
    """{s: J(s)} for s = 0..max_separation."""
    return {s: hopping_from_band(table, band, s) for s in range(max_separation + 1)}


def hopping_from_wannier(w_k: WannierFunction, w_l: WannierFunction, bset: BlochSet) -> float:
    """J_{k,l} = -<W_k|H_sp|W_l>, evaluated in the Bloch basis.

    Both Wannier functions are projected onto the Bloch set, so H_sp acts
    as multiplication by E_n(q) and the site discontinuities of the KP
    functions never have to be differentiated.

    Raises
    ------
    DomainError
        If the Wannier functions and the Bloch set belong to different bands.
    """
    if not w_k.band == w_l.band == bset.band:
        raise DomainError("hopping_from_wannier needs Wannier functions of the Bloch set's band")
    states = [bset.state(i) for i in range(bset.q.size)]
    ck = np.array([s.inner(w_k.wavefunction) for s in states])
    cl = np.array([s.inner(w_l.wavefunction) for s in states])
    return float(-np.real(np.sum(np.conj(ck) * bset.energies * cl)))


def interaction_integral(w1: WannierFunction, w2: WannierFunction, w3: WannierFunction,
                         w4: WannierFunction, cutoff: float = 1e-8) -> complex:
    """U = integral of W1* W3* W2 W4 (the index order k, k', l, l').

    Cells where every factor is below ``cutoff`` times its maximum are
    skipped.

    Raises
    ------
    GridError
        If the functions are sampled on different grids.
    """
    ws = [w.wavefunction for w in (w1, w2, w3, w4)]
    for w in ws[1:]:
        ws[0].check_compatible(w)
    keep = np.ones(ws[0].cells.size, bool)
    for w in ws:
        cmax = np.max(np.abs(w.values), axis=1)
        keep &= cmax > cutoff * cmax.max()
    v = [w.values[keep] for w in ws]
    dens = np.conj(v[0]) * v[1] * np.conj(v[2]) * v[3]
    return complex(np.sum(dens * ws[0].weights[None, :]))


def g1d(omega_perp: float, a_s_3d: float, ell_perp: float, hbar: float = constants.hbar) -> float:
    """Olshanii 1D coupling g = 2 hbar omega_perp a_s / (1 - C a_s / (sqrt(2) ell_perp)).

    Raises
    ------
    PoleError
        At the confinement-induced resonance a_s / (sqrt(2) ell_perp) = 1/C.
    """
    ratio = a_s_3d / (np.sqrt(2.0) * ell_perp)
    den = 1.0 - OLSHANII_C * ratio
    if abs(den) < 1e-12:
        raise PoleError(f"confinement-induced resonance at a_s/(sqrt 2 l_perp) = {1 / OLSHANII_C:.6f}")
    return float(2.0 * hbar * omega_perp * a_s_3d / den)


@dataclass
class HubbardParams:
    """Single-channel Bose-Hubbard parameters.

    Attributes
    ----------
    E_onsite : float
        J(0), the band-1 mean energy (E*).
    J : dict
        {s: J(s)} from the band Fourier transform (E*).
    U0, U1, U2 : float
        U_{kkkk}, U_{kkk,k+1}, U_{kkk,k+2} in 1/R*.
    intraband : dict
        Band-resolved elements keyed like "0011" or "0001_k+1".
    validity_bound : float
        2 Delta E_01 / U^{0011}_{kkkk} in E* R*.
    epsilon_k : ndarray or None
        Trap energies at the sites (E*).
    """

    model_tag: str
    params: LatticeParams
    E_onsite: float
    J: dict
    U0: float = float("nan")
    U1: float = float("nan")
    U2: float = float("nan")
    J_wannier: float = float("nan")
    intraband: dict = field(default_factory=dict)
    delta_E01: float = float("nan")
    validity_bound: float = float("nan")
    epsilon_k: np.ndarray | None = None
    scattlen_mode: str = "static"
    kohn_mode: str = "kohn_halfshift"

    def as_dict(self) -> dict:
        out = {
            "model": self.model_tag, "d": self.params.d, "phi_e": self.params.phi_e,
            "phi_o": self.params.phi_o, "N_L": self.params.N_L, "scattlen_mode": self.scattlen_mode,
            "kohn_mode": self.kohn_mode, "E_onsite": self.E_onsite,
            "J": {str(k): v for k, v in self.J.items()}, "J_wannier_1": self.J_wannier,
            "U0": self.U0, "U1": self.U1, "U2": self.U2, "intraband": dict(self.intraband),
            "delta_E01": self.delta_E01, "validity_bound": self.validity_bound,
        }
        if self.epsilon_k is not None:
            out["epsilon_k"] = [float(e) for e in self.epsilon_k]
        return out


@dataclass
class SpinResolvedParams:
    """Parameters for an ion with two internal states.

    ``channels`` maps a spin label to its HubbardParams; ``U_cross`` holds
    U_{alpha beta} = integral |W_alpha|^2 |W_beta|^2 on the same bond.
    """

    channels: dict
    phases: dict
    U_cross: dict = field(default_factory=dict)

    def as_dict(self) -> dict:
        return {"channels": {k: v.as_dict() for k, v in self.channels.items()},
                "phases": {k: list(v) for k, v in self.phases.items()},
                "U_cross": dict(self.U_cross)}


def _tables(params, model, scattlen_mode, n_bands, qdt_opts):
    if model == "kp":
        strengths = PseudopotentialStrengths.from_phases(params.phi_e, params.phi_o, params.mass_ratio,
                                                         mode=scattlen_mode)
        return band_structure(params, strengths, n_bands), strengths
    if model == "qdt":
        return qdt_band_structure(params, n_bands=max(n_bands, 2), **(qdt_opts or {})), None
    raise DomainError("model must be 'kp' or 'qdt'")


def wannier_functions(table: BandTable, band: int, strengths=None, kohn_mode: str = "kohn_halfshift",
                      homes=(0, 1, 2), points_per_cell: int = 512):
    """Kohn-gauged Bloch set and Wannier functions of one band for several home sites."""
    if table.model_tag == "QDT":
        bset = qdt_bloch_set(table, band, points_per_cell)
    else:
        bset = kp_bloch_set(table, band, strengths, points_per_cell)
    if kohn_mode != "none":
        bset = apply_kohn_phase(bset, kohn_mode)
    return bset, {j: wannier(bset, j) for j in homes}


def band_gap_01(table: BandTable) -> float:
    """Gap between the top of band 1 and the bottom of band 2 (E*)."""
    return float(table.band(2).min() - table.band(1).max())


def trap_energies(params: LatticeParams, curvature: float) -> np.ndarray:
    """epsilon_k = curvature x_k^2 / 2 at the sites (internal units)."""
    return 0.5 * curvature * params.site_positions**2


def hubbard_parameters(params: LatticeParams, model: str = "qdt", scattlen_mode: str = "energy",
                       *, intraband: bool = True, kohn_mode: str = "kohn_halfshift",
                       trap_curvature: float = 0.0, max_separation: int = 4,
                       points_per_cell: int = 512, qdt_opts: dict | None = None,
                       return_wannier: bool = False):
    """Full single-channel pipeline: bands, hopping, Wannier-Kohn functions, U integrals.

    With ``return_wannier`` the band-1 Wannier functions {0, 1, 2} are
    returned alongside the parameters.
    """
    n_bands = 2
    table, strengths = _tables(params, model, scattlen_mode, n_bands, qdt_opts)
    J = hopping_table(table, 1, max_separation)
    bset, W = wannier_functions(table, 1, strengths, kohn_mode, (0, 1, 2), points_per_cell)
    w0, w1, w2 = W[0], W[1], W[2]
    out = HubbardParams(
        model_tag=table.model_tag, params=params, E_onsite=J[0], J=J,
        U0=interaction_integral(w0, w0, w0, w0).real,
        U1=interaction_integral(w0, w0, w0, w1).real,
        U2=interaction_integral(w0, w0, w0, w2).real,
        J_wannier=hopping_from_wannier(w0, w1, bset),
        delta_E01=band_gap_01(table),
        scattlen_mode=scattlen_mode if model == "kp" else "exact", kohn_mode=kohn_mode,
        epsilon_k=trap_energies(params, trap_curvature),
    )
    if intraband:
        _, V = wannier_functions(table, 2, strengths, kohn_mode, (0, 1, 2), points_per_cell)
        out.intraband = intraband_elements(w0, V)
        u0011 = out.intraband["0011"]
        out.validity_bound = 2.0 * out.delta_E01 / u0011 if u0011 > 0 else float("inf")
    return (out, W) if return_wannier else out


def intraband_elements(w0: WannierFunction, V: dict) -> dict:
    """The six band-mixing elements quoted for the two lowest bands.

    Keys follow the band labels (alpha_k, alpha_k', alpha_l, alpha_l') with
    sites (k, k, k, k) unless suffixed by the site of the last function.
    """
    v0 = V[0]
    return {
        "0001": interaction_integral(w0, w0, w0, v0).real,
        "0011": interaction_integral(w0, w0, v0, v0).real,
        "0111": interaction_integral(w0, v0, v0, v0).real,
        "1111": interaction_integral(v0, v0, v0, v0).real,
        "0001_k+1": interaction_integral(w0, w0, w0, V[1]).real,
        "0001_k+2": interaction_integral(w0, w0, w0, V[2]).real,
    }


def bh_assemble(channels: dict, d: float, N_L: int = 101, trap_curvature: float = 0.0,
                model: str = "qdt", scattlen_mode: str = "energy", mass_ratio: float = 1.0,
                intraband: bool = False, points_per_cell: int = 512,
                qdt_opts: dict | None = None) -> SpinResolvedParams:
    """Spin-resolved parameters, one pipeline run per ion internal state.

    Parameters
    ----------
    channels : dict
        {label: (phi_e, phi_o)}, e.g. {"down": (-pi/4, pi/4), "up": (-pi/3, pi/3)}.
    """
    out, phases, W = {}, {}, {}
    for label, (pe, po) in channels.items():
        p = LatticeParams(d, pe, po, mass_ratio, N_L)
        out[label], ws = hubbard_parameters(p, model, scattlen_mode, intraband=intraband,
                                            trap_curvature=trap_curvature,
                                            points_per_cell=points_per_cell, qdt_opts=qdt_opts,
                                            return_wannier=True)
        W[label] = ws[0]
        phases[label] = (pe, po)
    cross = {}
    labels = list(channels)
    for a in labels:
        for b in labels:
            cross[f"{a},{b}"] = interaction_integral(W[a], W[a], W[b], W[b]).real
    return SpinResolvedParams(out, phases, cross)


def hopping_sweep(spacings=SWEEP_SPACINGS, phi_e: float = -np.pi / 4, phi_o: float = np.pi / 4,
                  model: str = "kp", scattlen_mode: str = "static", N_L: int = 101,
                  max_separation: int = 4, qdt_opts: dict | None = None) -> dict:
    """|J(s)| versus d for s = 1..max_separation (the hopping-versus-spacing table)."""
    rows = {}
    for d in spacings:
        p = LatticeParams(float(d), phi_e, phi_o, 1.0, N_L)
        table, _ = _tables(p, model, scattlen_mode, 1, qdt_opts)
        rows[float(d)] = {s: hopping_from_band(table, 1, s) for s in range(1, max_separation + 1)}
    return rows
