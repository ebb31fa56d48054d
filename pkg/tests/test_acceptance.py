"""Acceptance criteria 1-8.

Each test records one PASS/FAIL line with the measured values, the pinned
tolerance and the wall time; the lines are echoed in the pytest terminal
summary and printed directly when the file is run as a script.
Published reference numbers are marked PAPER, the rest are
defining identities.
"""
from __future__ import annotations

import sys
import time
from pathlib import Path

import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).parent))
import conftest as cf  # noqa: E402

from genkp import (LatticeParams, PseudopotentialStrengths, apply_kohn_phase, asymptotic_pair,  # noqa: E402
                   band_structure, bloch_from_wannier, compare_tables, energy_dependent_a,
                   hopping_from_band, infinite_determinant, kp_bloch, kp_bloch_set, numerov_propagate,
                   nu_exponent, qdt_bloch_set, qdt_bloch_state, rhs_combined, rhs_even, rhs_odd,
                   static_scattering_length, wannier)
from genkp.bloch import kp_bloch_from_energy, wannier_set  # noqa: E402

D = 15.0
SCI = {"float_kind": lambda v: f"{v:.2e}"}


def record(cid: str, ok: bool, detail: str, runtime: float, budget: float) -> None:
    within = runtime < budget
    line = (f"[{'PASS' if ok and within else 'FAIL'}] C{cid}: {detail} "
            f"| runtime {runtime:.2f}s (budget {budget:g}s{'' if within else ', EXCEEDED'})")
    cf.ACCEPTANCE_LINES.append(line)
    print(line)
    assert ok and within, line


def rel(x, ref):
    return abs(x - ref) / abs(ref)


# 1. limit recovery --------------------------------------------------------

def test_c1_limit_recovery():
    t0 = time.perf_counter()
    rng = np.random.default_rng(20240601)
    k = rng.uniform(0.01, 3.0, 1000)
    d = rng.uniform(1.0, 30.0, 1000)
    a = rng.uniform(-3.0, 3.0, 1000)
    err_even = max(abs(rhs_combined(ki, PseudopotentialStrengths.from_lengths(ai, 0.0), di)
                       - rhs_even(ki, 1.0 / ai, di)) for ki, di, ai in zip(k, d, a))
    err_odd = max(abs(rhs_combined(ki, PseudopotentialStrengths.from_lengths(None, ai), di)
                      - rhs_odd(ki, ai, di)) for ki, di, ai in zip(k, d, a))
    p = LatticeParams(D, 0.0, np.pi / 2, 1.0, 101)
    free = band_structure(p, PseudopotentialStrengths.free(), 1)
    err_free = float(np.max(np.abs(free.band(1) - p.q_grid**2)))
    ok = err_even <= 1e-14 and err_odd <= 1e-14 and err_free <= 1e-10
    record("1", ok, f"|combined-even|={err_even:.1e}, |combined-odd|={err_odd:.1e} (tol 1e-14, 1000 pts); "
           f"free |E1-q^2|={err_free:.1e} (tol 1e-10)", time.perf_counter() - t0, 1.0)


# 2. KP vs QDT at d = 15 -----------------------------------------------------

def test_c2_band_agreement_d15():
    t0 = time.perf_counter()
    qdt = cf.qdt_table(D, 3)
    energy = compare_tables(cf.kp_table(D, "energy", 3), qdt, 3).epsilon
    static = compare_tables(cf.kp_table(D, "static", 3), qdt, 3).epsilon
    ok = bool(np.all(energy < 1.8e-4) and np.all(static[1:] > energy[1:]))
    record("2", ok, f"eps_energy={np.array2string(energy, formatter=SCI)} (PAPER < 1.8e-4); "
           f"eps_static={np.array2string(static, formatter=SCI)} (n=2,3 must exceed energy)",
           time.perf_counter() - t0, 120.0)


# 3. breakdown trend at d = 5 --------------------------------------------------

def test_c3_breakdown_d5():
    t0 = time.perf_counter()
    qdt = cf.qdt_table(5.0, 2)
    rep = compare_tables(cf.kp_table(5.0, "energy", 2), qdt, 2)
    gap_kp, gap_qdt = rep.gaps_a[0], rep.gaps_b[0]
    static_gap = compare_tables(cf.kp_table(5.0, "static", 2), qdt, 2).gaps_a[0]
    ok = bool(np.all(rep.epsilon < 0.017) and rel(gap_kp, 0.43) < 0.10 and rel(gap_qdt, 0.43) < 0.10)
    record("3", ok, f"eps={np.array2string(rep.epsilon, precision=4)} (PAPER < 0.017); gap KP-energy="
           f"{gap_kp:.4f}, QDT={gap_qdt:.4f} (PAPER 0.43 +-10%); info: KP-static gap={static_gap:.4f}",
           time.perf_counter() - t0, 120.0)


# 4. Hubbard numbers at d = 15 -------------------------------------------------

def _qdt_h():
    return cf.hubbard("qdt", "energy", True)[0]


def _kp_h(mode):
    return cf.hubbard("kp", mode, False)[0]


HUBBARD_ITEMS = [
    # id, label, getter, PAPER value, relative tolerance
    ("4a", "|J(1)| QDT (band FT)", lambda: abs(hopping_from_band(cf.qdt_table(D, 3), 1, 1)), 6.0e-3, 0.03),
    ("4b", "|J(1)| KP-Wannier static", lambda: abs(_kp_h("static").J_wannier), 5.8e-3, 0.03),
    ("4c", "U0 QDT", lambda: _qdt_h().U0, 0.1013, 0.03),
    ("4d", "U1 QDT", lambda: _qdt_h().U1, 0.0012, 0.05),
    ("4e", "U2 QDT", lambda: _qdt_h().U2, 0.0004, 0.05),
    ("4f", "U0 KP-energy", lambda: _kp_h("energy").U0, 0.0979, 0.03),
    ("4g", "U1 KP-energy", lambda: _kp_h("energy").U1, 0.0013, 0.05),
    ("4h", "U2 KP-energy", lambda: _kp_h("energy").U2, 0.0004, 0.05),
    ("4i", "U^0001_kkkk QDT", lambda: _qdt_h().intraband["0001"], 0.0155, 0.05),
    ("4j", "U^0011_kkkk QDT", lambda: _qdt_h().intraband["0011"], 0.0303, 0.05),
    ("4k", "U^0111_kkkk QDT", lambda: _qdt_h().intraband["0111"], 0.0068, 0.05),
    ("4l", "U^1111_kkkk QDT", lambda: _qdt_h().intraband["1111"], 0.0376, 0.05),
    ("4m", "U^0001_kkk,k+1 QDT", lambda: _qdt_h().intraband["0001_k+1"], 0.0155, 0.05),
    ("4n", "U^0001_kkk,k+2 QDT", lambda: _qdt_h().intraband["0001_k+2"], -0.0012, 0.05),
]
_C4_START: list[float] = []


@pytest.mark.parametrize("cid,label,get,ref,tol", HUBBARD_ITEMS, ids=[i[0] for i in HUBBARD_ITEMS])
def test_c4_hubbard(cid, label, get, ref, tol):
    if not _C4_START:
        _C4_START.append(time.perf_counter())
    value = get()
    err = rel(value, ref)
    extra = ""
    if cid == "4b":
        extra = f"; info: energy-mode {abs(_kp_h('energy').J_wannier):.4e} ({rel(abs(_kp_h('energy').J_wannier), ref):.1%})"
    record(cid, err < tol, f"{label} = {value:.4e} vs PAPER {ref:g} (err {err:.1%}, tol {tol:.0%}){extra}",
           time.perf_counter() - _C4_START[0], 300.0)


# 5. Numerov oracle ------------------------------------------------------------

def test_c5_numerov_oracle():
    t0 = time.perf_counter()
    rng = np.random.default_rng(5)
    errs = []
    for phi in rng.uniform(-np.pi, np.pi, 10):
        s = numerov_propagate(0.0, phi, "even", x_end=D / 2)
        exact, _ = asymptotic_pair(D / 2, phi, phi)
        errs.append(abs(s.psi_half - exact) / abs(exact))
    e_err = max(errs)
    se = numerov_propagate(0.05, -np.pi / 4, "even", x_end=D / 2)
    so = numerov_propagate(0.05, np.pi / 4, "odd", x_end=D / 2)
    w = se.values * so.derivative() - so.values * se.derivative()
    w = w[np.isfinite(w)]
    w_err = float(np.max(np.abs(w - w[0])) / abs(w[0]))
    # Richardson: endpoint error against a 4x finer reference, step halved
    ends = []
    for f in (1, 2, 4, 16):
        ends.append(numerov_propagate(0.05, np.pi / 4, "even", x_end=D / 2, step=2e-5 / f,
                                      ppw=100 * f, hmax=0.05 / f).psi_half)
    e1, e2, e3 = (abs(v - ends[-1]) for v in ends[:3])
    ratios = (e1 / e2, e2 / e3)
    ok = e_err < 1e-6 and w_err < 1e-8 and min(ratios) >= 8.0
    record("5", ok, f"E=0 max rel err {e_err:.1e} (tol 1e-6, 10 phases); Wronskian drift {w_err:.1e} "
           f"(tol 1e-8); halving ratios {ratios[0]:.1f}, {ratios[1]:.1f} (>= 8)",
           time.perf_counter() - t0, 10.0)


# 6. Scattering-length self-consistency ----------------------------------------

def test_c6_scattering_consistency():
    t0 = time.perf_counter()
    delta0 = infinite_determinant(0.0)
    nu0 = nu_exponent(0.0).nu
    # a(k) = a_static + (pi/3) k + O(k^2), so the limit is taken at k = 1e-6 and
    # cross-checked by Richardson extrapolation from k = 1e-4
    lim, extrap, at_1e4 = {}, {}, {}
    for phi in (np.pi / 6, np.pi / 4, np.pi / 3):
        a0 = static_scattering_length(phi)
        lim[phi] = rel(energy_dependent_a(1e-6, phi, "odd"), a0)
        a1, a2 = energy_dependent_a(1e-4, phi, "odd"), energy_dependent_a(5e-5, phi, "odd")
        extrap[phi] = rel(2 * a2 - a1, a0)
        at_1e4[phi] = rel(a1, a0)
    # shipped path: the determinant doubles its truncation until converged
    trunc = abs(infinite_determinant(0.3, 50) - infinite_determinant(0.3, 100))
    fixed = abs(infinite_determinant(0.3, 50, adaptive=False) - infinite_determinant(0.3, 100, adaptive=False))
    ok = (delta0 == 1.0 and nu0 == 0.5 and max(lim.values()) < 1e-4 and max(extrap.values()) < 1e-4
          and trunc < 1e-10)
    record("6", ok, f"Delta(0)={delta0!r}, nu(0)={nu0!r}; a(k->0) vs static rel err {max(lim.values()):.1e} "
           f"(k=1e-6), {max(extrap.values()):.1e} (extrapolated) (tol 1e-4, phi=pi/6,pi/4,pi/3); "
           f"|Delta_50-Delta_100|(k=0.3)={trunc:.1e} (tol 1e-10); info: at k=1e-4 {max(at_1e4.values()):.1e}, "
           f"fixed-size truncation gap {fixed:.1e}", time.perf_counter() - t0, 30.0)


# 7. Bloch / Wannier property suite -------------------------------------------

def test_c7_bloch_wannier():
    t0 = time.perf_counter()
    p = cf.lattice(D)
    s = cf.strengths("energy")
    kp = cf.kp_table(D, "energy", 3)
    norm_err, jump_err = 0.0, 0.0
    for band in (1, 2):
        for q, E in zip(kp.q_grid, kp.band(band)):
            f = kp_bloch_from_energy(q, E, band, s, p)
            norm_err = max(norm_err, float(np.max(np.abs(f.wavefunction.cell_norms() - 1 / p.N_L))))
            jump_err = max(jump_err, *f.jump_residuals(s))
    homes = (-2, -1, 0, 1, 2)

    def gauged(bset):
        return apply_kohn_phase(bset, "kohn_halfshift")

    def gram_err(group):
        G = np.array([[a.wavefunction.inner(b.wavefunction) for b in group] for a in group])
        return float(np.max(np.abs(G - np.eye(len(group)))))

    raw = {band: kp_bloch_set(kp, band, s) for band in (1, 2)}
    sets = {band: gauged(b) for band, b in raw.items()}
    kp_s = cf.kp_table(D, "static", 3)
    s_static = cf.strengths("static")
    qdt = cf.qdt_table(D, 3)
    # one Hamiltonian per group: bands 1+2 for static KP and QDT, single bands for energy mode
    groups = [wannier_set(sets[1], homes), wannier_set(sets[2], homes),
              [w for b in (1, 2) for w in wannier_set(gauged(kp_bloch_set(kp_s, b, s_static)), homes)],
              [w for b in (1, 2) for w in wannier_set(gauged(qdt_bloch_set(qdt, b)), homes)]]
    ortho = max(gram_err(g) for g in groups)
    cross = gram_err(groups[0] + groups[1])
    w0 = groups[0][homes.index(0)]
    inv = 0.0
    for i in (0, 17, 50, 83, 100):
        back = bloch_from_wannier(w0, sets[1].q[i])
        inv = max(inv, float(np.max(np.abs(back - sets[1].values[i]))))
    spreads = {}
    for tag, b in (("KP", raw[1]), ("QDT", qdt_bloch_set(qdt, 1))):
        spreads[tag] = tuple(wannier(apply_kohn_phase(b, m), 0).wavefunction.spread()
                             for m in ("kohn", "kohn_halfshift"))
    ok = (norm_err < 1e-10 and jump_err < 1e-9 and ortho < 1e-8 and inv < 1e-10
          and all(h < k for k, h in spreads.values()))
    sp = ", ".join(f"{t} {k:.1f}->{h:.2f}" for t, (k, h) in spreads.items())
    record("7", ok, f"cell norm err {norm_err:.1e} (1e-10); jump residual {jump_err:.1e} (1e-9); "
           f"Wannier orthonormality {ortho:.1e} (1e-8); Fourier inversion {inv:.1e} (1e-10); "
           f"spread kohn->halfshift {sp}; info: energy-mode KP band 1/2 cross overlap {cross:.1e}",
           time.perf_counter() - t0, 60.0)


# 8. KP versus QDT Bloch overlay -----------------------------------------------

def test_c8_bloch_overlay():
    t0 = time.perf_counter()
    p = cf.lattice(D, 59)
    i = int(np.argmin(np.abs(p.q_grid + 0.149093)))
    q = float(p.q_grid[i])
    table = cf.qdt_table(D, 1, 59)
    ref = np.abs(qdt_bloch_state(float(table.band(1)[i]), q, p).wavefunction.values[0])
    dev = {}
    for mode in ("energy", "static"):
        f = kp_bloch(q, 1, cf.strengths(mode), p)
        y = f.wavefunction.y
        a = np.abs(f.wavefunction.values[0])
        dev[mode] = {r: float(np.max(np.abs(a - ref)[(y > r) & (y < D - r)]) / ref.max())
                     for r in (1.0, 1.5, 2.0)}
    ok = dev["energy"][1.0] < 0.05
    info = "; ".join(f"{m}: " + ", ".join(f"r={r:g} {v:.1%}" for r, v in dv.items()) for m, dv in dev.items())
    record("8", ok, f"q={q:.6f} (N_L=59 grid), max | |psi_KP|-|psi_QDT| |/max|psi| outside 1 R* = "
           f"{dev['energy'][1.0]:.1%} (PAPER < 5%); {info}", time.perf_counter() - t0, 60.0)


if __name__ == "__main__":
    sys.exit(pytest.main([__file__, "-q", "-p", "no:cacheprovider"]))
