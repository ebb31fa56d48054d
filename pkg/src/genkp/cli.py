"""Command-line front end.

Subcommands: ``bands``, ``compare``, ``bloch``, ``wannier``, ``hubbard`` and
``scales``.  Every command accepts the shared lattice flags and an optional
INI file (``--config``); flags given on the command line win over the file.

All numbers are in atom-ion units (E*, R*) unless an SI block is requested
with ``--atom-mass`` and ``--c4``.  The atom mass is used as given: pass
the reduced mass to obtain the barred scales.
"""
from __future__ import annotations

import argparse
import configparser
import csv
import io
import json
import sys
from dataclasses import dataclass, field, fields
from pathlib import Path

import numpy as np
from scipy import constants

from .bloch import apply_kohn_phase, kp_bloch_set, qdt_bloch_set, wannier
from .comparison import compare_tables
from .dispersion import PseudopotentialStrengths, band_structure
from .errors import DomainError, GenKPError, GridError
from .hubbard import SWEEP_SPACINGS, bh_assemble, hopping_sweep, hubbard_parameters
from .qdt import qdt_band_structure
from .units import LatticeParams, atom_ion_scales, c4_from_polarizability

SCHEMA_VERSION = "1.0"


@dataclass
class RunConfig:
    """Everything a command needs; round-trips through an INI file."""

    model: str = "both"
    d: float = 15.0
    phi_e: float = -np.pi / 4
    phi_o: float = np.pi / 4
    mass_ratio: float = 1.0
    N_L: int = 101
    n_bands: int = 3
    scattlen: str = "energy"
    out: str = ""
    x0: float = 0.02
    step: float | None = None
    truncation: int = 50
    points_per_cell: int = 512
    q: float | None = None
    site: int = 0
    band: int = 1
    kohn: str = "kohn_halfshift"
    spins: list = field(default_factory=list)
    trap_curvature: float = 0.0
    sweep: bool = False
    atom_mass_u: float | None = None
    c4: float | None = None
    alpha_au: float | None = None

    SECTIONS = {
        "lattice": ("d", "phi_e", "phi_o", "mass_ratio", "N_L"),
        "model": ("model", "n_bands", "scattlen", "truncation"),
        "qdt": ("x0", "step"),
        "wavefunctions": ("q", "site", "band", "kohn", "points_per_cell"),
        "hubbard": ("spins", "trap_curvature", "sweep"),
        "units": ("atom_mass_u", "c4", "alpha_au"),
        "output": ("out",),
    }

    def lattice(self) -> LatticeParams:
        return LatticeParams(self.d, self.phi_e, self.phi_o, self.mass_ratio, self.N_L)

    def to_ini(self) -> str:
        cp = configparser.ConfigParser()
        for sec, keys in self.SECTIONS.items():
            cp[sec] = {k: _fmt_value(getattr(self, k)) for k in keys}
        buf = io.StringIO()
        cp.write(buf)
        return buf.getvalue()

    @classmethod
    def from_ini(cls, text: str) -> "RunConfig":
        cp = configparser.ConfigParser()
        cp.read_string(text)
        kwargs = {}
        types = {f.name: f.type for f in fields(cls)}
        for sec, keys in cls.SECTIONS.items():
            if sec not in cp:
                continue
            for k in keys:
                if k in cp[sec]:
                    kwargs[k] = _parse_value(cp[sec][k], types[k], getattr(cls(), k))
        return cls(**kwargs)


def _fmt_value(v) -> str:
    if v is None:
        return ""
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, float):
        return repr(v)
    if isinstance(v, list):
        return "; ".join(v)
    return str(v)


def _parse_value(s: str, typ, default):
    s = s.strip()
    if isinstance(default, bool):
        return s.lower() in ("1", "true", "yes", "on")
    if isinstance(default, list):
        return [t.strip() for t in s.split(";") if t.strip()]
    if s == "":
        return None if default is None or "None" in str(typ) else default
    if isinstance(default, int):
        return int(s)
    if isinstance(default, float) or "float" in str(typ):
        return float(s)
    return s


def _g17(x) -> str:
    return format(float(x), ".17g")


def _write_text(path: str, text: str):
    if not path or path == "-":
        sys.stdout.write(text)
    else:
        Path(path).parent.mkdir(parents=True, exist_ok=True)
        Path(path).write_text(text)


def _csv(header, rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for r in rows:
        w.writerow([_g17(v) for v in r])
    return buf.getvalue()


def _json(obj) -> str:
    return json.dumps(dict(schema_version=SCHEMA_VERSION, **obj), indent=2, sort_keys=True,
                      default=_json_default) + "\n"


def _json_default(o):
    if isinstance(o, np.ndarray):
        return o.tolist()
    if isinstance(o, (np.floating, np.integer)):
        return o.item()
    raise TypeError(type(o))


def _suffixed(path: str, tag: str) -> str:
    if not path or path == "-":
        return path
    p = Path(path)
    return str(p.with_name(f"{p.stem}_{tag}{p.suffix}"))


def _strengths(cfg: RunConfig) -> PseudopotentialStrengths:
    mode = "energy" if cfg.scattlen.startswith("energy") else "static"
    opts = dict(truncation_N=cfg.truncation) if mode == "energy" else {}
    return PseudopotentialStrengths.from_phases(cfg.phi_e, cfg.phi_o, cfg.mass_ratio, mode=mode, **opts)


def _qdt_opts(cfg: RunConfig) -> dict:
    return dict(x0=cfg.x0, step=cfg.step)


def _table(cfg: RunConfig, model: str):
    p = cfg.lattice()
    if model == "kp":
        s = _strengths(cfg)
        return band_structure(p, s, cfg.n_bands), s
    return qdt_band_structure(p, n_bands=cfg.n_bands, **_qdt_opts(cfg)), None


def _check_table(t):
    if t.symmetry_residual() > 1e-8:
        raise GenKPError(f"{t.model_tag} table violates E(q) = E(-q)")
    if t.ordering_violation() > 0:
        raise GenKPError(f"{t.model_tag} bands overlap")
    if t.strengths is not None and t.dispersion_residual() > 1e-10:
        raise GenKPError("KP dispersion residual above 1e-10")


def cmd_bands(cfg: RunConfig) -> dict:
    """Band CSV ``q,E_1,...,E_n``, one file per model."""
    models = ["kp", "qdt"] if cfg.model == "both" else [cfg.model]
    written = {}
    for m in models:
        t, _ = _table(cfg, m)
        _check_table(t)
        header = ["q"] + [f"E_{n}" for n in range(1, t.n_bands + 1)]
        rows = np.column_stack([t.q_grid, t.bands.T])
        path = _suffixed(cfg.out, m) if len(models) > 1 else cfg.out
        _write_text(path, _csv(header, rows))
        written[m] = path
    return written


def cmd_compare(cfg: RunConfig) -> dict:
    """epsilon_n for static and energy-dependent KP against QDT."""
    p = cfg.lattice()
    qdt = qdt_band_structure(p, n_bands=cfg.n_bands, **_qdt_opts(cfg))
    report = {"params": dict(d=p.d, phi_e=p.phi_e, phi_o=p.phi_o, mass_ratio=p.mass_ratio, N_L=p.N_L),
              "n_bands": cfg.n_bands}
    for mode in ("static", "energy"):
        kp = band_structure(p, PseudopotentialStrengths.from_phases(p.phi_e, p.phi_o, p.mass_ratio, mode=mode),
                            cfg.n_bands)
        r = compare_tables(kp, qdt, cfg.n_bands)
        report[mode] = dict(epsilon=r.epsilon.tolist(), gaps_kp=r.gaps_a.tolist(), gaps_qdt=r.gaps_b.tolist())
    _write_text(cfg.out, _json(report))
    return report


def _grid_index(p: LatticeParams, q: float) -> int:
    i = int(np.argmin(np.abs(p.q_grid - q)))
    if abs(p.q_grid[i] - q) > 1e-6:
        raise GridError(f"q = {q} is not on the quantised grid; nearest is {float(p.q_grid[i])!r}")
    return i


def _bloch_set(cfg: RunConfig, model: str):
    t, s = _table(cfg, model)
    if model == "qdt":
        return qdt_bloch_set(t, cfg.band, cfg.points_per_cell)
    return kp_bloch_set(t, cfg.band, s, cfg.points_per_cell)


def _wave_outputs(wf, path, meta):
    x = wf.x.ravel()
    v = wf.values.ravel()
    _write_text(path, _csv(["x", "re", "im", "abs"], np.column_stack([x, v.real, v.imag, np.abs(v)])))
    side = dict(meta, site_positions=wf.site_positions.tolist(), norm=wf.norm2())
    if path and path != "-":
        _write_text(str(Path(path).with_suffix(".json")), _json(side))
    return side


def cmd_bloch(cfg: RunConfig) -> dict:
    """Bloch function at a quantised q as ``x,re,im,abs`` plus a sidecar JSON."""
    if cfg.q is None:
        raise DomainError("bloch needs --q")
    models = ["kp", "qdt"] if cfg.model == "both" else [cfg.model]
    out = {}
    for m in models:
        b = _bloch_set(cfg, m)
        i = _grid_index(cfg.lattice(), cfg.q)
        path = _suffixed(cfg.out, m) if len(models) > 1 else cfg.out
        out[m] = _wave_outputs(b.state(i), path, dict(model=m, q=float(b.q[i]), E=float(b.energies[i]),
                                                      band=cfg.band))
    return out


def cmd_wannier(cfg: RunConfig) -> dict:
    """Wannier-Kohn function of one band and home site."""
    models = ["kp", "qdt"] if cfg.model == "both" else [cfg.model]
    out = {}
    for m in models:
        b = _bloch_set(cfg, m)
        if cfg.kohn != "none":
            b = apply_kohn_phase(b, cfg.kohn)
        w = wannier(b, cfg.site)
        path = _suffixed(cfg.out, m) if len(models) > 1 else cfg.out
        wf = w.wavefunction
        out[m] = _wave_outputs(wf, path, dict(model=m, band=cfg.band, home=cfg.site, kohn=cfg.kohn,
                                              mean=wf.mean_position(), spread=wf.spread(),
                                              home_weight=w.home_weight()))
    return out


def _parse_spins(specs) -> dict:
    out = {}
    for s in specs:
        try:
            label, pe, po = s.split(":")
            out[label] = (float(pe), float(po))
        except ValueError as exc:
            raise DomainError(f"spin channel must read label:phi_e:phi_o, got {s!r}") from exc
    return out


def cmd_hubbard(cfg: RunConfig) -> dict:
    """Hubbard parameters (plus spin channels, d-sweep and SI block on request)."""
    p = cfg.lattice()
    models = ["kp", "qdt"] if cfg.model == "both" else [cfg.model]
    report = {}
    for m in models:
        h = hubbard_parameters(p, m, "energy" if cfg.scattlen.startswith("energy") else "static",
                               kohn_mode=cfg.kohn, trap_curvature=cfg.trap_curvature,
                               points_per_cell=cfg.points_per_cell, qdt_opts=_qdt_opts(cfg))
        report[m] = h.as_dict()
        spins = _parse_spins(cfg.spins)
        if spins:
            sr = bh_assemble(spins, p.d, p.N_L, cfg.trap_curvature, m, h.scattlen_mode
                             if m == "kp" else "energy", p.mass_ratio, points_per_cell=cfg.points_per_cell,
                             qdt_opts=_qdt_opts(cfg))
            report[m]["spin_resolved"] = sr.as_dict()
        if cfg.sweep:
            opts = _qdt_opts(cfg) if m == "qdt" else None
            mode = "static" if m == "kp" else "energy"
            sweep = hopping_sweep(SWEEP_SPACINGS, p.phi_e, p.phi_o, m, mode, p.N_L, qdt_opts=opts)
            report[m]["sweep"] = {_g17(d): {str(s): v for s, v in row.items()} for d, row in sweep.items()}
    si = _si_block(cfg)
    if si:
        report["si"] = si
        for m in models:
            vb = report[m]["validity_bound"]
            report[m]["validity_threshold_hz"] = vb * si["Estar_hz"] if np.isfinite(vb) else None
    _write_text(cfg.out, _json(report))
    return report


def _si_block(cfg: RunConfig) -> dict:
    if cfg.atom_mass_u is None or (cfg.c4 is None and cfg.alpha_au is None):
        return {}
    c4 = cfg.c4 if cfg.c4 is not None else c4_from_polarizability(cfg.alpha_au)
    sc = atom_ion_scales(cfg.atom_mass_u * constants.atomic_mass, c4, cfg.mass_ratio)
    return dict(Estar_J=sc.Estar, Estar_hz=sc.Estar_hz, Rstar_m=sc.Rstar, C4=sc.C4,
                atom_mass_kg=sc.atom_mass, mass_ratio=sc.mass_ratio)


def cmd_scales(cfg: RunConfig) -> dict:
    """E*, R* for an atom mass (u) and C4 (J m^4) or polarisability (a.u.)."""
    si = _si_block(cfg)
    if not si:
        raise DomainError("scales needs --atom-mass and one of --c4 / --alpha")
    _write_text(cfg.out, _json(si))
    return si


COMMANDS = {"bands": cmd_bands, "compare": cmd_compare, "bloch": cmd_bloch,
            "wannier": cmd_wannier, "hubbard": cmd_hubbard, "scales": cmd_scales}

FLAG_MAP = {"d": "d", "phi_e": "phi_e", "phi_o": "phi_o", "mass_ratio": "mass_ratio", "nl": "N_L",
            "bands": "n_bands", "model": "model", "scattlen": "scattlen", "out": "out", "x0": "x0",
            "step": "step", "truncation": "truncation", "points": "points_per_cell", "q": "q",
            "site": "site", "band": "band", "kohn": "kohn", "spin": "spins",
            "trap_curvature": "trap_curvature", "sweep": "sweep", "atom_mass": "atom_mass_u",
            "c4": "c4", "alpha": "alpha_au"}


def build_parser() -> argparse.ArgumentParser:
    shared = argparse.ArgumentParser(add_help=False)
    g = shared.add_argument_group("lattice and model")
    g.add_argument("--config", help="INI file; flags override its values")
    g.add_argument("--d", type=float, help="ion spacing in R* (default 15)")
    g.add_argument("--phi-e", type=float, help="even short-range phase (default -pi/4)")
    g.add_argument("--phi-o", type=float, help="odd short-range phase (default pi/4)")
    g.add_argument("--mass-ratio", type=float, help="mu/m (default 1)")
    g.add_argument("--nl", type=int, help="number of sites, odd (default 101)")
    g.add_argument("--bands", type=int, help="number of bands (default 3)")
    g.add_argument("--model", choices=["kp", "qdt", "both"], help="default both")
    g.add_argument("--scattlen", choices=["static", "energy"], help="KP scattering lengths (default energy)")
    g.add_argument("--out", help="output path; '-' or empty for stdout")
    n = shared.add_argument_group("numerics")
    n.add_argument("--x0", type=float, help="QDT matching radius (default 0.02)")
    n.add_argument("--step", type=float, help="QDT initial Numerov step")
    n.add_argument("--truncation", type=int, help="continued-fraction depth (default 50)")
    n.add_argument("--points", type=int, help="samples per cell (default 512)")
    n.add_argument("--dump-config", action="store_true", help="print the merged config and exit")

    ap = argparse.ArgumentParser(prog="genkp", description=__doc__.splitlines()[0])
    sub = ap.add_subparsers(dest="command", required=True)
    sub.add_parser("bands", parents=[shared], help="band tables as CSV")
    sub.add_parser("compare", parents=[shared], help="epsilon_n report as JSON")
    b = sub.add_parser("bloch", parents=[shared], help="Bloch function CSV")
    b.add_argument("--q", type=float, help="Bloch vector on the quantised grid")
    b.add_argument("--band", type=int)
    w = sub.add_parser("wannier", parents=[shared], help="Wannier-Kohn function CSV")
    w.add_argument("--site", type=int)
    w.add_argument("--band", type=int)
    w.add_argument("--kohn", choices=["none", "kohn", "kohn_halfshift"])
    h = sub.add_parser("hubbard", parents=[shared], help="Bose-Hubbard parameters JSON")
    h.add_argument("--spin", action="append", help="label:phi_e:phi_o, repeatable")
    h.add_argument("--trap-curvature", type=float, help="axial trap curvature (E*/R*^2)")
    h.add_argument("--sweep", action="store_true", default=None, help="add the |J(s)| vs d table")
    h.add_argument("--kohn", choices=["none", "kohn", "kohn_halfshift"])
    for p in (h, sub.add_parser("scales", parents=[shared], help="E* and R* in SI")):
        p.add_argument("--atom-mass", type=float, help="atom (or reduced) mass in u")
        p.add_argument("--c4", type=float, help="C4 in J m^4")
        p.add_argument("--alpha", type=float, help="static polarisability in atomic units")
    return ap


def config_from_args(args: argparse.Namespace) -> RunConfig:
    cfg = RunConfig.from_ini(Path(args.config).read_text()) if args.config else RunConfig()
    for flag, attr in FLAG_MAP.items():
        v = getattr(args, flag, None)
        if v is not None:
            setattr(cfg, attr, v)
    return cfg


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        cfg = config_from_args(args)
        if args.dump_config:
            sys.stdout.write(cfg.to_ini())
            return 0
        COMMANDS[args.command](cfg)
    except GenKPError as exc:
        print(f"genkp {args.command}: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 2
    return 0


if __name__ == "__main__":
    sys.exit(main())
