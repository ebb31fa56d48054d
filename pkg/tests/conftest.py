"""Shared, session-cached pipeline results and the acceptance report hook."""
from __future__ import annotations

import functools
import time

import numpy as np
import pytest

from genkp import LatticeParams, PseudopotentialStrengths, band_structure, qdt_band_structure

PHI_E, PHI_O = -np.pi / 4, np.pi / 4

# lines recorded by tests/test_acceptance.py, echoed at the end of the run
ACCEPTANCE_LINES: list[str] = []
TIMINGS: dict[str, float] = {}


def timed(key):
    """Cache a builder and record the wall time of its first evaluation."""
    def deco(fn):
        cached = functools.lru_cache(maxsize=None)(fn)

        @functools.wraps(fn)
        def wrapper(*args):
            t0 = time.perf_counter()
            out = cached(*args)
            TIMINGS.setdefault((key, args), time.perf_counter() - t0)
            return out
        wrapper.cache = cached
        return wrapper
    return deco


def first_time(key, *args) -> float:
    return TIMINGS.get((key, args), 0.0)


def lattice(d: float, N_L: int = 101) -> LatticeParams:
    return LatticeParams(d, PHI_E, PHI_O, 1.0, N_L)


def strengths(mode: str) -> PseudopotentialStrengths:
    return PseudopotentialStrengths.from_phases(PHI_E, PHI_O, 1.0, mode=mode)


@timed("qdt")
def qdt_table(d: float, n_bands: int, N_L: int = 101):
    return qdt_band_structure(lattice(d, N_L), n_bands=n_bands)


@timed("kp")
def kp_table(d: float, mode: str, n_bands: int, N_L: int = 101):
    return band_structure(lattice(d, N_L), strengths(mode), n_bands)


@timed("hubbard")
def hubbard(model: str, mode: str, intraband: bool):
    from genkp.hubbard import hubbard_parameters
    return hubbard_parameters(lattice(15.0), model, mode, intraband=intraband, return_wannier=True)


@pytest.fixture(scope="session")
def qdt15():
    return qdt_table(15.0, 3)


@pytest.fixture(scope="session")
def kp15_static():
    return kp_table(15.0, "static", 3)


@pytest.fixture(scope="session")
def kp15_energy():
    return kp_table(15.0, "energy", 3)


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_LINES:
        return
    terminalreporter.section("acceptance criteria")
    for line in ACCEPTANCE_LINES:
        terminalreporter.write_line(line)
