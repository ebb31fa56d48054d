"""Sampled wavefunctions on an N_L-cell ring with per-cell Simpson quadrature.

Cell c spans [c d, (c + 1) d]; ions sit on the cell edges.  Each cell stores
its own end points, so the first sample of a cell is the right limit at the
site and the last sample the left limit at the next site.  Discontinuities
of the odd pseudopotential therefore never straddle a quadrature panel.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import GridError

DEFAULT_POINTS = 512


def simpson_weights(n_intervals: int, h: float) -> np.ndarray:
    """Composite Simpson weights for ``n_intervals`` (even) panels of width h."""
    if n_intervals % 2:
        raise GridError("Simpson's rule needs an even number of intervals")
    w = np.ones(n_intervals + 1)
    w[1:-1:2] = 4.0
    w[2:-1:2] = 2.0
    return w * h / 3.0


def cell_grid(d: float, points_per_cell: int = DEFAULT_POINTS) -> np.ndarray:
    """Local coordinates y in [0, d] of one cell, end points included."""
    return np.linspace(0.0, d, points_per_cell + 1)


@dataclass
class SampledWavefunction:
    """Complex samples of a function on N_L cells.

    Attributes
    ----------
    values : ndarray, shape (N_L, points_per_cell + 1)
        Row i holds cell ``cells[i]``.
    d : float
        Lattice spacing.
    cells : ndarray of int
        Cell indices, ascending and centred on 0.
    model_tag : str
    meta : dict
        Free-form provenance (band, q, kohn mode, ...).
    """

    values: np.ndarray
    d: float
    cells: np.ndarray
    model_tag: str = ""
    meta: dict = field(default_factory=dict)

    @property
    def points_per_cell(self) -> int:
        return self.values.shape[1] - 1

    @property
    def y(self) -> np.ndarray:
        return cell_grid(self.d, self.points_per_cell)

    @property
    def x(self) -> np.ndarray:
        """Global positions, shape like ``values``."""
        return self.cells[:, None] * self.d + self.y[None, :]

    @property
    def weights(self) -> np.ndarray:
        return simpson_weights(self.points_per_cell, self.d / self.points_per_cell)

    @property
    def site_positions(self) -> np.ndarray:
        return self.cells * self.d

    def check_compatible(self, other: "SampledWavefunction"):
        if (self.values.shape != other.values.shape or self.d != other.d
                or not np.array_equal(self.cells, other.cells)):
            raise GridError("wavefunctions live on different grids")

    def inner(self, other: "SampledWavefunction") -> complex:
        """<self|other> by per-cell Simpson quadrature."""
        self.check_compatible(other)
        return complex(np.sum(np.conj(self.values) * other.values * self.weights[None, :]))

    def norm2(self) -> float:
        return float(np.sum(np.abs(self.values) ** 2 * self.weights[None, :]))

    def cell_norms(self) -> np.ndarray:
        """Integral of |psi|^2 over each cell."""
        return np.sum(np.abs(self.values) ** 2 * self.weights[None, :], axis=1)

    def integrate(self, density: np.ndarray) -> complex:
        """Quadrature of an arbitrary array sampled like ``values``."""
        out = np.sum(density * self.weights[None, :])
        return complex(out)

    def site_limits(self):
        """(psi(x_c^+), psi(x_c^-)) at every site x_c = c d, wrapping on the ring."""
        right = self.values[:, 0]
        left = np.roll(self.values[:, -1], 1)
        return right, left

    def mean_position(self) -> float:
        dens = np.abs(self.values) ** 2
        return float(self.integrate(dens * self.x).real / self.norm2())

    def spread(self) -> float:
        """Second moment <(x - <x>)^2> of |psi|^2 (no ring wrapping)."""
        dens = np.abs(self.values) ** 2
        m = self.mean_position()
        return float(self.integrate(dens * (self.x - m) ** 2).real / self.norm2())

    def shifted(self, n_cells: int) -> "SampledWavefunction":
        """Function translated by n_cells lattice spacings around the ring."""
        return SampledWavefunction(np.roll(self.values, n_cells, axis=0), self.d, self.cells,
                                   self.model_tag, dict(self.meta, shift=n_cells))

    def interval_weight(self, a: float, b: float) -> float:
        """Fraction of the norm inside [a, b] (sample-wise mask, per-cell weights)."""
        dens = np.abs(self.values) ** 2
        mask = (self.x >= a - 1e-12) & (self.x <= b + 1e-12)
        return float(self.integrate(dens * mask).real / self.norm2())
