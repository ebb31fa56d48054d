"""Atom-ion unit system, lattice parameters and static scattering lengths.

Internally every length is measured in R* and every energy in E*, so that a
free atom obeys E = k**2.  The conversion to SI only happens at the edges
(``atom_ion_scales`` and the CLI ``scales`` command).
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy import constants

from .errors import DomainError, PoleError

HBAR = constants.hbar
H_PLANCK = constants.h
AMU = constants.atomic_mass
HARTREE = constants.physical_constants["atomic unit of energy"][0]
BOHR = constants.physical_constants["Bohr radius"][0]


@dataclass(frozen=True)
class AtomIonScales:
    """Characteristic scales of the -C4/x**4 polarisation potential.

    Attributes
    ----------
    Estar : float
        Energy scale E* in joule (1.0 for the internal construction).
    Rstar : float
        Length scale R* in metre (1.0 for the internal construction).
    atom_mass : float
        Mass entering the scales, kg.
    C4 : float
        Polarisation coefficient, J m**4.
    mass_ratio : float
        mu/m, carried along for the static scattering-length conversion.
    """

    Estar: float
    Rstar: float
    atom_mass: float
    C4: float
    mass_ratio: float = 1.0

    @property
    def Estar_hz(self) -> float:
        """E*/h in Hz."""
        return self.Estar / H_PLANCK

    @classmethod
    def internal(cls, mass_ratio: float = 1.0) -> "AtomIonScales":
        """Scales in internal units (hbar = 1, m = 1/2, C4 = 1), i.e. E* = R* = 1 and E = k**2."""
        return cls(Estar=1.0, Rstar=1.0, atom_mass=0.5, C4=1.0, mass_ratio=mass_ratio)

    def energy_to_hz(self, energy):
        """Convert an energy in E* to a frequency in Hz."""
        return np.asarray(energy) * self.Estar_hz


def atom_ion_scales(atom_mass: float, polarizability_C4: float, mass_ratio: float = 1.0,
                    hbar: float = HBAR) -> AtomIonScales:
    """Return E* = hbar^4/(4 m^2 C4) and R* = sqrt(2 m C4)/hbar.

    Parameters
    ----------
    atom_mass : float
        Atom mass in kg.  Pass the reduced mass instead to obtain the barred
        scales; the function does not guess which convention is meant.
    polarizability_C4 : float
        C4 in J m**4.
    mass_ratio : float, optional
        mu/m, stored on the result.
    hbar : float, optional
        Reduced Planck constant.  ``hbar=1`` together with ``atom_mass=0.5`` and
        ``polarizability_C4=1`` reproduces the internal unit system.

    Returns
    -------
    AtomIonScales
    """
    if not atom_mass > 0 or not polarizability_C4 > 0:
        raise DomainError("atom mass and C4 must be strictly positive")
    estar = hbar**4 / (4.0 * atom_mass**2 * polarizability_C4)
    rstar = np.sqrt(2.0 * atom_mass * polarizability_C4) / hbar
    return AtomIonScales(Estar=float(estar), Rstar=float(rstar), atom_mass=float(atom_mass),
                         C4=float(polarizability_C4), mass_ratio=float(mass_ratio))


def c4_from_polarizability(alpha_au: float) -> float:
    """C4 in J m**4 from a static dipole polarisability given in atomic units.

    The potential is -alpha e^2 / (2 (4 pi eps0)^2 r^4), which in atomic units
    reads -alpha / (2 r^4) hartree.
    """
    if not alpha_au > 0:
        raise DomainError("polarizability must be positive")
    return 0.5 * alpha_au * HARTREE * BOHR**4


@dataclass(frozen=True)
class LatticeParams:
    """Ion chain parameters in atom-ion units.

    Attributes
    ----------
    d : float
        Ion spacing in R*.
    phi_e, phi_o : float
        Even and odd short-range phases (radians).
    mass_ratio : float
        mu/m.
    N_L : int
        Number of sites, odd and at least 3.
    """

    d: float
    phi_e: float = -np.pi / 4
    phi_o: float = np.pi / 4
    mass_ratio: float = 1.0
    N_L: int = 101

    def __post_init__(self):
        if not self.d > 0:
            raise DomainError(f"lattice spacing must be positive, got {self.d}")
        if int(self.N_L) != self.N_L or self.N_L < 3 or self.N_L % 2 == 0:
            raise DomainError(f"N_L must be an odd integer >= 3, got {self.N_L}")
        if not self.mass_ratio > 0:
            raise DomainError("mass ratio must be positive")

    @property
    def j_indices(self) -> np.ndarray:
        half = (self.N_L - 1) // 2
        return np.arange(-half, half + 1)

    @property
    def q_grid(self) -> np.ndarray:
        """Born-von Karman Bloch vectors 2 pi j / (d N_L), ascending."""
        return 2.0 * np.pi * self.j_indices / (self.d * self.N_L)

    @property
    def site_positions(self) -> np.ndarray:
        """x_j = j d for the N_L sites (ions sit at cell edges)."""
        return self.j_indices * self.d


def static_scattering_length(phi, mass_ratio: float = 1.0):
    """1D scattering length a = -sqrt(mu/m) cot(phi) in R*.

    Raises
    ------
    PoleError
        If sin(phi) vanishes; use ``static_inverse_scattering_length``.
    """
    phi = np.asarray(phi, dtype=float)
    s = np.sin(phi)
    if np.any(np.abs(s) < 1e-15):
        raise PoleError("phi is a multiple of pi: infinite scattering length")
    out = -np.sqrt(mass_ratio) * np.cos(phi) / s
    return float(out) if out.ndim == 0 else out


def static_inverse_scattering_length(phi, mass_ratio: float = 1.0):
    """1/a = -tan(phi)/sqrt(mu/m); finite where ``static_scattering_length`` has a pole."""
    phi = np.asarray(phi, dtype=float)
    c = np.cos(phi)
    if np.any(np.abs(c) < 1e-15):
        raise PoleError("phi is an odd multiple of pi/2: zero scattering length")
    out = -np.sin(phi) / (c * np.sqrt(mass_ratio))
    return float(out) if out.ndim == 0 else out
