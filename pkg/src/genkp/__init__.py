"""Generalised Kronig-Penney bands for even/odd zero-range scatterers.

The package solves the band structure of a 1D chain of contact scatterers
with simultaneous even-wave and odd-wave pseudopotentials, checks it against
an exact quantum-defect solver for the atom-ion -C4/x**4 interaction, and
extracts Bose-Hubbard parameters from both.
"""
from .bloch import (BlochSet, KpBlochFunction, WannierFunction, apply_kohn_phase, bloch_from_wannier,
                    kp_bloch, kp_bloch_set, qdt_bloch_set, wannier, zeta)
from .comparison import ComparisonReport, compare_tables
from .dispersion import (BandTable, PseudopotentialStrengths, band_energies, band_structure, rhs_combined,
                         rhs_even, rhs_odd)
from .errors import (ComplexBranchError, ConvergenceError, DegeneracyError, DomainError, GenKPError,
                     GridError, InGapError, InsufficientRangeError, PoleError, ResolutionError,
                     SingularityError)
from .grid import SampledWavefunction
from .hubbard import (HubbardParams, SpinResolvedParams, bh_assemble, g1d, hopping_from_band,
                      hopping_from_wannier, hubbard_parameters, interaction_integral)
from .qdt import (InGap, PropagatedSolution, QdtBlochState, asymptotic_pair, numerov_propagate,
                  qdt_band_structure, qdt_bloch_state, quasimomentum_for_energy)
from .scattering import (NuExponent, ScatteringLengthModel, energy_dependent_a, infinite_determinant,
                         nu_exponent, s_ratio)
from .units import (AtomIonScales, LatticeParams, atom_ion_scales, static_inverse_scattering_length,
                    static_scattering_length)

__version__ = "0.1.0"
