"""Numerical spectral laboratory for two-dimensional magnetic Dirac operators.

Layers, bottom-up:

  clifford   — fixed 2x2 representation of the flat plane Clifford algebra
               and the pointwise Clifford multiplication it induces.
  fields     — magnetic potentials/fields and scalar (mass, electric)
               potentials as closed-form callables, plus reconstruction of
               a potential from a field map and confinement-condition checks.
  identities — high-order stencil differentiation of closed-form spinor
               fields; residuals for the square/mass/rotation identities,
               the diamagnetic inequality, and convergence-order estimation.
  lattice    — sparse Hermitian assembly of the operators on truncated
               boxes with link-phase minimal coupling and exact gauge
               conjugation.
  sectors    — angular-momentum reduction of the radial slow-decay model to
               tridiagonal half-line operators and merged sector spectra.
  eig        — tridiagonal bisection with certified counts, Lanczos for
               sparse Hermitian matrices, dense reference diagonalization,
               quasimode construction and residual probes.
  cli        — `dirac-lab <experiment> --config <file>` experiment driver.
"""

from .clifford import CliffordRep, check_relations, clifford_mul, make_rep
from .eig import (DEFAULT_SEED, EigenResult, QuasimodeSpec, SpacingMetrics,
                  WeylResidual, dense_eigs, lanczos_lowest, quasimode,
                  spacing_metrics, tridiag_eigs, weyl_residual)
from .fields import (Box, PotentialField, ScalarField,
                     check_confinement_conditions, confining_mass,
                     constant_field, constant_scalar, fd_derivative,
                     gauge_from_field, gauge_shift, miller_simon,
                     potential_from_config, scalar_from_config,
                     xy_gauge_function, zero_field, zero_scalar)
from .identities import (ClosedFormSpinorField, ConvergenceReport,
                         DiamagneticReport, StencilSpec, apply_dirac,
                         constant_spinor, convergence_order, diamagnetic_check,
                         gaussian_pair_spinor, gaussian_poly_spinor,
                         gaussian_spinor, jz_commutator_residual,
                         lichnerowicz_residual, mass_identity_residual,
                         modulated_gaussian_spinor, pairing_defect,
                         spinor_from_config)
from .lattice import (GridSpec, SparseHermitian, assemble_dirac,
                      assemble_mag_laplacian, chirality_anticommutator,
                      export_coo, gauge_conjugate, grid_nodes, sigma3_pattern)
from .sectors import (SectorSpec, SpectrumReport, TridiagOperator,
                      build_sector_ops, jz_sector, merge_sector_spectrum,
                      sector_basis_spinor, sector_potential, sector_vs_lattice)

__version__ = "0.1.0"

__all__ = [
    "__version__",
    # clifford
    "CliffordRep", "make_rep", "clifford_mul", "check_relations",
    # fields
    "Box", "PotentialField", "ScalarField", "fd_derivative", "zero_field",
    "constant_field", "miller_simon", "confining_mass", "constant_scalar",
    "zero_scalar", "xy_gauge_function", "gauge_shift", "gauge_from_field",
    "check_confinement_conditions", "potential_from_config", "scalar_from_config",
    # identities
    "ClosedFormSpinorField", "StencilSpec", "apply_dirac",
    "lichnerowicz_residual", "mass_identity_residual", "jz_commutator_residual",
    "DiamagneticReport", "diamagnetic_check", "ConvergenceReport",
    "convergence_order", "pairing_defect", "constant_spinor", "gaussian_spinor",
    "gaussian_pair_spinor", "gaussian_poly_spinor", "modulated_gaussian_spinor",
    "spinor_from_config",
    # lattice
    "GridSpec", "grid_nodes", "sigma3_pattern", "SparseHermitian",
    "assemble_dirac", "assemble_mag_laplacian", "gauge_conjugate",
    "chirality_anticommutator", "export_coo",
    # sectors
    "SectorSpec", "jz_sector", "sector_basis_spinor", "TridiagOperator",
    "sector_potential", "build_sector_ops", "SpectrumReport",
    "merge_sector_spectrum", "sector_vs_lattice",
    # eig
    "DEFAULT_SEED", "EigenResult", "tridiag_eigs", "lanczos_lowest",
    "dense_eigs", "QuasimodeSpec", "quasimode", "WeylResidual",
    "weyl_residual", "SpacingMetrics", "spacing_metrics",
]
