"""Maslov-type indices of symplectic paths relative to Lagrangian
subspaces, their iteration formulas, and brake-orbit index tables."""

from .core import (
    BlockSplit,
    LagrangianFrame,
    SymplecticMatrix,
    block_split,
    check_symplectic,
    diamond,
    standard_matrices,
)
from .ellipsoid import (
    BrakeOrbitRecord,
    EllipsoidModel,
    enumerate_brake_orbits,
    gauge_function,
    orbit_index_table,
    verify_multiplicity_bound,
)
from .galerkin import TruncationScheme
from .indices import (
    IndexReport,
    SpectralProfile,
    index_L_crossings,
    index_L_galerkin,
    index_L_winding,
    mean_index_L0,
    nullity_L,
    omega_index_L0,
    omega_index_periodic,
    relative_morse_index,
    scan_L_omega_indices,
    spectral_profile,
    splitting_numbers,
)
from .iteration import (
    IterationLedger,
    JumpCertificate,
    NormalFormResult,
    SystemIndexCache,
    bott_predict_L0,
    bott_predict_L1,
    check_inequalities,
    check_periodic_identities,
    find_common_index_jump,
    iteration_ledger,
    precise_iteration_L0,
    symmetric_normal_form,
)
from .paths import (
    CoefficientPath,
    SymplecticPath,
    TrigSeries,
    conjugate_path_to_L0,
    ellipsoid_linearization,
    integrate_fundamental,
    iterate_path,
    unit_path,
    validate_brake_symmetry,
)

__version__ = "0.1.0"

__all__ = [
    "BlockSplit",
    "BrakeOrbitRecord",
    "CoefficientPath",
    "EllipsoidModel",
    "IndexReport",
    "IterationLedger",
    "JumpCertificate",
    "LagrangianFrame",
    "NormalFormResult",
    "SpectralProfile",
    "SymplecticMatrix",
    "SymplecticPath",
    "SystemIndexCache",
    "TrigSeries",
    "TruncationScheme",
    "block_split",
    "bott_predict_L0",
    "bott_predict_L1",
    "check_inequalities",
    "check_periodic_identities",
    "check_symplectic",
    "conjugate_path_to_L0",
    "diamond",
    "ellipsoid_linearization",
    "enumerate_brake_orbits",
    "find_common_index_jump",
    "gauge_function",
    "index_L_crossings",
    "index_L_galerkin",
    "index_L_winding",
    "integrate_fundamental",
    "iterate_path",
    "iteration_ledger",
    "mean_index_L0",
    "nullity_L",
    "omega_index_L0",
    "omega_index_periodic",
    "orbit_index_table",
    "precise_iteration_L0",
    "relative_morse_index",
    "scan_L_omega_indices",
    "spectral_profile",
    "splitting_numbers",
    "standard_matrices",
    "symmetric_normal_form",
    "unit_path",
    "validate_brake_symmetry",
    "verify_multiplicity_bound",
]
