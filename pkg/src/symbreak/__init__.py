from .config import DEFAULT_CONFIG, SymbreakConfig, load_config
from .errors import (
    AmbiguousGroupingError,
    DimensionMismatchError,
    FileFormatError,
    GradingKindError,
    IllConditionedSystemError,
    NonConvergentSeriesError,
    NonSquareMatrixError,
    NonUnimodularEigenvalueError,
    NonUnitaryTransformError,
    SingularTranslationError,
    SpecialFunctionDomainError,
    SymbreakError,
    TruncationConvergenceError,
    UndefinedMeasureError,
    UnknownEigenvalueError,
)
from .grading import (
    BlackBoxSystem,
    CouplingTable,
    OperatorSystem,
    SymmetryGrading,
    TransformedSystem,
    align_gradings,
    coupling_from_intensities,
    coupling_strengths,
    group_indices,
    restrict_block,
)
from .measures import (
    MeasureReport,
    MeasureSample,
    build_continuous_transform,
    build_measure_report,
    check_b0_implies_m0,
    exchange_ability,
    local_slope,
    local_slope_direct,
    measure_continuous_closed,
    measure_continuous_series,
    measure_direct,
    measure_discrete,
    rotation_symmetry_order,
    symmetry_angles,
)
from .operator_core import (
    BasisLabel,
    ComplexMatrix,
    adjoint,
    change_basis,
    commutator,
    frobenius_norm_sq,
    identity,
    matmul,
    operator_distance,
    trace,
    unitarity_residual,
)
from .scatter2d import (
    Disc,
    Scene,
    SimConfig,
    SimulatorSystem,
    assemble_scattering_operator,
    assemble_with_diagnostics,
    check_truncation_convergence,
    default_sim_config,
    foldy_lax_solve,
    graf_translation,
    mirror_eigenbasis,
    mirror_operator,
    rotated_mirror_operator,
    rotation_grading,
    single_disc_tmatrix,
)
from .scenes import BUILTIN_SCENES, c3_scene, centered_disc, stacked_scene
from .special import bessel_j, bessel_y, hankel1
from .verify import VerificationReport, run_verification

__all__ = [
    "BUILTIN_SCENES",
    "DEFAULT_CONFIG",
    "AmbiguousGroupingError",
    "BasisLabel",
    "BlackBoxSystem",
    "ComplexMatrix",
    "CouplingTable",
    "DimensionMismatchError",
    "Disc",
    "FileFormatError",
    "GradingKindError",
    "IllConditionedSystemError",
    "MeasureReport",
    "MeasureSample",
    "NonConvergentSeriesError",
    "NonSquareMatrixError",
    "NonUnimodularEigenvalueError",
    "NonUnitaryTransformError",
    "OperatorSystem",
    "Scene",
    "SimConfig",
    "SimulatorSystem",
    "SingularTranslationError",
    "SpecialFunctionDomainError",
    "SymbreakConfig",
    "SymbreakError",
    "SymmetryGrading",
    "TransformedSystem",
    "TruncationConvergenceError",
    "UndefinedMeasureError",
    "UnknownEigenvalueError",
    "VerificationReport",
    "adjoint",
    "align_gradings",
    "assemble_scattering_operator",
    "assemble_with_diagnostics",
    "bessel_j",
    "bessel_y",
    "build_continuous_transform",
    "build_measure_report",
    "c3_scene",
    "centered_disc",
    "change_basis",
    "check_b0_implies_m0",
    "check_truncation_convergence",
    "commutator",
    "coupling_from_intensities",
    "coupling_strengths",
    "default_sim_config",
    "exchange_ability",
    "foldy_lax_solve",
    "frobenius_norm_sq",
    "graf_translation",
    "group_indices",
    "hankel1",
    "identity",
    "load_config",
    "local_slope",
    "local_slope_direct",
    "matmul",
    "measure_continuous_closed",
    "measure_continuous_series",
    "measure_direct",
    "measure_discrete",
    "mirror_eigenbasis",
    "mirror_operator",
    "operator_distance",
    "restrict_block",
    "rotated_mirror_operator",
    "rotation_grading",
    "rotation_symmetry_order",
    "run_verification",
    "single_disc_tmatrix",
    "stacked_scene",
    "symmetry_angles",
    "trace",
    "unitarity_residual",
]
