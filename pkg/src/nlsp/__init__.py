"""Nonlinear Lebesgue-style spaces of metric-space-valued mappings.

Mappings from a finite measure space into a metric target, compared in
weighted ``p``-mean distance; curves of such mappings with metric
derivatives, length/energy functionals, geodesics, curvature-sign
transfer, atomwise transport decompositions, log-map speed fields,
jump-curve variation, and Skorokhod-style warping bounds — plus the
deterministic experiment suites and CLI that certify the lot.
"""

from .config import (
    DEFAULT_TOLERANCES,
    ExperimentConfig,
    base_space_from_config,
    build_config,
    load_config_file,
)
from .curves import (
    SampledCurve,
    SkorokhodBounds,
    StepCurve,
    VariationMeasure,
    constant_speed_reparam,
    energy,
    length,
    metric_derivative,
    skorokhod_distance,
    variation,
    variation_measure,
)
from .errors import (
    ConfigError,
    GeodesicError,
    NlspError,
    SpaceMismatchError,
    UnsupportedOperationError,
    ValidationError,
)
from .geometry import (
    CurvatureReport,
    LengthReport,
    LpGeodesic,
    constant_speed_residual,
    curvature_comparison_suite,
    default_equality_tol,
    geodesic_safe_mapping_pair,
    geodesic_safe_pair,
    geodesic_speed_check,
    length_space_check,
    lp_geodesic,
    mapping_comparison_residual,
    reparam_length_certificate,
    start_aligned_residuals,
)
from .mappings import (
    FiniteMeasureSpace,
    LpSpace,
    MappingFamily,
    MetricMapping,
    ProductGridMapping,
    TimeGrid,
    ae_equal,
    atom_distances,
    check_p,
    constant_family,
    constant_in_time,
    d_p,
    mapping_family,
    mapping_from_jsonable,
    mapping_to_jsonable,
    product_lp_norm,
    rectangular_simple,
    uniform_grid,
    uniform_space,
)
from .rng import suite_key, trial_rng
from .sections import (
    CurveOfMappings,
    D_pp,
    MappingOfCurves,
    RectangleApproximation,
    approximate_by_rectangles,
    base_curve_of_mappings,
    base_mapping_of_curves,
    d_pp,
    sec_atom,
    sec_atom_inverse,
    sec_time,
    sec_time_inverse,
    transpose,
    transpose_inverse,
)
from .speed import (
    SpeedField,
    atomwise_consistency_gap,
    bundle_norm,
    bundle_norms,
    compute_speed,
    speed_identity_residual,
    tangent_norms,
)
from .suites import (
    DEFAULT_TREE_EDGES,
    SmoothLpPath,
    SuiteResult,
    decay_order,
    default_tree,
    map_trials,
    run_all,
    run_counterexample,
    run_curvature,
    run_fubini,
    run_geodesic,
    run_length,
    run_skorokhod,
    run_speed,
    run_transport,
    sample_smooth_path,
)
from .targets import (
    Euclidean,
    MetricTree,
    Spd,
    Sphere,
    TangentVector,
    TargetSpace,
    TreePoint,
    make_target,
)
from .transport import (
    BVTransportDecomposition,
    CounterexampleReport,
    TransportDecomposition,
    counterexample_curve,
    counterexample_family,
    counterexample_p1,
    decompose_ac,
    decompose_bv,
    derivative_identity_residual,
    per_atom_derivatives,
    variation_identity_residual,
)

__version__ = "0.1.0"

__all__ = [
    "BVTransportDecomposition",
    "ConfigError",
    "CounterexampleReport",
    "CurvatureReport",
    "CurveOfMappings",
    "DEFAULT_TOLERANCES",
    "DEFAULT_TREE_EDGES",
    "D_pp",
    "Euclidean",
    "ExperimentConfig",
    "FiniteMeasureSpace",
    "GeodesicError",
    "LengthReport",
    "LpGeodesic",
    "LpSpace",
    "MappingFamily",
    "MappingOfCurves",
    "MetricMapping",
    "MetricTree",
    "NlspError",
    "ProductGridMapping",
    "RectangleApproximation",
    "SampledCurve",
    "SkorokhodBounds",
    "SmoothLpPath",
    "SpaceMismatchError",
    "Spd",
    "SpeedField",
    "Sphere",
    "StepCurve",
    "SuiteResult",
    "TangentVector",
    "TargetSpace",
    "TimeGrid",
    "TransportDecomposition",
    "TreePoint",
    "UnsupportedOperationError",
    "ValidationError",
    "VariationMeasure",
    "ae_equal",
    "approximate_by_rectangles",
    "atom_distances",
    "atomwise_consistency_gap",
    "base_curve_of_mappings",
    "base_mapping_of_curves",
    "base_space_from_config",
    "build_config",
    "bundle_norm",
    "bundle_norms",
    "check_p",
    "compute_speed",
    "constant_family",
    "constant_in_time",
    "constant_speed_reparam",
    "constant_speed_residual",
    "counterexample_curve",
    "counterexample_family",
    "counterexample_p1",
    "curvature_comparison_suite",
    "d_p",
    "d_pp",
    "decay_order",
    "decompose_ac",
    "decompose_bv",
    "default_equality_tol",
    "default_tree",
    "derivative_identity_residual",
    "energy",
    "geodesic_safe_mapping_pair",
    "geodesic_safe_pair",
    "geodesic_speed_check",
    "length",
    "length_space_check",
    "load_config_file",
    "lp_geodesic",
    "map_trials",
    "mapping_comparison_residual",
    "mapping_family",
    "mapping_from_jsonable",
    "mapping_to_jsonable",
    "metric_derivative",
    "per_atom_derivatives",
    "product_lp_norm",
    "rectangular_simple",
    "reparam_length_certificate",
    "run_all",
    "run_counterexample",
    "run_curvature",
    "run_fubini",
    "run_geodesic",
    "run_length",
    "run_skorokhod",
    "run_speed",
    "run_transport",
    "sample_smooth_path",
    "sec_atom",
    "sec_atom_inverse",
    "sec_time",
    "sec_time_inverse",
    "skorokhod_distance",
    "speed_identity_residual",
    "start_aligned_residuals",
    "suite_key",
    "tangent_norms",
    "transpose",
    "transpose_inverse",
    "trial_rng",
    "uniform_grid",
    "uniform_space",
    "variation",
    "variation_identity_residual",
    "variation_measure",
]
