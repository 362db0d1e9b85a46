"""Metric-space magnitude primitives and the EXPLO2 surrogate-assisted
black-box optimizer, with a desk-scale benchmark harness."""

from .magnitude import (
    CgResult,
    DegenerateGeometryError,
    SimilaritySystem,
    distance_matrix,
    hard_threshold,
    magnitude_function,
    similarity,
    weighting_cg,
    weighting_scale_zero,
)
from .differential import (
    DegenerateExtensionError,
    ExplorationTerm,
    PdViolationError,
    delta_magnitude,
    delta_magnitude_small_t,
    extend_weighting,
    submodularity_counterexample,
    zeta_vector,
)
from .surrogate import Interpolant, fit_interpolant, relative_errors
from .solver import LocalSolveResult, central_difference, minimize_box
from .optimizer import (
    Explo2Config,
    LambdaSchedule,
    PointCloud,
    RunTrace,
    SurrogateBlend,
    TraceRecord,
    build_surrogate,
    corner_range,
    downsample_indices,
    explo2,
    initial_points,
)
from .benchmarks import TestFunction, get_function, with_random_shift
from .harness import (
    BenchConfig,
    BenchResult,
    emit_plot_data,
    inner_only,
    parse_plot_data,
    random_search,
    read_trace,
    run_bench,
    summarize,
    write_trace,
)

__version__ = "0.1.0"
