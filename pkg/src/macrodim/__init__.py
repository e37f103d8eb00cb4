"""Large-scale fractal geometry of random walk paths.

Covering-cost functionals over dyadic shells, mass and Hausdorff dimension
estimators for unbounded sets, streaming simulation of Gaussian walks with
set-extracting visitors, and Monte Carlo checks of the band-hitting bound.
"""

__version__ = "0.1.0"

from .covering import (
    CoveringResult,
    nu_bruteforce,
    nu_coarse,
    nu_dyadic,
    nu_exact,
)
from .dimension import (
    DimensionReport,
    HausdorffDimensionEstimator,
    HausdorffFit,
    MassDimensionEstimator,
    MassDimensionFit,
    fit_log2_slope,
    hausdorff_dimension,
    mass_dimensions,
)
from .errors import (
    CapacityError,
    ConfigError,
    GaugeDomainError,
    InsufficientDataError,
    MacrodimError,
    OutOfShellError,
    QueryError,
    SetFileError,
)
from .experiments import (
    ExperimentConfig,
    config_from_manifest,
    run_covering,
    run_hitprob,
    run_level_dims,
    run_localtime,
    run_sojourn_dims,
)
from .gauges import PowerGauge, SqrtLogGauge, make_gauge
from .hitprob import (
    HitEstimate,
    HitQuery,
    default_sweep_queries,
    hit_bound,
    hit_mc,
    hit_mc_fine,
    hit_sweep,
)
from .lattice import (
    IntegerInterval,
    PixelSet,
    Shell,
    ShellSet,
    lebesgue_measure,
    lebesgue_prefix,
    load_set_file,
    pixel_count_prefix,
    pixelize,
    save_set_file,
    shell_span,
)
from .pathsim import (
    LevelSpec,
    LevelVisitor,
    LocalTimeVisitor,
    OscillationScan,
    OscillationVisitor,
    PathConfig,
    SojournMeasureVisitor,
    SojournSpec,
    SojournVisitor,
    replay_path,
    stream_path,
)
from .rng import standard_normals, uniforms

__all__ = [
    "__version__",
    "CapacityError",
    "ConfigError",
    "CoveringResult",
    "DimensionReport",
    "ExperimentConfig",
    "GaugeDomainError",
    "HausdorffDimensionEstimator",
    "HausdorffFit",
    "HitEstimate",
    "HitQuery",
    "InsufficientDataError",
    "IntegerInterval",
    "LevelSpec",
    "LevelVisitor",
    "LocalTimeVisitor",
    "MacrodimError",
    "MassDimensionEstimator",
    "MassDimensionFit",
    "OscillationScan",
    "OscillationVisitor",
    "OutOfShellError",
    "PathConfig",
    "PixelSet",
    "PowerGauge",
    "QueryError",
    "SetFileError",
    "Shell",
    "ShellSet",
    "SojournMeasureVisitor",
    "SojournSpec",
    "SojournVisitor",
    "SqrtLogGauge",
    "config_from_manifest",
    "default_sweep_queries",
    "fit_log2_slope",
    "hausdorff_dimension",
    "hit_bound",
    "hit_mc",
    "hit_mc_fine",
    "hit_sweep",
    "lebesgue_measure",
    "lebesgue_prefix",
    "load_set_file",
    "make_gauge",
    "mass_dimensions",
    "nu_bruteforce",
    "nu_coarse",
    "nu_dyadic",
    "nu_exact",
    "pixel_count_prefix",
    "pixelize",
    "replay_path",
    "run_covering",
    "run_hitprob",
    "run_level_dims",
    "run_localtime",
    "run_sojourn_dims",
    "save_set_file",
    "shell_span",
    "standard_normals",
    "stream_path",
    "uniforms",
]
