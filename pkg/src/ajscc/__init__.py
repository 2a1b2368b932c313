"""Analog joint source-channel coding over serpentine rectangular mappings.

N analog sources are folded onto a single transmitted value by quantizing
N-1 of them onto a boustrophedon lattice of parallel stages and sending arc
length along that curve. The package provides the exact encoder/decoder
(curve), source laws (dist), closed-form MSE predictors with stage-crossing
corrections (analytic), a deterministic Monte Carlo oracle with a
per-crossing-case classifier (mc), level-count optimization (opt), and a CSV
command line (cli).
"""
from .analytic import (
    MseBreakdown,
    NoiseModel,
    QuadratureError,
    SnrSpec,
    adc_mse_term,
    crossing_error_moments,
    erf_eval,
    mse_high_3d,
    mse_high_digital,
    mse_high_nd,
    mse_low_3d,
    mse_low_digital,
    pr_lsc,
    pr_rsc,
    quadrature,
    snr_to_sigma,
    x_source_from_s1,
)
from .curve import (
    LatticePoint,
    MappedScalar,
    MappingConfig,
    SourcePoint,
    adc_quantize,
    build_config,
    decode,
    encode,
    quantize_level,
    stage_index,
    stage_levels,
)
from .dist import (
    DiscreteBoundaryGaussian,
    SourceDistribution,
    Uniform,
    boundary_masses,
    cdf,
    parse_source_spec,
    pdf_mass,
    sample,
)
from .mc import (
    Analog,
    CaseRate,
    CrossingCase,
    Digital,
    SimulationReport,
    SimulationSpec,
    classify_crossing,
    empirical_crossing_rates,
    run,
)
from .opt import (
    AnalyticHigh,
    AnalyticLow,
    MonteCarlo,
    SweepResult,
    SweepSpec,
    grid_search,
    optimal_l_trend,
    optimal_l_vs_dims,
)

__version__ = "0.1.0"

__all__ = [
    "__version__",
    # curve
    "MappingConfig", "SourcePoint", "LatticePoint", "MappedScalar",
    "build_config", "quantize_level", "stage_index", "stage_levels",
    "encode", "decode", "adc_quantize",
    # dist
    "Uniform", "DiscreteBoundaryGaussian", "SourceDistribution",
    "boundary_masses", "pdf_mass", "cdf", "sample", "parse_source_spec",
    # analytic
    "NoiseModel", "SnrSpec", "MseBreakdown", "QuadratureError",
    "snr_to_sigma", "mse_high_3d", "mse_high_nd", "mse_high_digital",
    "adc_mse_term", "erf_eval", "quadrature", "pr_lsc", "pr_rsc",
    "crossing_error_moments", "mse_low_3d", "mse_low_digital",
    "x_source_from_s1",
    # mc
    "Analog", "Digital", "SimulationSpec", "SimulationReport",
    "CrossingCase", "CaseRate", "run", "classify_crossing",
    "empirical_crossing_rates",
    # opt
    "AnalyticHigh", "AnalyticLow", "MonteCarlo", "SweepSpec", "SweepResult",
    "grid_search", "optimal_l_trend", "optimal_l_vs_dims",
]
