"""Noise-variance estimation, PC-count selection and goodness-of-fit testing
for probabilistic PCA when the dimension is comparable to the sample size."""

from .data import DataMatrix, Spectrum, load_csv, sample_covariance, spectrum
from .errors import (
    ConvergenceError,
    HdppcaError,
    InputError,
    NumericError,
    RegimeError,
    SubEdgeError,
)
from .gof import GofReport, bartlett_lrt, chi2_tail, clrt, l_star
from .mp import MpLaw, atom_at_zero, cdf, density, log_moment, median, quantile, support_edges
from .rank import RankReport, bai_ng, sure, v_statistic
from .simlab import (
    FactorDesign,
    SimConfig,
    SimReport,
    gen_factor,
    gen_spiked,
    model_spec,
    run_table,
    sure_design,
    theoretical_bias,
)
from .spiked import (
    SpikedModelSpec,
    SpikeEstimates,
    bias_term,
    bulk_edge,
    estimate_spikes,
    invert_phi,
    is_detectable,
    phi,
    spike_limit,
)
from .variance import (
    VarianceEstimate,
    classical_se,
    kn_sigma2,
    median_sigma2,
    mle_sigma2,
    star_sigma2,
    us_sigma2,
)

__version__ = "0.1.0"

__all__ = [
    "DataMatrix", "Spectrum", "load_csv", "sample_covariance", "spectrum",
    "HdppcaError", "InputError", "NumericError", "SubEdgeError",
    "ConvergenceError", "RegimeError",
    "MpLaw", "support_edges", "atom_at_zero", "density", "cdf", "quantile",
    "median", "log_moment",
    "SpikedModelSpec", "SpikeEstimates", "phi", "spike_limit", "invert_phi",
    "estimate_spikes", "bias_term", "is_detectable", "bulk_edge",
    "VarianceEstimate", "classical_se", "mle_sigma2", "star_sigma2",
    "kn_sigma2", "us_sigma2", "median_sigma2",
    "RankReport", "sure", "bai_ng", "v_statistic",
    "GofReport", "l_star", "clrt", "bartlett_lrt", "chi2_tail",
    "SimConfig", "SimReport", "FactorDesign", "model_spec", "sure_design",
    "gen_spiked", "gen_factor", "run_table", "theoretical_bias",
]
