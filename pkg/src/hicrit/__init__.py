"""Higher Criticism statistics for large-scale inference.

A numpy/scipy library for second-level significance testing over many
P-values: the HC statistic family and relatives (Berk-Jones, ALR), Monte
Carlo critical-value calibration, sparse rare/weak mixture detection,
HC-thresholded feature selection with an LDA rule, covariance-structure
tests (hidden cliques, low-rank spikes), a rank-based correlated-pairs
test, and the closed-form rare/weak phase diagram.
"""

from . import arw, calibrate, covtest, hct, numerics, pairhc, phase
from .errors import (CacheMissError, FailureRegionError, HicritError,
                     InvalidInputError, ValidationError)
from .hc_core import (HcResult, PValueSeries, avg_likelihood_ratio, berk_jones,
                      bh_fdr_select, empirical_cdf_on_grid, gof_empirical,
                      gof_theoretical, hc_at_level, hc_component, hc_components,
                      hc_feature_scores, hc_plus, hc_star, ohc_plus_band)
from .numerics import RngSeed, binomial_kl, std_normal_cdf, std_normal_quantile, student_t_cdf

__version__ = "0.1.0"

__all__ = [
    "__version__",
    "arw", "calibrate", "covtest", "hct", "numerics", "pairhc", "phase",
    "HicritError", "InvalidInputError", "ValidationError", "CacheMissError",
    "FailureRegionError",
    "PValueSeries", "HcResult",
    "hc_at_level", "hc_component", "hc_components", "hc_star", "hc_plus",
    "ohc_plus_band", "hc_feature_scores", "berk_jones", "avg_likelihood_ratio",
    "gof_theoretical", "gof_empirical", "empirical_cdf_on_grid", "bh_fdr_select",
    "RngSeed", "std_normal_cdf", "std_normal_quantile", "student_t_cdf", "binomial_kl",
]
