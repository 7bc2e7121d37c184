"""Convolution powers of exponentially decaying radial densities."""

from .aux import (G_n, G_n_lower_bound, G_n_lower_bound_small, G_table, H_n, H_n_closed_bound, H_table,
                  g_n_exact_1d, truncated_gaussian_moment)
from .compound_poisson import (PLambdaResult, SeriesNotConverged, nstar_bounds, p_lambda,
                               p_lambda_bounds_regimes, p_lambda_bounds_wright, p_lambda_small_x_bounds,
                               p_lambda_table)
from .density import (ConstantsBundle, DensitySpec, Variant, compute_constants, density_f, l1_norm,
                      profile_g, verify_assumptions)
from .oracle import (QuadratureError, convolve_radial, fnstar, g_n_direct, h_n_direct, nfold_convolution,
                     reduce_radial_integral)
from .records import BoundCheckRecord, SuiteReport
from .sampler import SampleBatch, sample_compound_poisson, sample_radius
from .special import WrightEval, beta, beta_quotient_threshold, hypergeom_2f1, inc_beta, log_gamma, wright_phi
from .suites import SuiteConfig, run_suite
from .tables import RadialTable

__version__ = "0.1.0"

__all__ = [
    "BoundCheckRecord", "ConstantsBundle", "DensitySpec", "G_n", "G_n_lower_bound", "G_n_lower_bound_small",
    "G_table", "H_n", "H_n_closed_bound", "H_table", "PLambdaResult", "QuadratureError", "RadialTable",
    "SampleBatch", "SeriesNotConverged", "SuiteConfig", "SuiteReport", "Variant", "WrightEval", "beta",
    "beta_quotient_threshold", "compute_constants", "convolve_radial", "density_f", "fnstar", "g_n_direct",
    "g_n_exact_1d", "h_n_direct", "hypergeom_2f1", "inc_beta", "l1_norm", "log_gamma", "nfold_convolution",
    "nstar_bounds", "p_lambda", "p_lambda_bounds_regimes", "p_lambda_bounds_wright", "p_lambda_small_x_bounds",
    "p_lambda_table", "profile_g", "reduce_radial_integral", "run_suite", "sample_compound_poisson",
    "sample_radius", "truncated_gaussian_moment", "verify_assumptions", "wright_phi",
]
