"""Autocorrelation analysis for time series of point patterns.

Point patterns are binned into count vectors, the log-ratio of binned second
moments to squared means gives a matrix per lag, and the autocorrelation at
lag ``k`` is the Frobenius norm of that matrix relative to the trace at lag 0.
Significance bounds under temporal independence come from a Monte-Carlo
quadratic-form limit; a log-Gaussian Cox process simulator and closed-form
population values support power studies.
"""

from .acf import (
    Autocorrelogram,
    MomentEstimates,
    autocorrelogram,
    autocov_c0,
    autocov_ck,
    gamma_hat,
    mean_counts,
    moment_estimates,
    rho_hat,
)
from .bounds import (
    NullDistParams,
    QuadFormSampler,
    attach_bounds,
    build_B,
    build_Omega,
    estimate_null_params,
    null_quantile,
    sample_null_statistic,
)
from .core import (
    BinGrid,
    BinnedCountSeries,
    PointPattern,
    PointPatternSeries,
    Region,
    bin_counts,
    bin_series,
    make_bin_grid,
    restrict,
)
from .errors import (
    ConfigError,
    DegenerateBinError,
    DegenerateVarianceError,
    InvalidArgumentError,
    NonpositiveCovarianceError,
    NumericalError,
    PPACFError,
)
from .experiment import ExperimentReport, run_experiment, run_replicate
from .figure import emit_figure, render_svg
from .fileio import read_autocorrelogram, read_events, write_autocorrelogram, write_events
from .latent import LatentModelSpec, default_burn_in, simulate_latent
from .lgcp import BasisSpec, SimulationDesign, default_basis, intensity_at, sample_poisson, simulate_series
from .oracle import population_rho, population_rho_k, rho_tilde, sigma_k

__version__ = "0.1.0"
