"""Interval-valued GARCH modeling of [low, high] return-range processes.

The observable is a daily return range treated as a random interval: the set
of log differences between any two prices on consecutive days. A positive
latent scale drives both the interval's center (via a standard normal draw)
and its radius (via a Gamma(k, 1) draw), so price-range information and
return information enter one conditional-heteroskedasticity model together.

Modules:
    intervals - interval arithmetic, metrics, and sample statistics
    moments   - closed-form moments, stationarity tests, theoretical ACF
    simulate  - reproducible path simulation
    estimate  - conditional least squares fitting (Newton-Raphson)
    data      - OHLC/intraday ingestion, realized volatility, GARCH baseline
    cli       - command-line workflows
"""

from .errors import (
    BadBar,
    ConfigError,
    DegenerateSeries,
    Diverged,
    EmptySeries,
    InsufficientData,
    IntGarchError,
    InvalidLag,
    InvalidState,
    NotMeanStationary,
    NotWeaklyStationary,
    NumericalFailure,
    ParseError,
    SingularHessian,
    UnsupportedOrder,
)
from .intervals import (
    Interval,
    RangeSeries,
    delta_metric,
    hausdorff,
    minkowski_add,
    sample_corr,
    sample_cov,
    sample_mean,
    sample_var,
    scalar_mul,
)
from .moments import (
    IntGarchParams,
    MomentSummary,
    acf,
    autocov,
    c1,
    c2,
    conditional_volatility_factor,
    eta_x,
    h_h_eta,
    is_mean_stationary,
    is_weakly_stationary,
    mean_h,
    mean_r,
    second_moment_h,
    summarize,
    var_r,
)
from .simulate import SimConfig, SimOutput, derive_seed, simulate, simulate_ensemble
from .estimate import (
    TABLE1_MODELS,
    FitConfig,
    FitResult,
    cls_gradient,
    cls_hessian,
    cls_loss,
    fit,
    h_filter,
    initialize,
    predict_interval,
    replication_study,
    summarize_replications,
    volatility_path,
)
from .data import (
    DailyOhlc,
    Garch11Fit,
    IntradaySeries,
    fit_garch11,
    flag_quiet_wide_days,
    read_intraday_csv,
    read_ohlc_csv,
    read_series_csv,
    realized_volatility,
    return_ranges,
    write_series_csv,
)

__version__ = "0.1.0"
