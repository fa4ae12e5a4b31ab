"""Linear-Gaussian daily price forecasting on principal subspaces.

The pipeline cuts a price series into overlapping windows, normalizes and
centers them, and fits three linear forecasters for the unseen tail of each
window: the unconditional mean, the full conditional mean, and a
reduced-dimension conditional mean filtered through the leading principal
subspace of the sample covariance (selected under a condition-number cap).
"""

from .backtest import (
    OBJECTIVE_THEORETICAL,
    OBJECTIVE_VALIDATION,
    BacktestReport,
    CellReport,
    LCurvePoint,
    MethodResult,
    SubspaceSelection,
    SweepConfig,
    build_l_curve,
    emit_report,
    run_backtest,
    select_L,
)
from .covariance_model import (
    DENOM_COLUMNS,
    DENOM_SAMPLES,
    CovarianceModel,
    Subspace,
    choose_subspace,
    condition_number,
    dump_covariance_csv,
    empirical_covariance,
)
from .data_pipeline import (
    DataMatrix,
    PriceSeries,
    WindowConfig,
    build_hankel,
    denormalize_forecast,
    load_csv,
    normalize_and_center,
    split_train_test,
)
from .errors import (
    DataError,
    DomainError,
    ForecastError,
    IllConditionedError,
    InsufficientDataError,
    NoFeasibleSubspaceError,
    NumericalError,
    ParseError,
)
from .estimators import (
    METHOD_GB,
    METHOD_RD,
    METHOD_UNC,
    METHODS,
    Estimator,
    ProjectionOperator,
    build_projection,
    fit_gauss_bayes,
    fit_reduced_dimension,
    fit_unconditional,
    predict,
)
from .metrics import (
    DirectionalReport,
    EmpiricalMse,
    MseBreakdown,
    bias_decomposition,
    directional_statistic,
    empirical_mse,
    mse_breakdown,
    theoretical_mse,
    volatility,
)
from .synthetic_oracle import (
    GaussianSpec,
    McEstimate,
    geometric_spectrum,
    load_gaussian_spec,
    mc_bias,
    mc_mse,
    random_covariance,
    sample,
)

__version__ = "0.1.0"
