"""Short-term mobile traffic forecasting with a shared block regression model.

The package trains one linear model on seasonally differenced, windowed,
normalized traffic pooled from every base station, and compares it against
an undifferenced linear regression baseline and a per-station seasonal
ARIMA baseline. Evaluation is NRMSE per station over a held-out window.
"""

from .baselines import (
    LrModel,
    SaCoefficients,
    SaModel,
    ar_long_order,
    forecast_lr,
    forecast_sa,
    hannan_rissanen,
    train_lr,
    train_sa,
)
from .corpus import (
    SynthConfig,
    TrafficMatrix,
    clean,
    corpus_to_csv,
    load_corpus,
    save_corpus,
    synthesize,
)
from .errors import (
    BlockregError,
    ConfigError,
    DataError,
    InsufficientHistory,
    InsufficientSamples,
    InvalidConfig,
    NumericalError,
    ParseError,
    SingularSystem,
    UncleanCorpus,
    Underdetermined,
    ZeroMeanActual,
)
from .evaluation import (
    EvalReport,
    HistogramBin,
    Split,
    SweepPoint,
    SweepResult,
    evaluate,
    histogram,
    nrmse,
    report_csv,
    report_doc,
    sweep_csv,
    sweep_doc,
    sweep_seasonality,
)
from .forecaster import (
    ForecastSeries,
    forecast_horizon,
    forecast_one,
    train_block_regression,
)
from .modelio import load_model, save_model
from .pipeline import (
    DifferencedMatrix,
    FeatureSet,
    NormalizationStats,
    apply_normalization,
    fit_normalization,
    seasonal_difference,
    slide_windows,
)
from .regressor import (
    BlockModel,
    TrainingDiagnostics,
    cost,
    cost_gradient,
    train_cg,
    train_normal_equations,
)

__version__ = "0.1.0"

__all__ = [
    "BlockModel",
    "BlockregError",
    "ConfigError",
    "DataError",
    "DifferencedMatrix",
    "EvalReport",
    "FeatureSet",
    "ForecastSeries",
    "HistogramBin",
    "InsufficientHistory",
    "InsufficientSamples",
    "InvalidConfig",
    "LrModel",
    "NormalizationStats",
    "NumericalError",
    "ParseError",
    "SaCoefficients",
    "SaModel",
    "SingularSystem",
    "Split",
    "SweepPoint",
    "SweepResult",
    "SynthConfig",
    "TrafficMatrix",
    "TrainingDiagnostics",
    "UncleanCorpus",
    "Underdetermined",
    "ZeroMeanActual",
    "apply_normalization",
    "ar_long_order",
    "clean",
    "corpus_to_csv",
    "cost",
    "cost_gradient",
    "evaluate",
    "fit_normalization",
    "forecast_horizon",
    "forecast_lr",
    "forecast_one",
    "forecast_sa",
    "hannan_rissanen",
    "histogram",
    "load_corpus",
    "load_model",
    "nrmse",
    "report_csv",
    "report_doc",
    "save_corpus",
    "save_model",
    "seasonal_difference",
    "slide_windows",
    "sweep_csv",
    "sweep_doc",
    "sweep_seasonality",
    "synthesize",
    "train_block_regression",
    "train_cg",
    "train_lr",
    "train_normal_equations",
    "train_sa",
]
