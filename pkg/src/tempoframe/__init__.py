"""tempoframe: a small toolkit for medically-flavored temporal data.

Datasets combine three modalities (static values, irregular time series,
at-most-one event records) under an exhaustive covariate/target/treatment
role partition. Estimators are plugins with a fit/transform/predict/
predict_counterfactuals lifecycle; a config-driven CLI benchmarks them
with deterministic, byte-stable reports.

Importing the package registers every shipped plugin.
"""

from tempoframe._version import __version__
from tempoframe.data import (
    MISSING,
    Categorical,
    Continuous,
    Dataset,
    EventSamples,
    Integer,
    Modality,
    Role,
    RoleMap,
    StaticSamples,
    TimeSeriesSamples,
    assemble_dataset,
    build_event_samples,
    build_static_samples,
    build_time_series_samples,
    covariate_matrix,
    is_missing,
    missing_mask,
    select_samples,
    temporal_summary,
    time_window,
)
from tempoframe.bundle import read_bundle, validate_bundle, write_bundle
from tempoframe.plugins import (
    Category,
    EstimatorSpec,
    FittedEstimator,
    Param,
    build_pipeline,
    create,
    fingerprint_of,
    list_specs,
    load_fitted,
    register_plugin,
    save_fitted,
    wrap,
)

# Importing these modules registers their plugins.
from tempoframe import preprocess  # noqa: F401
from tempoframe.forecasting import accuracy, rmse
from tempoframe.survival import (
    SurvivalCurve,
    brier_score,
    concordance_index,
    event_outcomes,
    kaplan_meier,
)
from tempoframe.treatment import pehe, synth_treatment_data
from tempoframe.interpret import (
    as_wrapper,
    importance_report,
    permutation_importance,
)
from tempoframe.bench import (
    BenchConfig,
    BenchReport,
    kfold_split,
    load_config,
    report_text,
    run_benchmark,
)

__all__ = [
    "__version__",
    "MISSING", "is_missing", "Continuous", "Integer", "Categorical",
    "Role", "Modality", "RoleMap", "Dataset",
    "StaticSamples", "TimeSeriesSamples", "EventSamples",
    "build_static_samples", "build_time_series_samples",
    "build_event_samples", "assemble_dataset",
    "select_samples", "time_window", "missing_mask", "temporal_summary",
    "covariate_matrix",
    "read_bundle", "write_bundle", "validate_bundle",
    "Category", "EstimatorSpec", "Param", "FittedEstimator",
    "register_plugin", "create", "list_specs", "build_pipeline", "wrap",
    "save_fitted", "load_fitted", "fingerprint_of",
    "rmse", "accuracy",
    "SurvivalCurve", "kaplan_meier", "concordance_index", "brier_score",
    "event_outcomes",
    "pehe", "synth_treatment_data",
    "permutation_importance", "as_wrapper", "importance_report",
    "BenchConfig", "BenchReport", "kfold_split", "load_config",
    "run_benchmark", "report_text",
]
