"""Permutation importance and its wrapper plugin."""

from __future__ import annotations

import pytest

from datagen import classification_dataset, survival_dataset
from tempoframe.data import (
    Continuous,
    Integer,
    RoleMap,
    assemble_dataset,
    build_static_samples,
)
from tempoframe.errors import (
    IncompatibleInner,
    MetricMismatch,
    TooFewSamples,
    WrongCategory,
)
from tempoframe.interpret import (
    as_wrapper,
    importance_report,
    permutation_importance,
)
from tempoframe.plugins import create


def _noise_classifier_ds(seed=0, n=60):
    """x1 decides the label, x2 is pure noise."""
    return classification_dataset(seed, n=n, informative="x1")


def test_informative_feature_dominates_noise():
    ds = _noise_classifier_ds()
    fitted = create("classify.logistic", {"iters": 400}).fit(ds)
    report = permutation_importance(fitted, ds, "accuracy", repeats=10,
                                    seed=3)
    assert report.metric == "accuracy"
    assert set(report.features) == {"x1", "x2"}
    assert report.importance_of("x1") > report.importance_of("x2")
    assert report.importance_of("x1") > 0.1
    assert abs(report.importance_of("x2")) < 0.1
    assert 0.0 <= report.baseline <= 1.0


def test_importance_is_deterministic_and_seed_sensitive():
    ds = _noise_classifier_ds(1)
    fitted = create("classify.logistic", {"iters": 200}).fit(ds)
    a = permutation_importance(fitted, ds, "accuracy", repeats=3, seed=7)
    b = permutation_importance(fitted, ds, "accuracy", repeats=3, seed=7)
    assert a == b
    c = permutation_importance(fitted, ds, "accuracy", repeats=3, seed=8)
    assert c != a


def test_constant_feature_has_zero_importance():
    rows = []
    sample_ids = []
    for i in range(20):
        sid = f"s{i:02d}"
        sample_ids.append(sid)
        rows.extend([(sid, "x1", 1.0 if i % 2 else -1.0),
                     (sid, "const", 5.0),
                     (sid, "y", i % 2)])
    ds = assemble_dataset(
        static=build_static_samples(
            rows, {"x1": Continuous(), "const": Continuous(),
                   "y": Integer()},
            sample_ids=sample_ids),
        roles=RoleMap.of(covariates=("x1", "const"), targets=("y",)))
    fitted = create("classify.logistic", {"iters": 300}).fit(ds)
    report = permutation_importance(fitted, ds, "accuracy", repeats=5)
    # permuting identical values changes nothing, bit for bit
    assert report.importance_of("const") == 0.0


def test_input_dataset_is_not_mutated():
    ds = _noise_classifier_ds(2)
    before_static = ds.static
    fitted = create("classify.logistic", {"iters": 100}).fit(ds)
    permutation_importance(fitted, ds, "accuracy", repeats=2)
    assert ds.static is before_static


def test_survival_importance_over_c_index():
    ds = survival_dataset(3, n=40, effect=2.0)
    fitted = create("survival.cox", {"iters": 150}).fit(ds)
    report = permutation_importance(fitted, ds, "c_index", repeats=5,
                                    seed=1)
    assert report.importance_of("x") > 0.0
    report_b = permutation_importance(fitted, ds, "brier@3.0", repeats=3)
    assert report_b.metric == "brier@3.0"


def test_metric_and_sample_guards():
    ds = _noise_classifier_ds(4)
    fitted = create("classify.logistic", {"iters": 50}).fit(ds)
    with pytest.raises(MetricMismatch):
        permutation_importance(fitted, ds, "rmse")
    with pytest.raises(MetricMismatch):
        permutation_importance(fitted, ds, "pehe")
    with pytest.raises(MetricMismatch):
        permutation_importance(fitted, ds, "no_such_metric")
    with pytest.raises(MetricMismatch):
        permutation_importance(fitted, ds, "c_index")
    with pytest.raises(TooFewSamples):
        permutation_importance(fitted, ds, "accuracy", repeats=0)

    from tempoframe.data import select_samples
    tiny = select_samples(ds, ds.sample_ids[:1])
    with pytest.raises(TooFewSamples):
        permutation_importance(fitted, tiny, "accuracy")


def test_wrapper_round_trip():
    ds = _noise_classifier_ds(5)
    inner = create("classify.logistic", {"iters": 200}).fit(ds)
    wrapped = as_wrapper(inner, metric="accuracy", repeats=4, seed=2)
    assert wrapped.predict(ds) == inner.predict(ds)
    report = importance_report(wrapped, ds)
    direct = permutation_importance(inner, ds, "accuracy", repeats=4,
                                    seed=2)
    assert report == direct

    double = as_wrapper(wrapped, metric="accuracy", repeats=1)
    assert double.predict(ds) == inner.predict(ds)
    assert importance_report(double, ds) == permutation_importance(
        inner, ds, "accuracy", repeats=1, seed=0)

    with pytest.raises(WrongCategory):
        importance_report(inner, ds)


def test_wrapper_rejects_incompatible_inner():
    ds = _noise_classifier_ds(6)
    scaler = create("scale.zscore").fit(ds)
    with pytest.raises(IncompatibleInner):
        as_wrapper(scaler, metric="accuracy")
