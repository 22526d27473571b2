"""Metric name registry: maps the names accepted in benchmark configs and
importance wrappers onto the metric functions that live next to their
estimators.

A metric is in-place scorable when its ground truth can be read off the
evaluation dataset itself (labels or event outcomes). rmse needs a held-out
future and pehe needs recorded true effects, so those are driven by the
benchmark harness instead and have no scorer here.
"""

from __future__ import annotations

from dataclasses import dataclass

from tempoframe.data import Dataset, Role, StaticSamples
from tempoframe.errors import MetricMismatch
from tempoframe.forecasting import accuracy
from tempoframe.plugins import Category
from tempoframe.survival import brier_score, concordance_index, event_outcomes


@dataclass(frozen=True)
class MetricSpec:
    name: str
    direction: str        # "loss" or "gain"
    task: str
    categories: tuple     # effective estimator categories it can score
    scorer: object = None  # (fitted, ds) -> float, or None


def static_target_table(ds: Dataset) -> StaticSamples:
    """The static Target columns of a dataset, in container order."""
    if ds.static is None:
        raise MetricMismatch("dataset has no static target to score against")
    feats = tuple((fid, kind) for fid, kind in ds.static.features
                  if ds.roles.role_of(fid) is Role.TARGET)
    if not feats:
        raise MetricMismatch("dataset has no static target to score against")
    cols = {fid: ds.static.column(fid) for fid, _ in feats}
    grid = tuple(
        tuple(cols[fid][i] for fid, _ in feats)
        for i in range(len(ds.sample_ids)))
    return StaticSamples(ds.sample_ids, feats, grid)


def _score_accuracy(fitted, ds: Dataset) -> float:
    return accuracy(fitted.predict(ds), static_target_table(ds))


def _score_c_index(fitted, ds: Dataset) -> float:
    out = fitted.predict(ds)
    return concordance_index(out.risks, event_outcomes(ds))


def _score_brier(horizon: float):
    def score(fitted, ds: Dataset) -> float:
        out = fitted.predict(ds)
        return brier_score(out.curves, event_outcomes(ds), horizon)
    return score


def resolve_metric(name: str) -> MetricSpec:
    """Metric names: rmse, accuracy, c_index, brier@<t>, pehe."""
    if name == "rmse":
        return MetricSpec("rmse", "loss", "forecast", (Category.PREDICTOR,))
    if name == "accuracy":
        return MetricSpec("accuracy", "gain", "classify",
                          (Category.PREDICTOR,), _score_accuracy)
    if name == "c_index":
        return MetricSpec("c_index", "gain", "survival",
                          (Category.SURVIVAL,), _score_c_index)
    if name == "pehe":
        return MetricSpec("pehe", "loss", "treatment", (Category.TREATMENT,))
    if name.startswith("brier@"):
        raw = name[len("brier@"):]
        try:
            horizon = float(raw)
        except ValueError:
            raise MetricMismatch(
                f"bad brier horizon {raw!r} in metric {name!r}") from None
        return MetricSpec(name, "loss", "survival", (Category.SURVIVAL,),
                          _score_brier(horizon))
    raise MetricMismatch(f"unknown metric {name!r}")
