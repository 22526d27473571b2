"""Forecasting baselines and static-outcome classification.

Plugins: `forecast.persistence`, `forecast.ar`, `classify.logistic`.
The AR fitter requires already-regular target series (resample first; see
`resample.regular`) so the preprocessing step stays explicit and testable.
"""

from __future__ import annotations

import math

from tempoframe.data import (
    Categorical,
    Continuous,
    Dataset,
    Integer,
    MISSING,
    Role,
    StaticSamples,
    TimeSeriesSamples,
    covariate_matrix,
)
from tempoframe.errors import (
    AlignmentError,
    EmptyInput,
    EmptyTargetSeries,
    InsufficientHistory,
    InvalidStep,
    IrregularSeries,
    MissingInTarget,
    NonBinaryTarget,
    RequirementUnmet,
)
from tempoframe.kernels import logistic_gd, ridge_normal_solve
from tempoframe.plugins import (
    Category,
    EstimatorSpec,
    ForecastOutput,
    Param,
    StaticOutput,
    register_plugin,
)


def _temporal_targets(ds: Dataset) -> list:
    if ds.temporal is None:
        raise RequirementUnmet("missing_temporal_target",
                               "forecasting needs a temporal target feature")
    out = [(fid, kind) for fid, kind in ds.temporal.features
           if ds.roles.role_of(fid) is Role.TARGET]
    if not out:
        raise RequirementUnmet("missing_temporal_target",
                               "no temporal feature has the Target role")
    for fid, kind in out:
        if isinstance(kind, Categorical):
            raise RequirementUnmet("non_numeric_feature",
                                   f"target {fid!r} is categorical")
    return [fid for fid, _ in out]


def _check_step(step: float) -> None:
    if step <= 0 or not math.isfinite(step):
        raise InvalidStep(f"step must be a positive real, got {step}")


def _forecast_requirements(params, ds: Dataset) -> None:
    _check_step(params["step"])
    _temporal_targets(ds)


# ---------------------------------------------------------------------------
# forecast.persistence
# ---------------------------------------------------------------------------

def _persistence_fit(params, ds: Dataset) -> dict:
    return {"targets": _temporal_targets(ds)}


def _last_observed(seq, sid, fid):
    for t, v in reversed(seq):
        if v is not MISSING:
            return t, float(v)
    raise EmptyTargetSeries(
        f"no observed value in target {fid!r} of sample {sid!r}")


def _persistence_predict(params, state, ds: Dataset) -> ForecastOutput:
    horizon = params["horizon"]
    step = params["step"]
    targets = state["targets"]
    features = tuple((fid, Continuous()) for fid in targets)
    series = []
    for sid in ds.sample_ids:
        per_sample = []
        for fid in targets:
            t_last, v_last = _last_observed(ds.temporal.sequence(sid, fid),
                                            sid, fid)
            per_sample.append(tuple((t_last + k * step, v_last)
                                    for k in range(1, horizon + 1)))
        series.append(tuple(per_sample))
    return ForecastOutput(TimeSeriesSamples(ds.sample_ids, features,
                                            tuple(series)))


register_plugin(EstimatorSpec(
    name="forecast.persistence", category=Category.PREDICTOR,
    schema=(Param("horizon", "integer", 1, lo=1),
            Param("step", "real", 1.0)),
    fit=_persistence_fit, predict=_persistence_predict,
    requirements=_forecast_requirements))


# ---------------------------------------------------------------------------
# forecast.ar
# ---------------------------------------------------------------------------

def _regular_values(seq, step: float, order: int, sid, fid) -> list:
    """Validate one target sequence for AR use and return its values.

    The grid must satisfy times[k] == times[0] + k*step exactly, the same
    expression `resample.regular` emits, so resampled data always passes.
    """
    if len(seq) < order + 1:
        raise InsufficientHistory(
            f"target {fid!r} of sample {sid!r} has {len(seq)} points, "
            f"order {order} needs at least {order + 1}")
    t0 = seq[0][0]
    values = []
    for k, (t, v) in enumerate(seq):
        if t != t0 + k * step:
            raise IrregularSeries(
                f"target {fid!r} of sample {sid!r} is not on a regular "
                f"grid with step {step} (point {k} at t={t})")
        if v is MISSING:
            raise MissingInTarget(
                f"target {fid!r} of sample {sid!r} has a missing value "
                f"at t={t}")
        values.append(float(v))
    return values


def _ar_fit(params, ds: Dataset) -> dict:
    order = params["order"]
    step = params["step"]
    models = {}
    for fid in _temporal_targets(ds):
        x_flat = []
        y = []
        for sid in ds.sample_ids:
            values = _regular_values(ds.temporal.sequence(sid, fid), step,
                                     order, sid, fid)
            for t in range(order, len(values)):
                x_flat.append(1.0)
                for k in range(1, order + 1):
                    x_flat.append(values[t - k])
                y.append(values[t])
        n_cols = order + 1
        coefs = ridge_normal_solve(len(y), n_cols, x_flat, y, 1e-9,
                                   [1.0] * n_cols)
        models[fid] = {"c": coefs[0], "phi": coefs[1:]}
    return {"models": models}


def _ar_predict(params, state, ds: Dataset) -> ForecastOutput:
    order = params["order"]
    horizon = params["horizon"]
    step = params["step"]
    models = state["models"]
    features = tuple((fid, Continuous()) for fid in models)
    series = []
    for sid in ds.sample_ids:
        per_sample = []
        for fid, model in models.items():
            seq = ds.temporal.sequence(sid, fid)
            if len(seq) < order:
                raise InsufficientHistory(
                    f"target {fid!r} of sample {sid!r} has {len(seq)} "
                    f"points, order {order} needs at least {order}")
            history = _regular_values(seq, step, len(seq) - 1, sid, fid)
            t_last = seq[-1][0]
            c = model["c"]
            phi = model["phi"]
            out = []
            for k in range(1, horizon + 1):
                nxt = c
                for i in range(order):
                    nxt += phi[i] * history[-1 - i]
                history.append(nxt)
                out.append((t_last + k * step, nxt))
            per_sample.append(tuple(out))
        series.append(tuple(per_sample))
    return ForecastOutput(TimeSeriesSamples(ds.sample_ids, features,
                                            tuple(series)))


register_plugin(EstimatorSpec(
    name="forecast.ar", category=Category.PREDICTOR,
    schema=(Param("order", "integer", 1, lo=1),
            Param("horizon", "integer", 1, lo=1),
            Param("step", "real", 1.0)),
    fit=_ar_fit, predict=_ar_predict,
    requirements=_forecast_requirements))


# ---------------------------------------------------------------------------
# classify.logistic
# ---------------------------------------------------------------------------

def _binary_static_target(ds: Dataset):
    """The single binary static Target feature, as (feature_id, kind)."""
    if ds.static is None:
        raise RequirementUnmet("missing_static_target",
                               "classification needs a static target")
    targets = [(fid, kind) for fid, kind in ds.static.features
               if ds.roles.role_of(fid) is Role.TARGET]
    if not targets:
        raise RequirementUnmet("missing_static_target",
                               "no static feature has the Target role")
    if len(targets) > 1:
        raise RequirementUnmet(
            "multiple_targets",
            f"expected one static target, got {[f for f, _ in targets]}")
    fid, kind = targets[0]
    if isinstance(kind, Categorical):
        if len(kind.categories) != 2:
            raise NonBinaryTarget(
                f"target {fid!r} has {len(kind.categories)} categories")
    elif not isinstance(kind, Integer):
        raise NonBinaryTarget(f"target {fid!r} is continuous")
    return fid, kind


def _label_of(v, kind, fid, sid):
    if v is MISSING:
        raise MissingInTarget(f"target {fid!r} missing for sample {sid!r}")
    if isinstance(kind, Categorical):
        # Positive class is the second declared category.
        return 1.0 if v == kind.categories[1] else 0.0
    if v not in (0, 1):
        raise NonBinaryTarget(f"integer target {fid!r} has value {v!r} "
                              "outside {0, 1}")
    return float(v)


def _classifier_requirements(params, ds: Dataset) -> None:
    _binary_static_target(ds)


def _logistic_fit(params, ds: Dataset) -> dict:
    fid, kind = _binary_static_target(ds)
    names, rows = covariate_matrix(ds)
    y = [_label_of(v, kind, fid, sid)
         for sid, v in zip(ds.sample_ids, ds.static.column(fid))]
    x_flat = [v for row in rows for v in row]
    weights, bias = logistic_gd(len(rows), len(names), x_flat, y,
                                params["lr"], params["iters"])
    return {"target": fid, "columns": names, "weights": weights,
            "bias": bias}


def _sigmoid(z: float) -> float:
    if z >= 0.0:
        return 1.0 / (1.0 + math.exp(-z))
    e = math.exp(z)
    return e / (1.0 + e)


def _logistic_predict(params, state, ds: Dataset) -> StaticOutput:
    names, rows = covariate_matrix(ds)
    if names != list(state["columns"]):
        raise AlignmentError(
            f"featurized columns changed: trained on {state['columns']}, "
            f"got {names}")
    weights = state["weights"]
    bias = state["bias"]
    values = []
    for row in rows:
        z = bias
        for w, x in zip(weights, row):
            z += w * x
        values.append((_sigmoid(z),))
    return StaticOutput(StaticSamples(
        ds.sample_ids, ((state["target"], Continuous()),), tuple(values)))


register_plugin(EstimatorSpec(
    name="classify.logistic", category=Category.PREDICTOR,
    schema=(Param("seed", "integer", 0),
            Param("lr", "real", 0.1, lo=0.0),
            Param("iters", "integer", 500, lo=1)),
    fit=_logistic_fit, predict=_logistic_predict,
    requirements=_classifier_requirements))


# ---------------------------------------------------------------------------
# Metrics
# ---------------------------------------------------------------------------

def _static_table(x):
    if isinstance(x, StaticOutput):
        x = x.values
    if isinstance(x, Dataset):
        if x.static is None:
            raise AlignmentError("dataset has no static container to compare")
        x = x.static
    if not isinstance(x, StaticSamples):
        raise AlignmentError(f"expected static predictions, got {type(x).__name__}")
    return x


def _temporal_table(x):
    if isinstance(x, ForecastOutput):
        x = x.series
    if isinstance(x, Dataset):
        if x.temporal is None:
            raise AlignmentError("dataset has no temporal container to compare")
        x = x.temporal
    if not isinstance(x, TimeSeriesSamples):
        raise AlignmentError(f"expected forecast predictions, got {type(x).__name__}")
    return x


def _numeric(v, where: str) -> float:
    if v is MISSING:
        raise AlignmentError(f"{where}: missing value in comparison")
    if isinstance(v, str):
        raise AlignmentError(f"{where}: non-numeric value {v!r}")
    return float(v)


def rmse(pred, truth) -> float:
    """Root-mean-square error over all aligned points.

    Forecast comparisons require bitwise-equal time grids; any Missing or
    non-numeric value is an alignment failure, not a skip.
    """
    if isinstance(pred, (ForecastOutput, TimeSeriesSamples)):
        a = _temporal_table(pred)
        b = _temporal_table(truth)
        if a.sample_ids != b.sample_ids:
            raise AlignmentError("sample ids differ between pred and truth")
        if a.feature_ids != b.feature_ids:
            raise AlignmentError("features differ between pred and truth")
        total = 0.0
        count = 0
        for i, sid in enumerate(a.sample_ids):
            for j, (fid, _) in enumerate(a.features):
                sa = a.series[i][j]
                sb = b.series[i][j]
                if tuple(t for t, _ in sa) != tuple(t for t, _ in sb):
                    raise AlignmentError(
                        f"time grids differ for sample {sid!r}, "
                        f"feature {fid!r}")
                for (t, va), (_, vb) in zip(sa, sb):
                    where = f"({sid}, {fid}, t={t})"
                    d = _numeric(va, where) - _numeric(vb, where)
                    total += d * d
                    count += 1
        if count == 0:
            raise EmptyInput("no aligned points to compare")
        return math.sqrt(total / count)
    a = _static_table(pred)
    b = _static_table(truth)
    if a.sample_ids != b.sample_ids:
        raise AlignmentError("sample ids differ between pred and truth")
    if a.feature_ids != b.feature_ids:
        raise AlignmentError("features differ between pred and truth")
    total = 0.0
    count = 0
    for i, sid in enumerate(a.sample_ids):
        for j, (fid, _) in enumerate(a.features):
            where = f"({sid}, {fid})"
            d = _numeric(a.values[i][j], where) - _numeric(b.values[i][j],
                                                           where)
            total += d * d
            count += 1
    if count == 0:
        raise EmptyInput("no aligned points to compare")
    return math.sqrt(total / count)


def accuracy(pred, truth, threshold: float = 0.5) -> float:
    """Fraction of cells whose thresholded probability matches the label.

    Predicted label is 1 when p >= threshold. Truth labels may be Integer
    0/1 or binary Categorical (second category = positive).
    """
    a = _static_table(pred)
    b = _static_table(truth)
    if a.sample_ids != b.sample_ids:
        raise AlignmentError("sample ids differ between pred and truth")
    if a.feature_ids != b.feature_ids:
        raise AlignmentError("features differ between pred and truth")
    correct = 0
    count = 0
    for i, sid in enumerate(a.sample_ids):
        for j, (fid, kind) in enumerate(b.features):
            p = _numeric(a.values[i][j], f"({sid}, {fid})")
            tv = b.values[i][j]
            if tv is MISSING:
                raise AlignmentError(f"({sid}, {fid}): missing truth label")
            if isinstance(kind, Categorical):
                if len(kind.categories) != 2:
                    raise AlignmentError(
                        f"truth feature {fid!r} is not binary")
                label = 1 if tv == kind.categories[1] else 0
            elif tv in (0, 1):
                label = int(tv)
            else:
                raise AlignmentError(
                    f"({sid}, {fid}): truth label {tv!r} outside {{0, 1}}")
            correct += 1 if (1 if p >= threshold else 0) == label else 0
            count += 1
    if count == 0:
        raise EmptyInput("no cells to compare")
    return correct / count
