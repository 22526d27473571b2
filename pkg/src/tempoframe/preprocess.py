"""Preprocessing transforms: imputation, scaling, encoding, resampling.

All five are Transform-category plugins. Event containers are never
touched: a censoring sentinel is information, not missingness. Imputers
cover every static/temporal feature; the scaler and the encoder restrict
themselves to covariates so that targets keep their outcome units and
treatment arms stay intact.
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
    RoleMap,
    StaticSamples,
    TimeSeriesSamples,
    assemble_dataset,
)
from tempoframe.errors import (
    AllMissingFeature,
    InvalidStep,
    RequirementUnmet,
    UnseenCategory,
)
from tempoframe.plugins import Category, EstimatorSpec, Param, register_plugin


def _rebuild(ds: Dataset, static=None, temporal=None, roles=None) -> Dataset:
    return assemble_dataset(
        static=static if static is not None else ds.static,
        temporal=temporal if temporal is not None else ds.temporal,
        events=ds.events,
        roles=roles if roles is not None else ds.roles)


def _require_temporal(params, ds: Dataset) -> None:
    if ds.temporal is None:
        raise RequirementUnmet("missing_temporal",
                               "transform needs a temporal container")


def _observed_training_values(ds: Dataset) -> dict:
    """feature_id -> list of observed values, static cells then temporal
    points, in container order."""
    out = {}
    if ds.static is not None:
        for fid, _ in ds.static.features:
            out[fid] = [v for v in ds.static.column(fid) if v is not MISSING]
    if ds.temporal is not None:
        for j, (fid, _) in enumerate(ds.temporal.features):
            vals = []
            for per_sample in ds.temporal.series:
                for _, v in per_sample[j]:
                    if v is not MISSING:
                        vals.append(v)
            out[fid] = vals
    return out


def _fill_value(kind, observed: list):
    """Training fill statistic: mean (Integer: rounded half-even),
    or modal category with ties broken lexicographically."""
    if isinstance(kind, Categorical):
        counts: dict = {}
        for v in observed:
            counts[v] = counts.get(v, 0) + 1
        best = max(counts.values())
        return min(c for c, k in counts.items() if k == best)
    total = 0.0
    for v in observed:
        total += float(v)
    mean = total / len(observed)
    if isinstance(kind, Integer):
        return round(mean)
    return mean


# ---------------------------------------------------------------------------
# impute.mean
# ---------------------------------------------------------------------------

def _mean_fit(params, ds: Dataset) -> dict:
    observed = _observed_training_values(ds)
    kinds = {}
    if ds.static is not None:
        kinds.update(dict(ds.static.features))
    if ds.temporal is not None:
        kinds.update(dict(ds.temporal.features))
    fills = {}
    for fid, values in observed.items():
        if not values:
            raise AllMissingFeature(
                f"feature {fid!r} has no observed training value")
        fills[fid] = _fill_value(kinds[fid], values)
    return {"fills": fills}


def _mean_transform(params, state, ds: Dataset) -> Dataset:
    fills = state["fills"]
    static = ds.static
    if static is not None:
        grid = tuple(
            tuple(fills[fid] if v is MISSING and fid in fills else v
                  for v, (fid, _) in zip(row, static.features))
            for row in static.values)
        static = StaticSamples(static.sample_ids, static.features, grid)
    temporal = ds.temporal
    if temporal is not None:
        series = tuple(
            tuple(
                tuple((t, fills[fid])
                      if v is MISSING and fid in fills else (t, v)
                      for t, v in seq)
                for seq, (fid, _) in zip(per_sample, temporal.features))
            for per_sample in temporal.series)
        temporal = TimeSeriesSamples(temporal.sample_ids, temporal.features,
                                     series)
    return _rebuild(ds, static=static, temporal=temporal)


# ---------------------------------------------------------------------------
# impute.locf
# ---------------------------------------------------------------------------

def _locf_fit(params, ds: Dataset) -> dict:
    kinds = dict(ds.temporal.features)
    fills = {}
    for j, (fid, _) in enumerate(ds.temporal.features):
        vals = []
        for per_sample in ds.temporal.series:
            for _, v in per_sample[j]:
                if v is not MISSING:
                    vals.append(v)
        # Leading-gap fallback; a feature with zero observed training
        # values has no fallback and its leading gaps stay Missing.
        fills[fid] = _fill_value(kinds[fid], vals) if vals else None
    return {"fills": fills}


def _locf_seq(seq, fallback):
    out = []
    carry = None
    for t, v in seq:
        if v is MISSING:
            if carry is not None:
                out.append((t, carry))
            elif fallback is not None:
                out.append((t, fallback))
            else:
                out.append((t, MISSING))
        else:
            carry = v
            out.append((t, v))
    return tuple(out)


def _locf_transform(params, state, ds: Dataset) -> Dataset:
    fills = state["fills"]
    temporal = ds.temporal
    series = tuple(
        tuple(_locf_seq(seq, fills.get(fid))
              for seq, (fid, _) in zip(per_sample, temporal.features))
        for per_sample in temporal.series)
    temporal = TimeSeriesSamples(temporal.sample_ids, temporal.features,
                                 series)
    return _rebuild(ds, temporal=temporal)


# ---------------------------------------------------------------------------
# scale.zscore
# ---------------------------------------------------------------------------

def _zscore_features(ds: Dataset) -> list:
    """Continuous covariates, the only features this scaler touches."""
    out = []
    for container in (ds.static, ds.temporal):
        if container is None:
            continue
        for fid, kind in container.features:
            if isinstance(kind, Continuous) and \
                    ds.roles.role_of(fid) is Role.COVARIATE:
                out.append(fid)
    return out


def _zscore_fit(params, ds: Dataset) -> dict:
    observed = _observed_training_values(ds)
    stats = {}
    for fid in _zscore_features(ds):
        vals = observed[fid]
        if not vals:
            # Nothing observed: flagged degenerate, transform maps to 0.
            stats[fid] = [0.0, 0.0]
            continue
        total = 0.0
        for v in vals:
            total += v
        mean = total / len(vals)
        ssq = 0.0
        for v in vals:
            d = v - mean
            ssq += d * d
        stats[fid] = [mean, math.sqrt(ssq / len(vals))]
    return {"stats": stats}


def _zscore_apply(v, stat):
    if v is MISSING:
        return MISSING
    mean, std = stat
    if std == 0.0:
        return 0.0
    return (v - mean) / std


def _zscore_transform(params, state, ds: Dataset) -> Dataset:
    stats = state["stats"]
    static = ds.static
    if static is not None:
        grid = tuple(
            tuple(_zscore_apply(v, stats[fid]) if fid in stats else v
                  for v, (fid, _) in zip(row, static.features))
            for row in static.values)
        static = StaticSamples(static.sample_ids, static.features, grid)
    temporal = ds.temporal
    if temporal is not None:
        series = tuple(
            tuple(
                tuple((t, _zscore_apply(v, stats[fid])) for t, v in seq)
                if fid in stats else seq
                for seq, (fid, _) in zip(per_sample, temporal.features))
            for per_sample in temporal.series)
        temporal = TimeSeriesSamples(temporal.sample_ids, temporal.features,
                                     series)
    return _rebuild(ds, static=static, temporal=temporal)


# ---------------------------------------------------------------------------
# encode.onehot
# ---------------------------------------------------------------------------

def _onehot_fit(params, ds: Dataset) -> dict:
    encoded = []
    for modality, container in (("static", ds.static),
                                ("temporal", ds.temporal)):
        if container is None:
            continue
        for fid, kind in container.features:
            if isinstance(kind, Categorical) and \
                    ds.roles.role_of(fid) is Role.COVARIATE:
                encoded.append([fid, modality, list(kind.categories)])
    return {"encoded": encoded}


def _onehot_value(v, cats, fid):
    if v is MISSING:
        return [MISSING] * len(cats)
    if v not in cats:
        raise UnseenCategory(f"value {v!r} of feature {fid!r} not in "
                             f"declared categories {cats}")
    return [1 if v == c else 0 for c in cats]


def _onehot_transform(params, state, ds: Dataset) -> Dataset:
    by_feature = {fid: cats for fid, modality, cats in state["encoded"]}
    if not by_feature:
        return ds
    new_roles = []
    dropped = set()
    static = ds.static
    if static is not None and any(f in by_feature for f in static.feature_ids):
        features = []
        for fid, kind in static.features:
            if fid in by_feature:
                dropped.add(fid)
                for c in by_feature[fid]:
                    features.append((f"{fid}={c}", Integer()))
                    new_roles.append(f"{fid}={c}")
            else:
                features.append((fid, kind))
        grid = []
        for row in static.values:
            new_row = []
            for v, (fid, _) in zip(row, static.features):
                if fid in by_feature:
                    new_row.extend(_onehot_value(v, by_feature[fid], fid))
                else:
                    new_row.append(v)
            grid.append(tuple(new_row))
        static = StaticSamples(static.sample_ids, tuple(features),
                               tuple(grid))
    temporal = ds.temporal
    if temporal is not None and \
            any(f in by_feature for f in temporal.feature_ids):
        features = []
        for fid, kind in temporal.features:
            if fid in by_feature:
                dropped.add(fid)
                for c in by_feature[fid]:
                    features.append((f"{fid}={c}", Integer()))
                    new_roles.append(f"{fid}={c}")
            else:
                features.append((fid, kind))
        series = []
        for per_sample in temporal.series:
            new_per_sample = []
            for seq, (fid, _) in zip(per_sample, temporal.features):
                if fid in by_feature:
                    cats = by_feature[fid]
                    expanded = [[] for _ in cats]
                    for t, v in seq:
                        bits = _onehot_value(v, cats, fid)
                        for slot, bit in zip(expanded, bits):
                            slot.append((t, bit))
                    new_per_sample.extend(tuple(s) for s in expanded)
                else:
                    new_per_sample.append(seq)
            series.append(tuple(new_per_sample))
        temporal = TimeSeriesSamples(temporal.sample_ids, tuple(features),
                                     tuple(series))
    assignment = [(fid, role) for fid, role in ds.roles.assignment
                  if fid not in dropped]
    assignment.extend((fid, Role.COVARIATE) for fid in new_roles)
    return _rebuild(ds, static=static, temporal=temporal,
                    roles=RoleMap(tuple(assignment)))


# ---------------------------------------------------------------------------
# resample.regular
# ---------------------------------------------------------------------------

def _resample_seq(seq, step: float):
    if not seq:
        return ()
    t_min = seq[0][0]
    t_max = seq[-1][0]
    count = int(math.floor((t_max - t_min) / step)) + 1
    # Floor in floating point can land one short of an exactly-representable
    # endpoint; extend if the next grid time still fits.
    while t_min + count * step <= t_max:
        count += 1
    out = []
    src = 0
    carry = MISSING
    prev_t = None
    for k in range(count):
        t = t_min + k * step
        if prev_t is not None and not t > prev_t:
            raise InvalidStep(
                f"step {step} is below time resolution at t={t}")
        prev_t = t
        while src < len(seq) and seq[src][0] <= t:
            carry = seq[src][1]
            src += 1
        out.append((t, carry))
    return tuple(out)


def _resample_fit(params, ds: Dataset) -> dict:
    if params["step"] <= 0 or not math.isfinite(params["step"]):
        raise InvalidStep(f"step must be a positive real, got {params['step']}")
    return {}


def _resample_transform(params, state, ds: Dataset) -> Dataset:
    step = params["step"]
    if step <= 0 or not math.isfinite(step):
        raise InvalidStep(f"step must be a positive real, got {step}")
    temporal = ds.temporal
    series = tuple(
        tuple(_resample_seq(seq, step) for seq in per_sample)
        for per_sample in temporal.series)
    temporal = TimeSeriesSamples(temporal.sample_ids, temporal.features,
                                 series)
    return _rebuild(ds, temporal=temporal)


# ---------------------------------------------------------------------------
# Registration
# ---------------------------------------------------------------------------

register_plugin(EstimatorSpec(
    name="impute.locf", category=Category.TRANSFORM,
    fit=_locf_fit, transform=_locf_transform,
    requirements=_require_temporal))

register_plugin(EstimatorSpec(
    name="impute.mean", category=Category.TRANSFORM,
    fit=_mean_fit, transform=_mean_transform))

register_plugin(EstimatorSpec(
    name="scale.zscore", category=Category.TRANSFORM,
    fit=_zscore_fit, transform=_zscore_transform))

register_plugin(EstimatorSpec(
    name="encode.onehot", category=Category.TRANSFORM,
    fit=_onehot_fit, transform=_onehot_transform))

register_plugin(EstimatorSpec(
    name="resample.regular", category=Category.TRANSFORM,
    schema=(Param("step", "real", 1.0),),
    fit=_resample_fit, transform=_resample_transform,
    requirements=_require_temporal))
