"""Time-to-event analysis: Kaplan-Meier curves, a Cox-style risk model,
concordance and Brier metrics.

Conventions pinned for the oracles: Breslow tie handling; at equal times
events precede censorings (censored-at-t samples stay at risk for deaths
at t); the Brier score is unweighted over evaluable samples, a documented
deviation from the censoring-weighted variant.
"""

from __future__ import annotations

import math
from bisect import bisect_right
from dataclasses import dataclass

from tempoframe.data import Dataset, MISSING, Role, covariate_matrix
from tempoframe.errors import (
    EmptyInput,
    NoComparablePairs,
    NoEvaluableSamples,
    NoEvents,
    RequirementUnmet,
)
from tempoframe.kernels import concordance_counts, cox_gd
from tempoframe.plugins import Category, EstimatorSpec, Param, register_plugin


@dataclass(frozen=True)
class SurvivalCurve:
    """Right-continuous step function; S(t) = 1 before the first breakpoint.

    Breakpoints are strictly increasing event times.
    """

    breakpoints: tuple
    values: tuple

    def value_at(self, t: float) -> float:
        idx = bisect_right(self.breakpoints, t)
        return 1.0 if idx == 0 else self.values[idx - 1]


@dataclass(frozen=True)
class EventOutcome:
    sample_id: str
    time: float
    occurred: bool


@dataclass(frozen=True)
class SurvivalOutput:
    """Per-sample risk scores (higher = earlier expected event) and
    per-sample survival curves."""

    sample_ids: tuple
    risks: tuple
    curves: tuple


def event_outcomes(ds: Dataset) -> list:
    """Derive per-sample (time, occurred) from the single event Target."""
    if ds.events is None:
        raise RequirementUnmet("missing_event_target",
                               "survival analysis needs an event container")
    targets = [fid for fid, _ in ds.events.features
               if ds.roles.role_of(fid) is Role.TARGET]
    if not targets:
        raise RequirementUnmet("missing_event_target",
                               "no event feature has the Target role")
    if len(targets) > 1:
        raise RequirementUnmet("multiple_targets",
                               f"expected one event target, got {targets}")
    fid = targets[0]
    out = []
    for sid in ds.sample_ids:
        entry = ds.events.entry(sid, fid)
        if entry is None:
            raise RequirementUnmet(
                "incomplete_event_target",
                f"sample {sid!r} has no record for event target {fid!r}")
        t, value = entry
        out.append(EventOutcome(sid, t, value is not MISSING))
    return out


# ---------------------------------------------------------------------------
# Kaplan-Meier
# ---------------------------------------------------------------------------

def kaplan_meier(outcomes) -> SurvivalCurve:
    """Product-limit estimate over distinct event times.

    At each event time t with d events among n at risk, S multiplies by
    (1 - d/n); R(t) = {j : t_j >= t}, so samples censored exactly at t are
    still at risk there.
    """
    outcomes = list(outcomes)
    if not outcomes:
        raise EmptyInput("kaplan_meier needs at least one sample")
    event_times = sorted({o.time for o in outcomes if o.occurred})
    breakpoints = []
    values = []
    s = 1.0
    for t in event_times:
        d = 0
        n = 0
        for o in outcomes:
            if o.time >= t:
                n += 1
                if o.occurred and o.time == t:
                    d += 1
        s = s * (1.0 - d / n)
        breakpoints.append(t)
        values.append(s)
    return SurvivalCurve(tuple(breakpoints), tuple(values))


# ---------------------------------------------------------------------------
# survival.cox
# ---------------------------------------------------------------------------

def _cox_requirements(params, ds: Dataset) -> None:
    event_outcomes(ds)


def _cox_fit(params, ds: Dataset) -> dict:
    outcomes = event_outcomes(ds)
    if not any(o.occurred for o in outcomes):
        raise NoEvents("all samples are censored")
    names, rows = covariate_matrix(ds)
    n = len(rows)
    d = len(names)
    z_flat = [v for row in rows for v in row]
    times = [o.time for o in outcomes]
    occurred = [1 if o.occurred else 0 for o in outcomes]
    beta, trace, grad_norm = cox_gd(n, d, z_flat, times, occurred,
                                    params["step_size"], params["iters"],
                                    params["ridge"])
    # Breslow baseline cumulative hazard at each distinct event time:
    # H0(t) = sum over event times u <= t of d_u / S0(u),
    # with S0(u) = sum of exp(beta . z_j) over j still at risk at u.
    xb = []
    for row in rows:
        s = 0.0
        for b, x in zip(beta, row):
            s += b * x
        xb.append(s)
    event_times = sorted({o.time for o in outcomes if o.occurred})
    base_times = []
    cumhaz = []
    h = 0.0
    for t in event_times:
        d_t = 0
        s0 = 0.0
        for i, o in enumerate(outcomes):
            if o.time >= t:
                s0 += math.exp(xb[i])
                if o.occurred and o.time == t:
                    d_t += 1
        h += d_t / s0
        base_times.append(t)
        cumhaz.append(h)
    return {"beta": beta, "columns": names, "trace": trace,
            "grad_norm": grad_norm,
            "baseline": {"times": base_times, "cumhaz": cumhaz}}


def _cox_predict(params, state, ds: Dataset) -> SurvivalOutput:
    names, rows = covariate_matrix(ds)
    beta = state["beta"]
    base_times = tuple(state["baseline"]["times"])
    cumhaz = state["baseline"]["cumhaz"]
    risks = []
    curves = []
    for row in rows:
        risk = 0.0
        for b, x in zip(beta, row):
            risk += b * x
        risks.append(risk)
        scale = math.exp(risk)
        curves.append(SurvivalCurve(
            base_times, tuple(math.exp(-h * scale) for h in cumhaz)))
    return SurvivalOutput(ds.sample_ids, tuple(risks), tuple(curves))


register_plugin(EstimatorSpec(
    name="survival.cox", category=Category.SURVIVAL,
    schema=(Param("iters", "integer", 500, lo=0),
            Param("step_size", "real", 0.1),
            Param("ridge", "real", 1e-6, lo=0.0)),
    fit=_cox_fit, predict=_cox_predict,
    requirements=_cox_requirements))


# ---------------------------------------------------------------------------
# Metrics
# ---------------------------------------------------------------------------

def concordance_index(risks, outcomes) -> float:
    """Concordant fraction over pairs (i, j) with t_i < t_j and i occurred;
    risk ties count 0.5."""
    outcomes = list(outcomes)
    risks = list(risks)
    times = [o.time for o in outcomes]
    occurred = [1 if o.occurred else 0 for o in outcomes]
    conc, tied, comp = concordance_counts(len(outcomes), times, occurred,
                                          [float(r) for r in risks])
    if comp == 0:
        raise NoComparablePairs("no comparable pair of outcomes")
    return (conc + 0.5 * tied) / comp


def brier_score(curves, outcomes, horizon: float) -> float:
    """Unweighted mean of (S_i(t*) - 1{t_i > t*})^2 over evaluable samples.

    Evaluable: occurred with t <= t*, or t > t* regardless of status.
    Samples censored at or before t* carry no label and are excluded.
    """
    total = 0.0
    count = 0
    for curve, o in zip(curves, outcomes):
        if o.time > horizon:
            label = 1.0
        elif o.occurred:
            label = 0.0
        else:
            continue
        d = curve.value_at(horizon) - label
        total += d * d
        count += 1
    if count == 0:
        raise NoEvaluableSamples(
            f"no sample is evaluable at horizon {horizon}")
    return total / count
