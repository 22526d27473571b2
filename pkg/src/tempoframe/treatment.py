"""Individualized treatment effects via a two-model (T-learner) estimator,
plus the PEHE metric and a ground-truth synthetic generator.

Scope is deliberately narrow: one binary static treatment, one continuous
static outcome, arm-wise ridge regression over featurized covariates.
Sequential treatment regimes are out of scope.
"""

from __future__ import annotations

from dataclasses import dataclass

from tempoframe.data import (
    Continuous,
    Dataset,
    Integer,
    MISSING,
    Modality,
    Role,
    RoleMap,
    assemble_dataset,
    build_static_samples,
    covariate_matrix,
)
from tempoframe.errors import (
    AlignmentError,
    ArmTooSmall,
    InvalidAlternative,
    InvalidSpec,
    MissingInTarget,
    MultipleTargets,
    NonBinaryTreatment,
    RequirementUnmet,
)
from tempoframe.kernels import ridge_normal_solve
from tempoframe.plugins import Category, EstimatorSpec, Param, register_plugin
from tempoframe.rng import Lcg


@dataclass(frozen=True)
class CounterfactualOutput:
    """One predicted outcome per sample per requested alternative.

    `outcomes[k]` is aligned with `sample_ids` and belongs to
    `alternatives[k]` (sorted ascending).
    """

    sample_ids: tuple
    alternatives: tuple
    outcomes: tuple

    def outcomes_for(self, alternative: int) -> tuple:
        try:
            k = self.alternatives.index(alternative)
        except ValueError:
            raise InvalidAlternative(
                f"alternative {alternative!r} was not predicted") from None
        return self.outcomes[k]

    def effects(self) -> "EffectEstimate":
        """tau-hat per sample: outcome under arm 1 minus under arm 0."""
        ones = self.outcomes_for(1)
        zeros = self.outcomes_for(0)
        return EffectEstimate(self.sample_ids,
                              tuple(a - b for a, b in zip(ones, zeros)))


@dataclass(frozen=True)
class EffectEstimate:
    sample_ids: tuple
    values: tuple


@dataclass(frozen=True)
class SynthGroundTruth:
    """Synthetic dataset plus the per-sample true effect, aligned with
    dataset.sample_ids."""

    dataset: Dataset
    effects: tuple


# ---------------------------------------------------------------------------
# Role resolution
# ---------------------------------------------------------------------------

def _binary_treatment(ds: Dataset) -> tuple:
    """Returns (feature_id, per-sample arm in {0, 1})."""
    feats = ds.features_with_role(Role.TREATMENT)
    if not feats:
        raise RequirementUnmet("missing_treatment",
                               "no feature has the Treatment role")
    if len(feats) > 1:
        raise RequirementUnmet(
            "multiple_treatments",
            f"expected one treatment feature, got {[f for f, _, _ in feats]}")
    fid, kind, modality = feats[0]
    if modality is not Modality.STATIC:
        raise RequirementUnmet("non_static_treatment",
                               f"treatment {fid!r} is {modality.value}")
    if isinstance(kind, Integer):
        def arm_of(v):
            if v in (0, 1):
                return v
            raise NonBinaryTreatment(f"treatment {fid!r} has value {v!r} "
                                     "outside {0, 1}")
    elif hasattr(kind, "categories"):
        cats = kind.categories
        if len(cats) != 2:
            raise NonBinaryTreatment(
                f"treatment {fid!r} has {len(cats)} categories")

        def arm_of(v):
            return cats.index(v)
    else:
        raise NonBinaryTreatment(f"treatment {fid!r} is continuous")
    arms = []
    for sid in ds.sample_ids:
        v = ds.static.cell(sid, fid)
        if v is MISSING:
            raise RequirementUnmet(
                "missing_treatment_value",
                f"sample {sid!r} has no treatment assignment")
        arms.append(arm_of(v))
    return fid, arms


def _continuous_target(ds: Dataset) -> tuple:
    """Returns (feature_id, per-sample outcome floats)."""
    feats = ds.features_with_role(Role.TARGET)
    if not feats:
        raise RequirementUnmet("missing_target",
                               "no feature has the Target role")
    if len(feats) > 1:
        raise MultipleTargets(f"got {[f for f, _, _ in feats]}")
    fid, kind, modality = feats[0]
    if modality is not Modality.STATIC or not isinstance(kind, Continuous):
        raise RequirementUnmet(
            "non_continuous_target",
            f"outcome {fid!r} must be a continuous static feature")
    ys = []
    for sid in ds.sample_ids:
        v = ds.static.cell(sid, fid)
        if v is MISSING:
            raise MissingInTarget(f"outcome {fid!r} missing for sample "
                                  f"{sid!r}")
        ys.append(float(v))
    return fid, ys


# ---------------------------------------------------------------------------
# treatment.t_learner
# ---------------------------------------------------------------------------

def _tl_requirements(params, ds: Dataset) -> None:
    _binary_treatment(ds)
    _continuous_target(ds)


def _fit_arm(rows: list, ys: list, ridge: float) -> list:
    # Intercept as a constant-1 leading column, excluded from the penalty
    # so outcome shifts move the intercept only.
    d = len(rows[0]) if rows else 0
    flat = []
    for row in rows:
        flat.append(1.0)
        flat.extend(row)
    penalty = [0.0] + [1.0] * d
    return ridge_normal_solve(len(rows), d + 1, flat, ys, ridge, penalty)


def _tl_fit(params, ds: Dataset) -> dict:
    fid, arms = _binary_treatment(ds)
    _, ys = _continuous_target(ds)
    names, rows = covariate_matrix(ds)
    need = len(names) + 1
    weights = {}
    for arm in (0, 1):
        idx = [i for i, a in enumerate(arms) if a == arm]
        if len(idx) < need:
            raise ArmTooSmall(
                f"arm {arm} has {len(idx)} samples, needs at least {need}")
        weights[str(arm)] = _fit_arm([rows[i] for i in idx],
                                     [ys[i] for i in idx], params["ridge"])
    return {"treatment": fid, "columns": names, "arms": weights,
            "seed": params["seed"]}


def _predict_arm(w: list, row: list) -> float:
    s = w[0]
    for wj, x in zip(w[1:], row):
        s += wj * x
    return s


def _tl_predict_cf(params, state, ds: Dataset,
                   alternatives) -> CounterfactualOutput:
    alts = []
    for a in alternatives:
        if isinstance(a, bool) or a not in (0, 1):
            raise InvalidAlternative(f"alternative {a!r} is not an arm "
                                     "in {0, 1}")
        alts.append(a)
    alts.sort()
    _, rows = covariate_matrix(ds)
    outcomes = tuple(
        tuple(_predict_arm(state["arms"][str(a)], row) for row in rows)
        for a in alts)
    return CounterfactualOutput(ds.sample_ids, tuple(alts), outcomes)


register_plugin(EstimatorSpec(
    name="treatment.t_learner", category=Category.TREATMENT,
    schema=(Param("seed", "integer", 0),
            Param("ridge", "real", 1e-6, lo=0.0)),
    fit=_tl_fit, predict_counterfactuals=_tl_predict_cf,
    requirements=_tl_requirements))


# ---------------------------------------------------------------------------
# Metric
# ---------------------------------------------------------------------------

def pehe(estimate: EffectEstimate, truth) -> float:
    """Root mean squared error between estimated and true effects."""
    if isinstance(truth, EffectEstimate):
        if truth.sample_ids != estimate.sample_ids:
            raise AlignmentError("effect estimates cover different samples")
        truth = truth.values
    truth = list(truth)
    if len(truth) != len(estimate.values):
        raise AlignmentError(
            f"{len(estimate.values)} estimates vs {len(truth)} true effects")
    total = 0.0
    for tau_hat, tau in zip(estimate.values, truth):
        d = tau_hat - tau
        total += d * d
    return (total / len(truth)) ** 0.5


# ---------------------------------------------------------------------------
# Synthetic ground truth
# ---------------------------------------------------------------------------

def synth_treatment_data(n: int, seed: int, *, tau0=None, gamma=None,
                         noise: float = 0.0, dim: int = 2) -> SynthGroundTruth:
    """Generate Y = x.w + tau(x) * a + eps with the true effect recorded.

    Exactly one of `tau0` (constant effect) or `gamma` (linear effect
    tau(x) = gamma . x) must be given. Deterministic per seed: the draw
    order is w, then per sample x, coin a, and (only if noise > 0) one
    normal for eps.
    """
    if n < 4:
        raise InvalidSpec(f"need n >= 4 samples, got {n}")
    if noise < 0:
        raise InvalidSpec(f"noise must be >= 0, got {noise}")
    if dim < 1:
        raise InvalidSpec(f"dim must be >= 1, got {dim}")
    if (tau0 is None) == (gamma is None):
        raise InvalidSpec("give exactly one of tau0 or gamma")
    if gamma is not None:
        gamma = [float(g) for g in gamma]
        if len(gamma) != dim:
            raise InvalidSpec(f"gamma has {len(gamma)} entries for dim={dim}")
    rng = Lcg(seed)
    w = [rng.uniform_in(-1.0, 1.0) for _ in range(dim)]
    x_names = [f"x{k + 1}" for k in range(dim)]
    rows = []
    effects = []
    for i in range(n):
        sid = f"s{i:04d}"
        x = [rng.uniform_in(-1.0, 1.0) for _ in range(dim)]
        a = rng.coin()
        eps = noise * rng.normal() if noise > 0 else 0.0
        if tau0 is not None:
            tau = float(tau0)
        else:
            tau = 0.0
            for g, xv in zip(gamma, x):
                tau += g * xv
        f = 0.0
        for wk, xv in zip(w, x):
            f += wk * xv
        y = f + tau * a + eps
        for name, xv in zip(x_names, x):
            rows.append((sid, name, xv))
        rows.append((sid, "a", a))
        rows.append((sid, "y", y))
        effects.append(tau)
    kinds = {name: Continuous() for name in x_names}
    kinds["a"] = Integer()
    kinds["y"] = Continuous()
    static = build_static_samples(rows, kinds)
    roles = RoleMap.of(covariates=x_names, targets=("y",), treatments=("a",))
    ds = assemble_dataset(static=static, roles=roles)
    return SynthGroundTruth(ds, tuple(effects))
