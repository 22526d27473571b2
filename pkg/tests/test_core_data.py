"""Data model: value kinds, containers, builders, roles, operations."""

from __future__ import annotations

import math

import pytest

from datagen import random_dataset
from tempoframe.data import (
    MISSING,
    Categorical,
    Continuous,
    Dataset,
    Integer,
    Modality,
    Role,
    RoleMap,
    assemble_dataset,
    build_event_samples,
    build_static_samples,
    build_time_series_samples,
    check_value,
    covariate_matrix,
    is_missing,
    kind_from_json,
    kind_to_json,
    missing_mask,
    select_samples,
    temporal_summary,
    time_window,
)
from tempoframe.errors import (
    DuplicateCell,
    DuplicateEvent,
    DuplicateFeature,
    DuplicateTimePoint,
    EmptyDataset,
    InvalidWindow,
    KindMismatch,
    MissingInFeatures,
    NonNumericFeature,
    RequirementUnmet,
    RoleConflict,
    RoleGap,
    SampleIndexMismatch,
    UnknownSample,
)


# ---------------------------------------------------------------------------
# Missing sentinel and kinds
# ---------------------------------------------------------------------------

def test_missing_is_a_singleton():
    assert MISSING is type(MISSING)()
    assert is_missing(MISSING)
    assert not is_missing(None)
    assert not is_missing(0.0)


def test_check_value_canonical_forms():
    assert check_value(Continuous(), 3, "w") == 3.0
    assert isinstance(check_value(Continuous(), 3, "w"), float)
    assert check_value(Integer(), 7, "w") == 7
    assert check_value(Categorical(("a", "b")), "a", "w") == "a"
    assert check_value(Continuous(), MISSING, "w") is MISSING


@pytest.mark.parametrize("kind,value", [
    (Continuous(), "x"),
    (Continuous(), True),
    (Continuous(), float("nan")),
    (Continuous(), float("inf")),
    (Integer(), 1.5),
    (Integer(), True),
    (Categorical(("a", "b")), "c"),
    (Categorical(("a", "b")), 1),
])
def test_check_value_rejections(kind, value):
    with pytest.raises(KindMismatch):
        check_value(kind, value, "w")


def test_categorical_requires_unique_nonempty_categories():
    with pytest.raises(KindMismatch):
        Categorical(())
    with pytest.raises(KindMismatch):
        Categorical(("a", "a"))
    with pytest.raises(KindMismatch):
        Categorical(("a", ""))


def test_kind_json_round_trip():
    for kind in (Continuous(), Integer(), Categorical(("x", "y", "z"))):
        assert kind_from_json(kind_to_json(kind), "w") == kind
    with pytest.raises(KindMismatch):
        kind_from_json({"kind": "tensor"}, "w")


# ---------------------------------------------------------------------------
# Builders
# ---------------------------------------------------------------------------

def test_static_builder_orders_and_grids():
    s = build_static_samples(
        [("b", "f2", 1.0), ("a", "f1", 2.0), ("b", "f1", 3.0)],
        {"f1": Continuous(), "f2": Continuous(), "f3": Integer()})
    assert s.sample_ids == ("b", "a")
    assert s.feature_ids == ("f2", "f1", "f3")
    assert s.cell("a", "f2") is MISSING
    assert s.cell("a", "f3") is MISSING
    assert s.cell("b", "f1") == 3.0


def test_static_builder_duplicate_cell():
    with pytest.raises(DuplicateCell):
        build_static_samples([("a", "f", 1.0), ("a", "f", 2.0)],
                             {"f": Continuous()})


def test_static_builder_undeclared_feature():
    with pytest.raises(KindMismatch):
        build_static_samples([("a", "g", 1.0)], {"f": Continuous()})


def test_explicit_sample_ids_keep_all_missing_samples():
    s = build_static_samples([("a", "f", 1.0)], {"f": Continuous()},
                             sample_ids=["a", "ghost"])
    assert s.sample_ids == ("a", "ghost")
    assert s.cell("ghost", "f") is MISSING
    with pytest.raises(UnknownSample):
        build_static_samples([("a", "f", 1.0)], {"f": Continuous()},
                             sample_ids=["ghost"])
    with pytest.raises(SampleIndexMismatch):
        build_static_samples([], {"f": Continuous()},
                             sample_ids=["a", "a"])


def test_time_series_builder_sorts_and_preserves_irregularity():
    ts = build_time_series_samples(
        [("a", "f", 3.0, 30.0), ("a", "f", 1.0, 10.0), ("a", "g", 0.5, 1.0),
         ("b", "f", 2.0, 20.0)],
        {"f": Continuous(), "g": Continuous()})
    assert ts.sequence("a", "f") == ((1.0, 10.0), (3.0, 30.0))
    assert ts.sequence("a", "g") == ((0.5, 1.0),)
    assert ts.sequence("b", "g") == ()
    times = [t for t, _ in ts.sequence("a", "f")]
    assert times == sorted(times)


def test_time_series_builder_duplicate_time():
    with pytest.raises(DuplicateTimePoint):
        build_time_series_samples(
            [("a", "f", 1.0, 1.0), ("a", "f", 1.0, 2.0)],
            {"f": Continuous()})


def test_time_series_rejects_bad_times():
    with pytest.raises(KindMismatch):
        build_time_series_samples([("a", "f", float("nan"), 1.0)],
                                  {"f": Continuous()})


def test_event_builder_censoring_and_duplicates():
    ev = build_event_samples(
        [("a", "death", 3.0, 1), ("b", "death", 5.0, MISSING)],
        {"death": Integer()})
    assert ev.entry("a", "death") == (3.0, 1)
    t, v = ev.entry("b", "death")
    assert t == 5.0 and v is MISSING
    with pytest.raises(DuplicateEvent):
        build_event_samples(
            [("a", "death", 3.0, 1), ("a", "death", 4.0, 1)],
            {"death": Integer()})


def test_builder_round_trip_on_random_datasets():
    for seed in range(25):
        ds = random_dataset(seed)
        ids = list(ds.sample_ids)
        if ds.static is not None:
            rebuilt = build_static_samples(
                ds.static.to_rows(), dict(ds.static.features),
                sample_ids=ids)
            assert rebuilt == ds.static
        rebuilt = build_time_series_samples(
            ds.temporal.to_points(), dict(ds.temporal.features),
            sample_ids=ids)
        assert rebuilt == ds.temporal
        if ds.events is not None:
            rebuilt = build_event_samples(
                ds.events.to_entries(), dict(ds.events.features),
                sample_ids=ids)
            assert rebuilt == ds.events


# ---------------------------------------------------------------------------
# Roles and datasets
# ---------------------------------------------------------------------------

def _toy_dataset():
    static = build_static_samples(
        [("a", "x", 1.0), ("b", "x", 2.0), ("a", "y", 0), ("b", "y", 1)],
        {"x": Continuous(), "y": Integer()})
    return assemble_dataset(
        static=static, roles=RoleMap.of(covariates=("x",), targets=("y",)))


def test_role_map_is_exhaustive_and_disjoint():
    ds = _toy_dataset()
    assert ds.roles.role_of("x") is Role.COVARIATE
    with pytest.raises(RoleConflict):
        RoleMap.of(covariates=("x",), targets=("x",))
    static = build_static_samples([("a", "x", 1.0)], {"x": Continuous()})
    with pytest.raises(RoleGap):
        assemble_dataset(static=static, roles=RoleMap.of())
    with pytest.raises(RoleConflict):
        assemble_dataset(static=static,
                         roles=RoleMap.of(covariates=("x", "phantom")))


def test_dataset_needs_a_covariate():
    static = build_static_samples([("a", "x", 1.0)], {"x": Continuous()})
    with pytest.raises(RoleGap):
        assemble_dataset(static=static, roles=RoleMap.of(targets=("x",)))


def test_dataset_rejects_feature_id_reuse_across_containers():
    static = build_static_samples([("a", "x", 1.0)], {"x": Continuous()})
    temporal = build_time_series_samples([("a", "x", 0.0, 1.0)],
                                         {"x": Continuous()})
    with pytest.raises(DuplicateFeature):
        assemble_dataset(static=static, temporal=temporal,
                         roles=RoleMap.of(covariates=("x",)))


def test_dataset_rejects_sample_index_disagreement():
    static = build_static_samples([("a", "x", 1.0)], {"x": Continuous()})
    temporal = build_time_series_samples([("b", "t", 0.0, 1.0)],
                                         {"t": Continuous()})
    with pytest.raises(SampleIndexMismatch):
        assemble_dataset(static=static, temporal=temporal,
                         roles=RoleMap.of(covariates=("x", "t")))


def test_empty_dataset_rejected():
    with pytest.raises(EmptyDataset):
        assemble_dataset(roles=RoleMap.of())


def test_all_features_container_order():
    ds = random_dataset(3)
    fids = [fid for fid, _, _, _ in ds.all_features()]
    expected = []
    for container in (ds.static, ds.temporal, ds.events):
        if container is not None:
            expected.extend(container.feature_ids)
    assert fids == expected


# ---------------------------------------------------------------------------
# Operations
# ---------------------------------------------------------------------------

def test_select_samples_reorders_every_container():
    ds = random_dataset(11)
    ids = list(ds.sample_ids)
    picked = [ids[-1], ids[0]]
    sub = select_samples(ds, picked)
    assert sub.sample_ids == tuple(picked)
    for fid, _, _, modality in sub.all_features():
        if modality is Modality.STATIC:
            for sid in picked:
                assert sub.static.cell(sid, fid) == ds.static.cell(sid, fid) \
                    or (sub.static.cell(sid, fid) is MISSING
                        and ds.static.cell(sid, fid) is MISSING)
        elif modality is Modality.TEMPORAL:
            for sid in picked:
                assert sub.temporal.sequence(sid, fid) == \
                    ds.temporal.sequence(sid, fid)
        else:
            for sid in picked:
                assert sub.events.entry(sid, fid) == ds.events.entry(sid, fid)
    with pytest.raises(UnknownSample):
        select_samples(ds, ["nope"])
    with pytest.raises(SampleIndexMismatch):
        select_samples(ds, [ids[0], ids[0]])


def test_time_window_brackets_inclusive():
    ts = build_time_series_samples(
        [("a", "f", 0.0, 1.0), ("a", "f", 1.0, 2.0), ("a", "f", 2.0, 3.0)],
        {"f": Continuous()})
    w = time_window(ts, 1.0, 2.0)
    assert w.sequence("a", "f") == ((1.0, 2.0), (2.0, 3.0))
    assert time_window(ts, 5.0, 6.0).sequence("a", "f") == ()
    with pytest.raises(InvalidWindow):
        time_window(ts, 2.0, 1.0)


def test_missing_mask_congruence():
    ds = random_dataset(17)
    if ds.static is not None:
        mask = missing_mask(ds.static)
        for i, row in enumerate(ds.static.values):
            for j, v in enumerate(row):
                assert mask[i][j] == (v is MISSING)
    mask = missing_mask(ds.temporal)
    for i, per_sample in enumerate(ds.temporal.series):
        for j, seq in enumerate(per_sample):
            assert len(mask[i][j]) == len(seq)
            for flag, (_, v) in zip(mask[i][j], seq):
                assert flag == (v is MISSING)
    if ds.events is not None:
        mask = missing_mask(ds.events)
        for i, per_sample in enumerate(ds.events.entries):
            for j, e in enumerate(per_sample):
                if e is None:
                    assert mask[i][j] is None
                else:
                    assert mask[i][j] == (e[1] is MISSING)


# ---------------------------------------------------------------------------
# temporal_summary and covariate_matrix
# ---------------------------------------------------------------------------

def test_temporal_summary_stats():
    ts = build_time_series_samples(
        [("a", "f", 0.0, 1.0), ("a", "f", 1.0, 3.0), ("a", "f", 2.0, 2.0)],
        {"f": Continuous()})
    s = temporal_summary(ts)
    assert s.feature_ids == ("f.last", "f.mean", "f.min", "f.max", "f.slope")
    assert s.cell("a", "f.last") == 2.0
    assert s.cell("a", "f.mean") == 2.0
    assert s.cell("a", "f.min") == 1.0
    assert s.cell("a", "f.max") == 3.0
    assert abs(s.cell("a", "f.slope") - 0.5) < 1e-12


def test_temporal_summary_sparse_sequences():
    ts = build_time_series_samples(
        [("a", "f", 0.0, 5.0), ("b", "g", 0.0, 1.0)],
        {"f": Continuous(), "g": Continuous()})
    s = temporal_summary(ts)
    # one point: slope undefined, other stats defined
    assert s.cell("a", "f.mean") == 5.0
    assert s.cell("a", "f.slope") is MISSING
    # zero points: everything undefined
    assert s.cell("b", "f.last") is MISSING
    assert s.cell("b", "f.slope") is MISSING


def test_temporal_summary_slope_translation_invariance():
    pts = [(0.0, 1.0), (1.5, 4.0), (3.0, 2.0), (4.5, 8.0)]
    base = build_time_series_samples(
        [("a", "f", t, v) for t, v in pts], {"f": Continuous()})
    shifted = build_time_series_samples(
        [("a", "f", t + 100.0, v) for t, v in pts], {"f": Continuous()})
    s0 = temporal_summary(base).cell("a", "f.slope")
    s1 = temporal_summary(shifted).cell("a", "f.slope")
    assert math.isclose(s0, s1, rel_tol=1e-9)


def test_temporal_summary_rejects_categorical():
    ts = build_time_series_samples(
        [("a", "f", 0.0, "alpha")], {"f": Categorical(("alpha", "beta"))})
    with pytest.raises(NonNumericFeature):
        temporal_summary(ts)


def test_covariate_matrix_layout_and_errors():
    static = build_static_samples(
        [("a", "x", 1.0), ("b", "x", 2.0), ("a", "y", 0), ("b", "y", 1)],
        {"x": Continuous(), "y": Integer()})
    temporal = build_time_series_samples(
        [("a", "hr", 0.0, 60.0), ("a", "hr", 1.0, 62.0),
         ("b", "hr", 0.0, 70.0), ("b", "hr", 2.0, 74.0)],
        {"hr": Continuous()})
    ds = assemble_dataset(
        static=static, temporal=temporal,
        roles=RoleMap.of(covariates=("x", "hr"), targets=("y",)))
    names, rows = covariate_matrix(ds)
    assert names == ["x", "hr.last", "hr.mean", "hr.min", "hr.max",
                     "hr.slope"]
    assert rows[0][0] == 1.0 and rows[1][0] == 2.0
    assert rows[0][1] == 62.0  # hr.last for sample a

    sparse = build_static_samples(
        [("a", "x", 1.0)], {"x": Continuous()}, sample_ids=["a", "b"])
    ds2 = assemble_dataset(static=sparse, roles=RoleMap.of(covariates=("x",)))
    with pytest.raises(MissingInFeatures):
        covariate_matrix(ds2)

    cat = build_static_samples([("a", "c", "alpha")],
                               {"c": Categorical(("alpha", "beta"))})
    ds3 = assemble_dataset(static=cat, roles=RoleMap.of(covariates=("c",)))
    with pytest.raises(RequirementUnmet) as err:
        covariate_matrix(ds3)
    assert err.value.reason == "non_numeric_feature"


def test_containers_are_immutable():
    ds = _toy_dataset()
    with pytest.raises(AttributeError):
        ds.static.values = ()
    with pytest.raises(AttributeError):
        ds.roles.assignment = ()
    assert isinstance(ds, Dataset)
