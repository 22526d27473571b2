"""Bundle file format: a `manifest` JSON file plus one long-format CSV per
modality.

Layout:
    manifest                     JSON: schema_version, samples, files,
                                 features, kinds, roles
    static.csv                   sample_id,feature_id,value
    temporal.csv / events.csv    sample_id,feature_id,time,value

Empty value field = Missing. Writing is deterministic: fixed field order,
shortest round-trip float formatting, UTF-8, LF line endings, so identical
datasets produce byte-identical bundles.
"""

from __future__ import annotations

import csv
import json
import math
import os
from dataclasses import dataclass

from tempoframe.data import (
    Categorical,
    Continuous,
    Dataset,
    Integer,
    MISSING,
    Modality,
    Role,
    RoleMap,
    ValueKind,
    build_event_samples,
    build_static_samples,
    build_time_series_samples,
    assemble_dataset,
    kind_from_json,
    kind_to_json,
)
from tempoframe.errors import (
    IoError,
    KindMismatch,
    ManifestError,
    ParseError,
    TempoframeError,
)

SCHEMA_VERSION = "1"
MANIFEST_NAME = "manifest"

_FILE_NAMES = {
    Modality.STATIC: "static.csv",
    Modality.TEMPORAL: "temporal.csv",
    Modality.EVENT: "events.csv",
}
_STATIC_HEADER = ["sample_id", "feature_id", "value"]
_TIMED_HEADER = ["sample_id", "feature_id", "time", "value"]


@dataclass(frozen=True)
class BundleManifest:
    schema_version: str
    samples: tuple[str, ...]
    files: dict           # modality name -> relative path
    features: dict        # modality name -> ordered feature id list
    kinds: dict           # feature_id -> ValueKind
    roles: dict           # feature_id -> role name


@dataclass(frozen=True)
class Violation:
    row: int
    code: str
    detail: str


# ---------------------------------------------------------------------------
# Serialization helpers
# ---------------------------------------------------------------------------

def _manifest_kind(d, where: str) -> ValueKind:
    try:
        return kind_from_json(d, where)
    except KindMismatch as e:
        raise ManifestError(str(e)) from None


def _value_to_str(v) -> str:
    if v is MISSING:
        return ""
    if isinstance(v, float):
        return repr(v)
    if isinstance(v, int):
        return str(v)
    return v


def _parse_value(kind: ValueKind, s: str, where: str):
    if s == "":
        return MISSING
    if isinstance(kind, Continuous):
        try:
            v = float(s)
        except ValueError:
            raise KindMismatch(f"{where}: {s!r} is not a real number") from None
        if not math.isfinite(v):
            raise KindMismatch(f"{where}: non-finite value {s!r}")
        return v
    if isinstance(kind, Integer):
        try:
            return int(s, 10)
        except ValueError:
            raise KindMismatch(f"{where}: {s!r} is not an integer") from None
    if s in kind.categories:
        return s
    raise KindMismatch(f"{where}: {s!r} not in categories "
                       f"{list(kind.categories)}")


def _parse_time(s: str, where: str) -> float:
    try:
        t = float(s)
    except ValueError:
        raise ParseError(f"{where}: time {s!r} is not decimal") from None
    if not math.isfinite(t):
        raise ParseError(f"{where}: time {s!r} is not finite")
    return t


# ---------------------------------------------------------------------------
# Writing
# ---------------------------------------------------------------------------

def manifest_for(ds: Dataset) -> BundleManifest:
    files = {}
    features = {}
    for modality, container in ds.containers():
        files[modality.value] = _FILE_NAMES[modality]
        features[modality.value] = list(container.feature_ids)
    kinds = {}
    roles = {}
    for fid, kind, role, _ in ds.all_features():
        kinds[fid] = kind
        roles[fid] = role.value
    return BundleManifest(SCHEMA_VERSION, tuple(ds.sample_ids), files,
                          features, kinds, roles)


def _manifest_json(m: BundleManifest) -> str:
    doc = {
        "schema_version": m.schema_version,
        "samples": list(m.samples),
        "files": m.files,
        "features": m.features,
        "kinds": {fid: kind_to_json(k) for fid, k in m.kinds.items()},
        "roles": m.roles,
    }
    return json.dumps(doc, indent=2, ensure_ascii=False) + "\n"


def write_bundle(ds: Dataset, dir_path) -> BundleManifest:
    """Write manifest plus one CSV per present modality; deterministic."""
    manifest = manifest_for(ds)
    try:
        os.makedirs(dir_path, exist_ok=True)
        with open(os.path.join(dir_path, MANIFEST_NAME), "w",
                  encoding="utf-8", newline="\n") as f:
            f.write(_manifest_json(manifest))
        if ds.static is not None:
            with open(os.path.join(dir_path, _FILE_NAMES[Modality.STATIC]),
                      "w", encoding="utf-8", newline="") as f:
                w = csv.writer(f, lineterminator="\n")
                w.writerow(_STATIC_HEADER)
                for sid, fid, v in ds.static.to_rows():
                    w.writerow([sid, fid, _value_to_str(v)])
        if ds.temporal is not None:
            with open(os.path.join(dir_path, _FILE_NAMES[Modality.TEMPORAL]),
                      "w", encoding="utf-8", newline="") as f:
                w = csv.writer(f, lineterminator="\n")
                w.writerow(_TIMED_HEADER)
                for sid, fid, t, v in ds.temporal.to_points():
                    w.writerow([sid, fid, repr(t), _value_to_str(v)])
        if ds.events is not None:
            with open(os.path.join(dir_path, _FILE_NAMES[Modality.EVENT]),
                      "w", encoding="utf-8", newline="") as f:
                w = csv.writer(f, lineterminator="\n")
                w.writerow(_TIMED_HEADER)
                for sid, fid, t, v in ds.events.to_entries():
                    w.writerow([sid, fid, repr(t), _value_to_str(v)])
    except OSError as e:
        raise IoError(f"cannot write bundle at {dir_path}: {e}") from e
    return manifest


# ---------------------------------------------------------------------------
# Reading
# ---------------------------------------------------------------------------

def _load_manifest(manifest_path) -> BundleManifest:
    if not os.path.exists(manifest_path):
        raise ManifestError(f"no manifest at {manifest_path}")
    try:
        with open(manifest_path, encoding="utf-8") as f:
            raw = f.read()
    except OSError as e:
        raise IoError(f"cannot read {manifest_path}: {e}") from e
    try:
        doc = json.loads(raw)
    except ValueError as e:
        raise ManifestError(f"{manifest_path}: not valid JSON: {e}") from None
    if not isinstance(doc, dict):
        raise ManifestError(f"{manifest_path}: manifest must be an object")
    for key in ("schema_version", "samples", "files", "features", "kinds",
                "roles"):
        if key not in doc:
            raise ManifestError(f"{manifest_path}: missing key {key!r}")
    if doc["schema_version"] != SCHEMA_VERSION:
        raise ManifestError(
            f"{manifest_path}: unsupported schema_version "
            f"{doc['schema_version']!r} (expected {SCHEMA_VERSION!r})")
    samples = doc["samples"]
    if not isinstance(samples, list) or \
            not all(isinstance(s, str) for s in samples):
        raise ManifestError(f"{manifest_path}: samples must be a string list")
    files = doc["files"]
    features = doc["features"]
    if not isinstance(files, dict) or not isinstance(features, dict):
        raise ManifestError(f"{manifest_path}: files/features must be objects")
    for modality in files:
        if modality not in ("static", "temporal", "event"):
            raise ManifestError(
                f"{manifest_path}: unknown modality {modality!r}")
        if modality not in features:
            raise ManifestError(
                f"{manifest_path}: no feature list for {modality!r}")
    kinds = {fid: _manifest_kind(d, f"{manifest_path}: kinds[{fid!r}]")
             for fid, d in doc["kinds"].items()}
    roles = doc["roles"]
    if not isinstance(roles, dict):
        raise ManifestError(f"{manifest_path}: roles must be an object")
    for fid, role in roles.items():
        if role not in ("covariate", "target", "treatment"):
            raise ManifestError(
                f"{manifest_path}: unknown role {role!r} for {fid!r}")
    for modality, fids in features.items():
        for fid in fids:
            if fid not in kinds:
                raise ManifestError(f"{manifest_path}: feature {fid!r} has "
                                    "no kind")
            if fid not in roles:
                raise ManifestError(f"{manifest_path}: feature {fid!r} has "
                                    "no role")
    return BundleManifest(doc["schema_version"], tuple(samples), files,
                          features, kinds, roles)


def _read_table(path, header: list) -> list:
    if not os.path.exists(path):
        raise ManifestError(f"listed file does not exist: {path}")
    try:
        with open(path, encoding="utf-8", newline="") as f:
            reader = csv.reader(f)
            rows = list(reader)
    except OSError as e:
        raise IoError(f"cannot read {path}: {e}") from e
    if not rows:
        raise ParseError(f"{path}: missing header row")
    if rows[0] != header:
        raise ParseError(f"{path}: bad header {rows[0]!r}, "
                         f"expected {header!r}")
    return rows[1:]


def _typed_static_rows(path, raw_rows, kinds):
    out = []
    for i, row in enumerate(raw_rows):
        line = i + 2
        if len(row) != 3:
            raise ParseError(f"{path}:{line}: expected 3 fields, "
                             f"got {len(row)}")
        sid, fid, value = row
        if fid not in kinds:
            raise KindMismatch(f"{path}:{line}: feature {fid!r} has no "
                               "declared kind")
        out.append((sid, fid, _parse_value(kinds[fid], value,
                                           f"{path}:{line}")))
    return out


def _typed_timed_rows(path, raw_rows, kinds):
    out = []
    for i, row in enumerate(raw_rows):
        line = i + 2
        if len(row) != 4:
            raise ParseError(f"{path}:{line}: expected 4 fields, "
                             f"got {len(row)}")
        sid, fid, time_s, value = row
        if time_s == "":
            raise ParseError(f"{path}:{line}: empty time field")
        if fid not in kinds:
            raise KindMismatch(f"{path}:{line}: feature {fid!r} has no "
                               "declared kind")
        t = _parse_time(time_s, f"{path}:{line}")
        out.append((sid, fid, t, _parse_value(kinds[fid], value,
                                              f"{path}:{line}")))
    return out


def read_bundle(manifest_path) -> Dataset:
    """Load and validate a bundle; core_data builder errors carry the
    offending file in their message."""
    manifest = _load_manifest(manifest_path)
    base = os.path.dirname(os.path.abspath(manifest_path))
    samples = list(manifest.samples)

    def modality_kinds(name):
        return {fid: manifest.kinds[fid] for fid in manifest.features[name]}

    static = temporal = events = None
    if "static" in manifest.files:
        path = os.path.join(base, manifest.files["static"])
        kinds = modality_kinds("static")
        rows = _typed_static_rows(path, _read_table(path, _STATIC_HEADER),
                                  kinds)
        try:
            static = build_static_samples(rows, kinds, sample_ids=samples)
        except TempoframeError as e:
            raise type(e)(f"{path}: {e}") from None
    if "temporal" in manifest.files:
        path = os.path.join(base, manifest.files["temporal"])
        kinds = modality_kinds("temporal")
        points = _typed_timed_rows(path, _read_table(path, _TIMED_HEADER),
                                   kinds)
        try:
            temporal = build_time_series_samples(points, kinds,
                                                 sample_ids=samples)
        except TempoframeError as e:
            raise type(e)(f"{path}: {e}") from None
    if "event" in manifest.files:
        path = os.path.join(base, manifest.files["event"])
        kinds = modality_kinds("event")
        entries = _typed_timed_rows(path, _read_table(path, _TIMED_HEADER),
                                    kinds)
        try:
            events = build_event_samples(entries, kinds, sample_ids=samples)
        except TempoframeError as e:
            raise type(e)(f"{path}: {e}") from None
    role_map = RoleMap(tuple(
        (fid, Role(name)) for fid, name in manifest.roles.items()))
    try:
        return assemble_dataset(static=static, temporal=temporal,
                                events=events, roles=role_map)
    except TempoframeError as e:
        raise type(e)(f"{manifest_path}: {e}") from None


# ---------------------------------------------------------------------------
# Validation (non-fail-fast)
# ---------------------------------------------------------------------------

def validate_long_table(rows, expected_modality, kinds: dict) -> list:
    """Collect every violation in a parsed table; empty list iff the
    corresponding builder call would succeed.

    `rows` are data rows (header excluded) as lists of strings; row numbers
    in violations are 1-based positions in `rows`.
    """
    timed = expected_modality in (Modality.TEMPORAL, Modality.EVENT)
    arity = 4 if timed else 3
    out = []
    seen = set()
    for i, row in enumerate(rows):
        rownum = i + 1
        if len(row) != arity:
            out.append(Violation(rownum, "arity",
                                 f"expected {arity} fields, got {len(row)}"))
            continue
        if timed:
            sid, fid, time_s, value = row
        else:
            sid, fid, value = row
            time_s = None
        if fid not in kinds:
            out.append(Violation(rownum, "unknown_feature",
                                 f"feature {fid!r} has no declared kind"))
            continue
        t = None
        if timed:
            if time_s == "":
                out.append(Violation(rownum, "missing_time",
                                     "empty time field"))
                continue
            try:
                t = _parse_time(time_s, "time")
            except ParseError:
                out.append(Violation(rownum, "bad_time",
                                     f"time {time_s!r} is not decimal"))
                continue
        try:
            _parse_value(kinds[fid], value, "value")
        except KindMismatch as e:
            out.append(Violation(rownum, "kind_mismatch", str(e)))
            continue
        if expected_modality is Modality.STATIC:
            key = (sid, fid)
            if key in seen:
                out.append(Violation(rownum, "duplicate_cell",
                                     f"duplicate cell ({sid!r}, {fid!r})"))
                continue
        elif expected_modality is Modality.TEMPORAL:
            key = (sid, fid, t)
            if key in seen:
                out.append(Violation(
                    rownum, "duplicate_time",
                    f"duplicate time {t} for ({sid!r}, {fid!r})"))
                continue
        else:
            key = (sid, fid)
            if key in seen:
                out.append(Violation(rownum, "duplicate_event",
                                     f"duplicate event ({sid!r}, {fid!r})"))
                continue
        seen.add(key)
    return out


def validate_bundle(manifest_path) -> list:
    """Validate all tables of a bundle; returns (file, Violation) pairs."""
    manifest = _load_manifest(manifest_path)
    base = os.path.dirname(os.path.abspath(manifest_path))
    out = []
    for modality_name, modality in (("static", Modality.STATIC),
                                    ("temporal", Modality.TEMPORAL),
                                    ("event", Modality.EVENT)):
        if modality_name not in manifest.files:
            continue
        path = os.path.join(base, manifest.files[modality_name])
        header = _STATIC_HEADER if modality is Modality.STATIC \
            else _TIMED_HEADER
        raw = _read_table(path, header)
        kinds = {fid: manifest.kinds[fid]
                 for fid in manifest.features[modality_name]}
        for v in validate_long_table(raw, modality, kinds):
            out.append((manifest.files[modality_name], v))
    return out
