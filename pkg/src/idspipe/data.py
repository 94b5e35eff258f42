"""NSL-KDD data handling: schema, parsing, label granularities, folds, sampling.

Feature indices are 1-based everywhere in this package (CLI flags, reports,
serialized subsets) so they line up with the standard 41-column NSL-KDD
connection-record layout.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Iterator, Mapping

import numpy as np

from .errors import ParseError, SamplingError, SchemaError, UnknownLabelError

CONTINUOUS = "continuous"
DISCRETE = "discrete"

ATTACK23 = "attack23"
CATEGORY5 = "category5"
GRANULARITIES = (ATTACK23, CATEGORY5)

NORMAL = "normal"
CATEGORIES = ("Dos", "Probe", "R2L", "U2R")

# The 41 NSL-KDD connection features in file order.
_NSLKDD_FEATURES = (
    ("duration", CONTINUOUS),
    ("protocol-type", DISCRETE),
    ("service", DISCRETE),
    ("flag", DISCRETE),
    ("src-bytes", CONTINUOUS),
    ("dst-bytes", CONTINUOUS),
    ("land", DISCRETE),
    ("wrong-fragment", CONTINUOUS),
    ("urgent", CONTINUOUS),
    ("hot", CONTINUOUS),
    ("num-failed-logins", CONTINUOUS),
    ("logged-in", DISCRETE),
    ("num-compromised", CONTINUOUS),
    ("root-shell", CONTINUOUS),
    ("su-attempted", CONTINUOUS),
    ("num-root", CONTINUOUS),
    ("num-file-creations", CONTINUOUS),
    ("num-shells", CONTINUOUS),
    ("num-access-files", CONTINUOUS),
    ("num-outbound-cmds", CONTINUOUS),
    ("is-host-login", DISCRETE),
    ("is-guest-login", DISCRETE),
    ("count", CONTINUOUS),
    ("srv-count", CONTINUOUS),
    ("serror-rate", CONTINUOUS),
    ("srv-serror-rate", CONTINUOUS),
    ("rerror-rate", CONTINUOUS),
    ("srv-rerror-rate", CONTINUOUS),
    ("same-srv-rate", CONTINUOUS),
    ("diff-srv-rate", CONTINUOUS),
    ("srv-diff-host-rate", CONTINUOUS),
    ("dst-host-count", CONTINUOUS),
    ("dst-host-srv-count", CONTINUOUS),
    ("dst-host-same-srv-rate", CONTINUOUS),
    ("dst-host-diff-srv-rate", CONTINUOUS),
    ("dst-host-same-src-port-rate", CONTINUOUS),
    ("dst-host-srv-diff-host-rate", CONTINUOUS),
    ("dst-host-serror-rate", CONTINUOUS),
    ("dst-host-srv-serror-rate", CONTINUOUS),
    ("dst-host-rerror-rate", CONTINUOUS),
    ("dst-host-srv-rerror-rate", CONTINUOUS),
)

# Attack type -> coarse category, covering the 22 attack types of the
# standard train split.
ATTACK_CATEGORY = {
    "back": "Dos",
    "land": "Dos",
    "neptune": "Dos",
    "pod": "Dos",
    "smurf": "Dos",
    "teardrop": "Dos",
    "ipsweep": "Probe",
    "nmap": "Probe",
    "portsweep": "Probe",
    "satan": "Probe",
    "ftp_write": "R2L",
    "guess_passwd": "R2L",
    "imap": "R2L",
    "multihop": "R2L",
    "phf": "R2L",
    "spy": "R2L",
    "warezclient": "R2L",
    "warezmaster": "R2L",
    "buffer_overflow": "U2R",
    "loadmodule": "U2R",
    "perl": "U2R",
    "rootkit": "U2R",
}

# Per-attack record counts of the reference 62,984-record evaluation sample
# (29,540 attack records; the remaining 33,444 are normal, i.e. 53%).
REFERENCE_ATTACK_COUNTS = {
    "back": 502,
    "buffer_overflow": 17,
    "ftp_write": 4,
    "guess_passwd": 27,
    "imap": 6,
    "ipsweep": 1814,
    "land": 6,
    "loadmodule": 3,
    "multihop": 5,
    "neptune": 20750,
    "nmap": 743,
    "perl": 1,
    "phf": 3,
    "pod": 87,
    "portsweep": 1489,
    "rootkit": 7,
    "satan": 1829,
    "smurf": 1327,
    "spy": 1,
    "teardrop": 437,
    "warezclient": 469,
    "warezmaster": 13,
}
REFERENCE_NORMAL_COUNT = 33444


def reference_sample_counts() -> dict[str, int]:
    """Label histogram of the reference evaluation sample (62,984 records)."""
    counts = dict(REFERENCE_ATTACK_COUNTS)
    counts[NORMAL] = REFERENCE_NORMAL_COUNT
    return counts


@dataclass(frozen=True)
class FeatureSchema:
    """Ordered (name, kind) pairs; kind is ``continuous`` or ``discrete``."""

    features: tuple[tuple[str, str], ...]

    def __post_init__(self):
        for name, kind in self.features:
            if kind not in (CONTINUOUS, DISCRETE):
                raise SchemaError(f"feature {name!r} has invalid kind {kind!r}")
        names = [name for name, _ in self.features]
        if len(set(names)) != len(names):
            raise SchemaError("duplicate feature names in schema")

    def __len__(self) -> int:
        return len(self.features)

    def name(self, index: int) -> str:
        """Feature name at a 1-based index."""
        return self.features[index - 1][0]

    def kind(self, index: int) -> str:
        return self.features[index - 1][1]

    @property
    def names(self) -> tuple[str, ...]:
        return tuple(name for name, _ in self.features)

    @property
    def continuous_indices(self) -> tuple[int, ...]:
        return tuple(i for i, (_, k) in enumerate(self.features, 1) if k == CONTINUOUS)

    @property
    def discrete_indices(self) -> tuple[int, ...]:
        return tuple(i for i, (_, k) in enumerate(self.features, 1) if k == DISCRETE)

    def all_discrete(self) -> "FeatureSchema":
        """Same feature names with every kind set to discrete."""
        return FeatureSchema(tuple((name, DISCRETE) for name, _ in self.features))

    def to_payload(self) -> list[list[str]]:
        return [[name, kind] for name, kind in self.features]

    @classmethod
    def from_payload(cls, payload) -> "FeatureSchema":
        return cls(tuple((str(n), str(k)) for n, k in payload))


NSLKDD_SCHEMA = FeatureSchema(_NSLKDD_FEATURES)


@dataclass(frozen=True)
class Record:
    """One connection record: 41 feature values, class label, instance weight."""

    values: tuple
    label: str
    weight: float = 1.0


@dataclass(eq=False)
class Dataset:
    """Column-major table of records against a fixed schema.

    Treat instances as immutable: operations return new datasets and may
    share column arrays with their inputs.
    """

    schema: FeatureSchema
    columns: tuple[np.ndarray, ...]
    labels: np.ndarray
    weights: np.ndarray
    granularity: str = ATTACK23

    def __post_init__(self):
        if self.granularity not in GRANULARITIES:
            raise ValueError(f"unknown granularity {self.granularity!r}")
        if len(self.columns) != len(self.schema):
            raise SchemaError(
                f"expected {len(self.schema)} columns, got {len(self.columns)}"
            )
        n = len(self.labels)
        for idx, col in enumerate(self.columns, 1):
            if len(col) != n:
                raise SchemaError(f"column {idx} length {len(col)} != {n} records")
            if self.schema.kind(idx) == CONTINUOUS and len(col):
                values = col if col.dtype.kind == "f" else col.astype(float)
                if not np.isfinite(values).all():
                    raise SchemaError(
                        f"feature {idx} has non-finite continuous values"
                    )
        if len(self.weights) != n:
            raise SchemaError("weights length does not match records")
        if len(self.weights) and (np.asarray(self.weights) < 0).any():
            raise ValueError("record weights must be non-negative")
        if self.granularity == CATEGORY5:
            allowed = set(CATEGORIES) | {NORMAL}
            bad = sorted(set(self.labels.tolist()) - allowed)
            if bad:
                raise UnknownLabelError(f"labels outside the 5-class set: {bad}")

    def __len__(self) -> int:
        return len(self.labels)

    def __eq__(self, other) -> bool:
        if not isinstance(other, Dataset):
            return NotImplemented
        return (
            self.schema == other.schema
            and self.granularity == other.granularity
            and len(self) == len(other)
            and np.array_equal(self.labels, other.labels)
            and np.allclose(self.weights, other.weights)
            and all(
                np.array_equal(a, b) for a, b in zip(self.columns, other.columns)
            )
        )

    def column(self, index: int) -> np.ndarray:
        """Column values for a 1-based feature index."""
        return self.columns[index - 1]

    def record(self, i: int) -> Record:
        return Record(
            values=tuple(col[i] for col in self.columns),
            label=str(self.labels[i]),
            weight=float(self.weights[i]),
        )

    def records(self) -> Iterator[Record]:
        for i in range(len(self)):
            yield self.record(i)

    def label_set(self) -> tuple[str, ...]:
        return tuple(sorted(set(self.labels.tolist())))

    def class_counts(self) -> dict[str, int]:
        values, counts = np.unique(self.labels, return_counts=True)
        return {str(v): int(c) for v, c in zip(values, counts)}

    def subset(self, row_indices) -> "Dataset":
        idx = np.asarray(row_indices, dtype=np.int64)
        return Dataset(
            schema=self.schema,
            columns=tuple(col[idx] for col in self.columns),
            labels=self.labels[idx],
            weights=self.weights[idx],
            granularity=self.granularity,
        )

    def project(self, feature_indices: Iterable[int]) -> "Dataset":
        """Keep only the given 1-based features (order preserved ascending)."""
        kept = sorted(set(int(i) for i in feature_indices))
        for i in kept:
            if not 1 <= i <= len(self.schema):
                raise SchemaError(f"feature index {i} outside schema")
        return Dataset(
            schema=FeatureSchema(tuple(self.schema.features[i - 1] for i in kept)),
            columns=tuple(self.columns[i - 1] for i in kept),
            labels=self.labels,
            weights=self.weights,
            granularity=self.granularity,
        )

    def with_weights(self, weights) -> "Dataset":
        w = np.asarray(weights, dtype=float)
        return Dataset(self.schema, self.columns, self.labels, w, self.granularity)

    @classmethod
    def from_records(
        cls, schema: FeatureSchema, records: Iterable[Record], granularity: str = ATTACK23
    ) -> "Dataset":
        records = list(records)
        columns = []
        for idx in range(1, len(schema) + 1):
            raw = [r.values[idx - 1] for r in records]
            if schema.kind(idx) == CONTINUOUS:
                columns.append(np.asarray(raw, dtype=float))
            else:
                columns.append(np.asarray(raw, dtype=object))
        return cls(
            schema=schema,
            columns=tuple(columns),
            labels=np.asarray([r.label for r in records], dtype=object),
            weights=np.asarray([r.weight for r in records], dtype=float),
            granularity=granularity,
        )


def parse_records(lines: Iterable[str], schema: FeatureSchema = NSLKDD_SCHEMA) -> Dataset:
    """Parse comma-separated records: 41 features, label, optional difficulty.

    The difficulty column (43rd field) is accepted and discarded. Unknown
    labels are kept verbatim; they are validated when mapping granularities.
    """
    nfeat = len(schema)
    cont = set(schema.continuous_indices)
    rows: list[list[str]] = []
    linenos: list[int] = []
    for lineno, line in enumerate(lines, 1):
        line = line.strip()
        if not line:
            continue
        fields = line.split(",")
        if len(fields) not in (nfeat + 1, nfeat + 2):
            raise ParseError(
                f"line {lineno}: expected {nfeat + 1} or {nfeat + 2} fields, "
                f"got {len(fields)}"
            )
        rows.append(fields[: nfeat + 1])
        linenos.append(lineno)
    if rows:
        transposed = list(zip(*rows))
        labels = np.asarray(transposed[nfeat], dtype=object)
    else:
        transposed = [() for _ in range(nfeat + 1)]
        labels = np.asarray([], dtype=object)
    columns = []
    for idx in range(1, nfeat + 1):
        raw = transposed[idx - 1]
        if idx in cont:
            try:
                col = np.asarray(raw, dtype=float)
            except ValueError:
                col = None
            if col is None or not np.isfinite(col).all():
                for row_pos, value in enumerate(raw):  # locate the bad field
                    try:
                        parsed = float(value)
                    except ValueError:
                        raise ParseError(
                            f"line {linenos[row_pos]}: feature {idx} "
                            f"({schema.name(idx)}) is not numeric: {value!r}"
                        ) from None
                    if not np.isfinite(parsed):
                        raise ParseError(
                            f"line {linenos[row_pos]}: feature {idx} "
                            f"is not finite: {value!r}"
                        )
            columns.append(col)
        else:
            columns.append(np.asarray(raw, dtype=object))
    return Dataset(
        schema=schema,
        columns=tuple(columns),
        labels=labels,
        weights=np.ones(len(labels), dtype=float),
        granularity=ATTACK23,
    )


def _format_value(value) -> str:
    if isinstance(value, (float, np.floating)):
        return repr(float(value))
    return str(value)


def serialize_records(ds: Dataset) -> Iterator[str]:
    """Emit one CSV line per record (42 fields; no difficulty column)."""
    for i in range(len(ds)):
        fields = [_format_value(col[i]) for col in ds.columns]
        fields.append(str(ds.labels[i]))
        yield ",".join(fields)


def read_dataset(path) -> Dataset:
    """Read a dataset CSV; honors a ``<path>.schema.json`` sidecar if present."""
    path = Path(path)
    sidecar = path.with_name(path.name + ".schema.json")
    schema = NSLKDD_SCHEMA
    granularity = ATTACK23
    if sidecar.exists():
        meta = json.loads(sidecar.read_text())
        schema = FeatureSchema.from_payload(meta["schema"])
        granularity = meta["granularity"]
    with open(path, "r", encoding="utf-8") as fh:
        ds = parse_records(fh, schema=schema)
    if granularity != ATTACK23:
        ds = Dataset(ds.schema, ds.columns, ds.labels, ds.weights, granularity)
    return ds


def write_dataset(ds: Dataset, path) -> None:
    """Write a dataset CSV plus a schema sidecar describing its columns."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", encoding="utf-8") as fh:
        for line in serialize_records(ds):
            fh.write(line + "\n")
    meta = {"granularity": ds.granularity, "schema": ds.schema.to_payload()}
    sidecar = path.with_name(path.name + ".schema.json")
    sidecar.write_text(json.dumps(meta, sort_keys=True, indent=2) + "\n")


def map_labels(ds: Dataset, target: str = CATEGORY5) -> Dataset:
    """Replace each attack label by its category; ``normal`` passes through."""
    if ds.granularity != ATTACK23 or target != CATEGORY5:
        raise ValueError(
            f"can only map {ATTACK23} -> {CATEGORY5}, "
            f"not {ds.granularity} -> {target}"
        )
    unknown = sorted(
        {
            str(lbl)
            for lbl in set(ds.labels.tolist())
            if lbl != NORMAL and lbl not in ATTACK_CATEGORY
        }
    )
    if unknown:
        raise UnknownLabelError(f"unknown attack labels: {', '.join(unknown)}")
    mapped = np.asarray(
        [lbl if lbl == NORMAL else ATTACK_CATEGORY[lbl] for lbl in ds.labels],
        dtype=object,
    )
    return Dataset(ds.schema, ds.columns, mapped, ds.weights, CATEGORY5)


@dataclass(frozen=True)
class FoldPlan:
    """Per-record fold assignment for k-fold cross-validation."""

    k: int
    assignments: np.ndarray = field(repr=False)

    def __post_init__(self):
        a = np.asarray(self.assignments)
        if len(a) and (a.min() < 0 or a.max() >= self.k):
            raise ValueError("fold assignments outside [0, k)")

    def __len__(self) -> int:
        return len(self.assignments)

    def test_indices(self, fold: int) -> np.ndarray:
        return np.flatnonzero(self.assignments == fold)

    def train_indices(self, fold: int) -> np.ndarray:
        return np.flatnonzero(self.assignments != fold)

    def to_payload(self) -> dict:
        return {"k": self.k, "assignments": [int(a) for a in self.assignments]}

    @classmethod
    def from_payload(cls, payload: Mapping) -> "FoldPlan":
        return cls(
            k=int(payload["k"]),
            assignments=np.asarray(payload["assignments"], dtype=np.int64),
        )


def stratified_folds(ds: Dataset, k: int, seed: int) -> FoldPlan:
    """Deterministic stratified fold assignment.

    Records of each class are shuffled and dealt cyclically, carrying the
    fold offset across classes, so per-class fold counts differ by at most
    one and overall fold sizes are balanced.
    """
    if k < 2:
        raise ValueError("fold count must be at least 2")
    if k > len(ds):
        raise ValueError(f"cannot split {len(ds)} records into {k} folds")
    rng = np.random.default_rng(seed)
    assignments = np.empty(len(ds), dtype=np.int64)
    offset = 0
    for label in sorted(set(ds.labels.tolist())):
        idx = np.flatnonzero(ds.labels == label)
        idx = idx[rng.permutation(len(idx))]
        for j, record_idx in enumerate(idx):
            assignments[record_idx] = (offset + j) % k
        offset += len(idx)
    return FoldPlan(k=k, assignments=assignments)


def match_distribution(
    ds: Dataset, target_counts: Mapping[str, int], seed: int
) -> Dataset:
    """Sample records without replacement to hit an exact label histogram.

    Deterministic per seed; labels missing from ``target_counts`` are
    excluded. Use :func:`sample_indices` to audit which rows were chosen.
    """
    return ds.subset(sample_indices(ds, target_counts, seed))


def sample_indices(
    ds: Dataset, target_counts: Mapping[str, int], seed: int
) -> np.ndarray:
    """Original row indices of the distribution-matched sample, ascending."""
    rng = np.random.default_rng(seed)
    chosen: list[np.ndarray] = []
    for label in sorted(target_counts):
        want = int(target_counts[label])
        if want < 0:
            raise SamplingError(f"negative target count for label {label!r}")
        idx = np.flatnonzero(ds.labels == label)
        if want > len(idx):
            raise SamplingError(
                f"label {label!r}: requested {want} records but only "
                f"{len(idx)} available (short by {want - len(idx)})"
            )
        if want:
            chosen.append(rng.choice(idx, size=want, replace=False))
    if not chosen:
        return np.asarray([], dtype=np.int64)
    return np.sort(np.concatenate(chosen)).astype(np.int64)
