"""Supervised entropy-minimization discretization with an MDL stopping rule.

Continuous features are split recursively at class-boundary midpoints; a
split is kept only when its information gain beats the minimum-description-
length cost of encoding it. Fitted cut points map values into bins with the
left-closed convention ``cuts[i-1] <= v < cuts[i]`` (bin 0 below the first
cut), so out-of-range values land in the first or last bin.
"""

from __future__ import annotations

import json
import math
from bisect import bisect_right
from dataclasses import dataclass
from typing import Mapping

import numpy as np

from .data import Dataset, FeatureSchema
from .errors import SchemaError

CANDIDATE_MODES = ("boundary", "all")


def entropy(class_counts) -> float:
    """Shannon entropy in bits of a count distribution.

    Accepts a mapping label -> count or an array of counts; counts may be
    fractional (instance weights). Raises on an all-zero distribution.
    """
    if isinstance(class_counts, Mapping):
        counts = np.asarray(list(class_counts.values()), dtype=float)
    else:
        counts = np.asarray(class_counts, dtype=float)
    if counts.size and (counts < 0).any():
        raise ValueError("negative class counts")
    total = counts.sum()
    if not counts.size or total <= 0:
        raise ValueError("entropy undefined for an all-zero count distribution")
    p = counts[counts > 0] / total
    p = p[p > 0]  # counts tiny enough to underflow contribute nothing
    return float(-(p * np.log2(p)).sum())


def _row_entropies(counts: np.ndarray) -> np.ndarray:
    """Entropy of each row of a (rows, classes) count matrix; empty rows -> 0."""
    totals = counts.sum(axis=1, keepdims=True)
    safe = np.where(totals > 0, totals, 1.0)
    p = counts / safe
    terms = np.where(counts > 0, p * np.log2(np.where(counts > 0, p, 1.0)), 0.0)
    return -terms.sum(axis=1)


def mdlp_cuts(values, labels, candidates: str = "boundary") -> list[float]:
    """Recursive binary MDL splitting of one continuous feature.

    Candidate thresholds are midpoints between adjacent distinct values; in
    ``boundary`` mode (default, equivalent result) only midpoints whose
    neighborhoods contain differing class labels are examined. Ties between
    equal-entropy candidates break toward the smallest threshold. Returns
    accepted thresholds in ascending order.
    """
    if candidates not in CANDIDATE_MODES:
        raise ValueError(f"candidates must be one of {CANDIDATE_MODES}")
    values = np.asarray(values, dtype=float)
    labels = np.asarray(labels)
    if values.shape[0] != labels.shape[0]:
        raise ValueError("values and labels must have the same length")
    if values.size == 0:
        return []
    _, y = np.unique(labels, return_inverse=True)
    n_classes = int(y.max()) + 1

    order = np.argsort(values, kind="stable")
    v_sorted = values[order]
    y_sorted = y[order]

    # Collapse to distinct-value groups with per-group class counts.
    group_starts = np.flatnonzero(np.concatenate(([True], np.diff(v_sorted) > 0)))
    group_values = v_sorted[group_starts]
    group_id = np.cumsum(np.concatenate(([0], (np.diff(v_sorted) > 0).astype(int))))
    group_counts = np.zeros((len(group_values), n_classes), dtype=float)
    np.add.at(group_counts, (group_id, y_sorted), 1.0)

    group_pure = (group_counts > 0).sum(axis=1) == 1
    group_class = group_counts.argmax(axis=1)

    cuts: list[float] = []
    stack = [(0, len(group_values))]
    while stack:
        lo, hi = stack.pop()
        if hi - lo < 2:
            continue
        block = group_counts[lo:hi]
        total = block.sum(axis=0)
        n = total.sum()
        # Candidate cut after group position p (between p and p+1).
        if candidates == "boundary":
            same_pure = (
                group_pure[lo : hi - 1]
                & group_pure[lo + 1 : hi]
                & (group_class[lo : hi - 1] == group_class[lo + 1 : hi])
            )
            mask = ~same_pure
        else:
            mask = np.ones(hi - lo - 1, dtype=bool)
        if not mask.any():
            continue

        left = np.cumsum(block, axis=0)[:-1]
        right = total[None, :] - left
        n_left = left.sum(axis=1)
        n_right = n - n_left
        h_left = _row_entropies(left)
        h_right = _row_entropies(right)
        child_entropy = (n_left * h_left + n_right * h_right) / n

        cand = np.flatnonzero(mask)
        best = cand[np.argmin(child_entropy[cand])]

        h_parent = entropy(total)
        gain = h_parent - child_entropy[best]
        k = int((total > 0).sum())
        k1 = int((left[best] > 0).sum())
        k2 = int((right[best] > 0).sum())
        delta = math.log2(3**k - 2) - (
            k * h_parent - k1 * h_left[best] - k2 * h_right[best]
        )
        if gain <= (math.log2(n - 1) + delta) / n:
            continue

        cuts.append(float((group_values[lo + best] + group_values[lo + best + 1]) / 2))
        stack.append((lo, lo + best + 1))
        stack.append((lo + best + 1, hi))
    return sorted(cuts)


@dataclass(frozen=True)
class CutPointList:
    """Ascending thresholds for one feature; empty list means a single bin."""

    feature_index: int
    cuts: tuple[float, ...]

    def __post_init__(self):
        if any(b <= a for a, b in zip(self.cuts, self.cuts[1:])):
            raise ValueError("cut points must be strictly increasing")

    @property
    def n_bins(self) -> int:
        return len(self.cuts) + 1

    def bin_of(self, value: float) -> int:
        return bisect_right(self.cuts, value)


@dataclass(frozen=True)
class DiscretizationModel:
    """Per-feature cut points covering every continuous feature of a schema."""

    schema: FeatureSchema
    cut_lists: tuple[CutPointList, ...]

    def __post_init__(self):
        covered = tuple(c.feature_index for c in self.cut_lists)
        if covered != self.schema.continuous_indices:
            raise SchemaError(
                "cut lists must cover exactly the schema's continuous features"
            )

    def cuts_for(self, index: int) -> CutPointList:
        for c in self.cut_lists:
            if c.feature_index == index:
                return c
        raise KeyError(index)

    def to_payload(self) -> dict:
        return {
            "version": 1,
            "schema": self.schema.to_payload(),
            "cuts": {str(c.feature_index): list(c.cuts) for c in self.cut_lists},
        }

    def to_json(self) -> str:
        return json.dumps(self.to_payload(), sort_keys=True, indent=2) + "\n"

    @classmethod
    def from_payload(cls, payload: Mapping) -> "DiscretizationModel":
        schema = FeatureSchema.from_payload(payload["schema"])
        cut_lists = tuple(
            CutPointList(idx, tuple(float(c) for c in payload["cuts"][str(idx)]))
            for idx in schema.continuous_indices
        )
        return cls(schema=schema, cut_lists=cut_lists)

    @classmethod
    def from_json(cls, text: str) -> "DiscretizationModel":
        return cls.from_payload(json.loads(text))


def fit_discretizer(train: Dataset, candidates: str = "boundary") -> DiscretizationModel:
    """Fit MDL cut points for every continuous feature against the labels."""
    if len(train) == 0:
        raise ValueError("cannot fit a discretizer on an empty dataset")
    _, y = np.unique(train.labels, return_inverse=True)
    cut_lists = []
    for idx in train.schema.continuous_indices:
        cuts = mdlp_cuts(train.column(idx), y, candidates=candidates)
        cut_lists.append(CutPointList(idx, tuple(cuts)))
    return DiscretizationModel(schema=train.schema, cut_lists=tuple(cut_lists))


def apply_discretizer(model: DiscretizationModel, ds: Dataset) -> Dataset:
    """Replace continuous values by bin indices; output is fully discrete."""
    if ds.schema != model.schema:
        raise SchemaError("dataset schema does not match the discretization model")
    columns = list(ds.columns)
    for cpl in model.cut_lists:
        col = ds.column(cpl.feature_index).astype(float)
        bins = np.searchsorted(np.asarray(cpl.cuts), col, side="right")
        columns[cpl.feature_index - 1] = bins.astype(np.int64)
    return Dataset(
        schema=ds.schema.all_discrete(),
        columns=tuple(columns),
        labels=ds.labels,
        weights=ds.weights,
        granularity=ds.granularity,
    )
