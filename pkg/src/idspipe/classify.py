"""Weight-aware discrete naive Bayes and AdaBoost.M1 boosting.

The base learner consumes record weights natively, so boosting reweights
rather than resamples. Conditional tables are Laplace-smoothed over each
feature's observed value domain plus one reserved slot for unseen values,
which keeps every stored probability positive.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from typing import Iterator, Mapping, Sequence

import numpy as np

from .data import DISCRETE, Dataset, Record
from .errors import SchemaError

DEFAULT_SMOOTHING = 1.0
DEFAULT_ROUNDS = 10

# Error floor standing in for a perfect round, and the vote assigned to a
# first round that is no better than chance; both keep vote weights finite.
ERROR_FLOOR = 1e-10
MIN_VOTE_WEIGHT = 1e-10


def _check_discrete(ds: Dataset) -> None:
    bad = [i for i in range(1, len(ds.schema) + 1) if ds.schema.kind(i) != DISCRETE]
    if bad:
        raise SchemaError(
            f"classifier requires a fully discrete dataset; continuous features: {bad}"
        )


def _normalize_value(v):
    """Python scalar for a feature value (object or numpy int)."""
    return v.item() if isinstance(v, np.generic) else v


@dataclass(eq=False)
class NaiveBayesModel:
    """Smoothed class-conditional frequency tables over discrete features."""

    labels: tuple[str, ...]
    smoothing: float
    priors: np.ndarray
    feature_values: tuple[tuple, ...]
    cond: tuple[np.ndarray, ...]  # per feature: (n_values + 1, n_classes)
    _log_priors: np.ndarray = field(init=False, repr=False)
    _log_cond: tuple[np.ndarray, ...] = field(init=False, repr=False)
    _value_index: tuple[dict, ...] = field(init=False, repr=False)

    def __post_init__(self):
        self._log_priors = np.log(self.priors)
        self._log_cond = tuple(np.log(c) for c in self.cond)
        self._value_index = tuple(
            {v: i for i, v in enumerate(values)} for values in self.feature_values
        )

    @property
    def n_features(self) -> int:
        return len(self.feature_values)

    def _feature_rows(self, f: int, column: np.ndarray) -> np.ndarray:
        """Row indices into feature f's table; unseen values hit the last row."""
        index = self._value_index[f]
        unseen = len(self.feature_values[f])
        uniq, inv = np.unique(column, return_inverse=True)
        rows = np.asarray(
            [index.get(_normalize_value(v), unseen) for v in uniq], dtype=np.int64
        )
        return rows[inv]

    def log_posteriors(self, ds: Dataset) -> np.ndarray:
        """Unnormalized log posterior matrix (records x classes)."""
        if len(ds.schema) != self.n_features:
            raise SchemaError(
                f"model has {self.n_features} features, dataset has {len(ds.schema)}"
            )
        scores = np.tile(self._log_priors, (len(ds), 1))
        for f in range(self.n_features):
            rows = self._feature_rows(f, ds.column(f + 1))
            scores += self._log_cond[f][rows]
        return scores

    def to_payload(self) -> dict:
        return {
            "version": 1,
            "labels": list(self.labels),
            "smoothing": self.smoothing,
            "priors": [float(p) for p in self.priors],
            "features": [
                {
                    "values": [_normalize_value(v) for v in values],
                    "cond": [[float(p) for p in row] for row in table],
                }
                for values, table in zip(self.feature_values, self.cond)
            ],
        }

    @classmethod
    def from_payload(cls, payload: Mapping) -> "NaiveBayesModel":
        return cls(
            labels=tuple(payload["labels"]),
            smoothing=float(payload["smoothing"]),
            priors=np.asarray(payload["priors"], dtype=float),
            feature_values=tuple(tuple(f["values"]) for f in payload["features"]),
            cond=tuple(
                np.asarray(f["cond"], dtype=float) for f in payload["features"]
            ),
        )


def train_naive_bayes(
    ds: Dataset,
    smoothing: float = DEFAULT_SMOOTHING,
    label_set: Sequence[str] | None = None,
) -> NaiveBayesModel:
    """Fit smoothed priors and per-feature conditionals from weighted records.

    ``label_set`` fixes the declared class order (defaults to the sorted
    labels observed in ``ds``); classes without training mass keep smoothed
    statistics only.
    """
    _check_discrete(ds)
    if smoothing <= 0:
        raise ValueError("smoothing constant must be positive")
    w = np.asarray(ds.weights, dtype=float)
    if len(ds) == 0 or w.sum() <= 0:
        raise ValueError("cannot train on zero total weight")
    # normalize to mean weight 1 so smoothing strength is scale-invariant
    w = w * (len(w) / w.sum())
    total = w.sum()
    labels = tuple(label_set) if label_set is not None else ds.label_set()
    label_index = {lbl: i for i, lbl in enumerate(labels)}
    try:
        y = np.asarray([label_index[lbl] for lbl in ds.labels], dtype=np.int64)
    except KeyError as missing:
        raise ValueError(f"label {missing} not in the declared label set") from None
    n_classes = len(labels)
    class_mass = np.bincount(y, weights=w, minlength=n_classes)
    priors = (class_mass + smoothing) / (total + smoothing * n_classes)

    feature_values = []
    cond = []
    for idx in range(1, len(ds.schema) + 1):
        uniq, inv = np.unique(ds.column(idx), return_inverse=True)
        n_values = len(uniq)
        counts = np.bincount(
            inv.astype(np.int64) * n_classes + y,
            weights=w,
            minlength=n_values * n_classes,
        ).reshape(n_values, n_classes)
        counts = np.vstack([counts, np.zeros((1, n_classes))])  # unseen slot
        table = (counts + smoothing) / (class_mass + smoothing * (n_values + 1))
        feature_values.append(tuple(_normalize_value(v) for v in uniq))
        cond.append(table)
    return NaiveBayesModel(
        labels=labels,
        smoothing=smoothing,
        priors=priors,
        feature_values=tuple(feature_values),
        cond=tuple(cond),
    )


def _record_dataset(r: Record, n_features: int) -> Dataset:
    from .data import ATTACK23, FeatureSchema

    schema = FeatureSchema(tuple((f"f{i}", DISCRETE) for i in range(1, n_features + 1)))
    columns = tuple(np.asarray([v], dtype=object) for v in r.values)
    return Dataset(
        schema=schema,
        columns=columns,
        labels=np.asarray([r.label], dtype=object),
        weights=np.asarray([r.weight], dtype=float),
        granularity=ATTACK23,
    )


def nb_predict(model: NaiveBayesModel, r: Record) -> dict[str, float]:
    """Normalized posterior for one record, computed in log space."""
    if len(r.values) != model.n_features:
        raise SchemaError(
            f"record has {len(r.values)} values, model expects {model.n_features}"
        )
    scores = model.log_posteriors(_record_dataset(r, model.n_features))[0]
    shifted = np.exp(scores - scores.max())
    posterior = shifted / shifted.sum()
    return {lbl: float(p) for lbl, p in zip(model.labels, posterior)}


def nb_predict_batch(model: NaiveBayesModel, ds: Dataset) -> np.ndarray:
    """Argmax class index per record; ties break toward the first label."""
    return model.log_posteriors(ds).argmax(axis=1)


@dataclass(eq=False)
class EnsembleModel:
    """Sequence of (base model, vote weight) rounds sharing one label order."""

    labels: tuple[str, ...]
    rounds: tuple[tuple[NaiveBayesModel, float], ...]

    def __post_init__(self):
        if not self.rounds:
            raise ValueError("ensemble needs at least one round")
        if any(vote <= 0 for _, vote in self.rounds):
            raise ValueError("vote weights must be positive")

    def vote_matrix(self, ds: Dataset) -> np.ndarray:
        """Summed vote weight per (record, class)."""
        votes = np.zeros((len(ds), len(self.labels)))
        rows = np.arange(len(ds))
        for model, vote in self.rounds:
            votes[rows, nb_predict_batch(model, ds)] += vote
        return votes

    def to_payload(self) -> dict:
        return {
            "version": 1,
            "labels": list(self.labels),
            "rounds": [
                {"vote_weight": float(vote), "model": model.to_payload()}
                for model, vote in self.rounds
            ],
        }

    def to_json(self) -> str:
        return json.dumps(self.to_payload(), sort_keys=True, indent=2) + "\n"

    @classmethod
    def from_payload(cls, payload: Mapping) -> "EnsembleModel":
        return cls(
            labels=tuple(payload["labels"]),
            rounds=tuple(
                (NaiveBayesModel.from_payload(r["model"]), float(r["vote_weight"]))
                for r in payload["rounds"]
            ),
        )

    @classmethod
    def from_json(cls, text: str) -> "EnsembleModel":
        return cls.from_payload(json.loads(text))


@dataclass(frozen=True)
class BoostRound:
    """Diagnostics of one boosting round, exposed for auditing and tests."""

    model: NaiveBayesModel
    error: float
    vote_weight: float
    weights_after: np.ndarray
    kept: bool
    stopped: bool


def boost_rounds(
    ds: Dataset,
    rounds: int = DEFAULT_ROUNDS,
    smoothing: float = DEFAULT_SMOOTHING,
    label_set: Sequence[str] | None = None,
) -> Iterator[BoostRound]:
    """Yield AdaBoost.M1 rounds over a weight-aware naive Bayes learner.

    Weights start uniform at 1/N. A round with weighted error >= 1/2 stops
    boosting and is kept (with a minimal vote) only when it is the first; a
    perfect round is kept with a capped vote and also stops. Otherwise the
    misclassified records are upweighted by (1-e)/e and the distribution is
    renormalized.
    """
    _check_discrete(ds)
    if rounds < 1:
        raise ValueError("boosting needs at least one round")
    n = len(ds)
    if n == 0:
        raise ValueError("cannot boost an empty dataset")
    labels = tuple(label_set) if label_set is not None else ds.label_set()
    label_index = {lbl: i for i, lbl in enumerate(labels)}
    y = np.asarray([label_index[lbl] for lbl in ds.labels], dtype=np.int64)
    weights = np.full(n, 1.0 / n)
    for t in range(rounds):
        model = train_naive_bayes(
            ds.with_weights(weights), smoothing=smoothing, label_set=labels
        )
        predicted = nb_predict_batch(model, ds)
        mis = predicted != y
        error = float(weights[mis].sum())
        if error >= 0.5:
            yield BoostRound(model, error, MIN_VOTE_WEIGHT, weights.copy(), t == 0, True)
            return
        if error == 0.0:
            vote = math.log((1.0 - ERROR_FLOOR) / ERROR_FLOOR)
            yield BoostRound(model, error, vote, weights.copy(), True, True)
            return
        vote = math.log((1.0 - error) / error)
        weights = weights.copy()
        weights[mis] *= (1.0 - error) / error
        weights /= weights.sum()
        yield BoostRound(model, error, vote, weights, True, False)


def train_adaboost_m1(
    ds: Dataset,
    rounds: int = DEFAULT_ROUNDS,
    smoothing: float = DEFAULT_SMOOTHING,
    label_set: Sequence[str] | None = None,
) -> EnsembleModel:
    """Train an AdaBoost.M1 ensemble of naive Bayes models."""
    labels = tuple(label_set) if label_set is not None else ds.label_set()
    kept: list[tuple[NaiveBayesModel, float]] = []
    for info in boost_rounds(ds, rounds=rounds, smoothing=smoothing, label_set=labels):
        if info.kept:
            kept.append((info.model, info.vote_weight))
    if not kept:
        raise RuntimeError("boosting produced no usable round")
    return EnsembleModel(labels=labels, rounds=tuple(kept))


def ensemble_predict(e: EnsembleModel, r: Record) -> str:
    """Weighted-vote label for one record; ties break by label order."""
    ds = _record_dataset(r, e.rounds[0][0].n_features)
    return e.labels[int(e.vote_matrix(ds).argmax(axis=1)[0])]


def ensemble_predict_batch(e: EnsembleModel, ds: Dataset) -> np.ndarray:
    """Argmax class index per record under the weighted hard vote."""
    return e.vote_matrix(ds).argmax(axis=1)
