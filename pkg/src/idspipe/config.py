"""Dataclass configuration for reproducible experiment runs.

A config file is a JSON object whose keys mirror these dataclasses; every
CLI flag overrides exactly one key. See README for the documented schema.
"""

from __future__ import annotations

import json
from dataclasses import asdict, dataclass, field
from typing import Mapping

from .data import ATTACK23, GRANULARITIES
from .discretize import CANDIDATE_MODES
from .select import SELECTION_METHODS

DISCRETIZATION_MODES = ("leaky", "fold-safe")

# Default cutoff for the hybrid selector's second stage: a leftover feature
# is added when its information gain reaches this fraction of the best
# leftover's gain. Chosen so only the clearly informative tier joins the
# CFS subset; override with --alpha for sensitivity studies.
DEFAULT_HYBRID_ALPHA = 0.6


@dataclass(frozen=True)
class SelectionConfig:
    method: str = "hybrid"
    alpha: float = DEFAULT_HYBRID_ALPHA

    def __post_init__(self):
        if self.method not in SELECTION_METHODS:
            raise ValueError(
                f"selection.method must be one of {SELECTION_METHODS}, "
                f"got {self.method!r}"
            )
        if not 0.0 <= self.alpha <= 1.0:
            raise ValueError("selection.alpha must lie in [0, 1]")


@dataclass(frozen=True)
class ClassifierConfig:
    boost: bool = True
    rounds: int = 10
    smoothing: float = 1.0

    def __post_init__(self):
        if self.rounds < 1:
            raise ValueError("classifier.rounds must be at least 1")
        if self.smoothing <= 0:
            raise ValueError("classifier.smoothing must be positive")


@dataclass(frozen=True)
class CrossValConfig:
    k: int = 10
    seed: int = 0

    def __post_init__(self):
        if self.k < 2:
            raise ValueError("cv.k must be at least 2")


@dataclass(frozen=True)
class SampleConfig:
    """Optional distribution-matched sampling before the pipeline proper.

    ``target`` is either the literal ``reference`` (the built-in 62,984
    record histogram) or a path to a JSON file mapping label -> count.
    """

    target: str = "reference"
    seed: int = 0


@dataclass(frozen=True)
class ExperimentConfig:
    """Everything cross_validate needs: preprocessing + selection + learner."""

    discretization: str = "leaky"
    candidates: str = "boundary"
    selection: SelectionConfig = field(default_factory=SelectionConfig)
    classifier: ClassifierConfig = field(default_factory=ClassifierConfig)

    def __post_init__(self):
        if self.discretization not in DISCRETIZATION_MODES:
            raise ValueError(
                f"discretization must be one of {DISCRETIZATION_MODES}, "
                f"got {self.discretization!r}"
            )
        if self.candidates not in CANDIDATE_MODES:
            raise ValueError(f"candidates must be one of {CANDIDATE_MODES}")


@dataclass(frozen=True)
class PipelineConfig:
    """Full description of one experiment run."""

    input_path: str
    granularity: str = ATTACK23
    sample: SampleConfig | None = None
    experiment: ExperimentConfig = field(default_factory=ExperimentConfig)
    cv: CrossValConfig = field(default_factory=CrossValConfig)
    output_dir: str = "run-artifacts"

    def __post_init__(self):
        if self.granularity not in GRANULARITIES:
            raise ValueError(f"granularity must be one of {GRANULARITIES}")

    def to_payload(self) -> dict:
        payload = asdict(self)
        return payload

    def to_json(self) -> str:
        return json.dumps(self.to_payload(), sort_keys=True, indent=2) + "\n"

    @classmethod
    def from_payload(cls, payload: Mapping) -> "PipelineConfig":
        data = dict(payload)
        sample = data.get("sample")
        experiment = data.get("experiment", {}) or {}
        return cls(
            input_path=str(data["input_path"]),
            granularity=data.get("granularity", ATTACK23),
            sample=None if sample is None else SampleConfig(**sample),
            experiment=ExperimentConfig(
                discretization=experiment.get("discretization", "leaky"),
                candidates=experiment.get("candidates", "boundary"),
                selection=SelectionConfig(**(experiment.get("selection", {}) or {})),
                classifier=ClassifierConfig(
                    **(experiment.get("classifier", {}) or {})
                ),
            ),
            cv=CrossValConfig(**(data.get("cv", {}) or {})),
            output_dir=data.get("output_dir", "run-artifacts"),
        )

    @classmethod
    def from_json(cls, text: str) -> "PipelineConfig":
        payload = json.loads(text)
        # A report's descriptor embeds the resolved config; accept it too.
        if "descriptor" in payload and "config" in payload.get("descriptor", {}):
            payload = payload["descriptor"]["config"]
        return cls.from_payload(payload)
