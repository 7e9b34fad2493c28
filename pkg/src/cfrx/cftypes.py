"""Query and result records for counterfactual generation, with JSON shapes
stable enough to diff byte-for-byte across runs."""

from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np

from .distance import DISTANCE_MODES, ORDINAL_AS_CATEGORICAL
from .errors import BadConfig
from .schema import ORDINAL, FeatureSchema

GRADIENT = "gradient"
EVOLUTIONARY = "evolutionary"
OPTIMIZERS = (GRADIENT, EVOLUTIONARY)


@dataclass(frozen=True)
class CFQuery:
    """One what-if request: flip `origin` to `target_class` with at most k
    counterfactuals, never touching the `immutable` features."""

    origin: np.ndarray
    target_class: int
    k: int = 1
    immutable: frozenset = frozenset()
    lambda1: float = 0.5
    lambda2: float = 1.0
    optimizer: str = EVOLUTIONARY
    seed: int = 0
    budget: int = 20000
    distance_mode: str = ORDINAL_AS_CATEGORICAL

    def __post_init__(self):
        origin = np.asarray(self.origin, dtype=float)
        origin.setflags(write=False)
        object.__setattr__(self, "origin", origin)
        object.__setattr__(self, "immutable", frozenset(self.immutable))
        if self.k < 1:
            raise BadConfig("k must be >= 1")
        if self.target_class not in (0, 1):
            raise BadConfig("target_class must be 0 or 1")
        if self.lambda1 < 0 or self.lambda2 < 0:
            raise BadConfig("lambda weights must be >= 0")
        if self.optimizer not in OPTIMIZERS:
            raise BadConfig(f"unknown optimizer {self.optimizer!r}")
        if self.distance_mode not in DISTANCE_MODES:
            raise BadConfig(f"unknown distance mode {self.distance_mode!r}")
        if self.budget < 1:
            raise BadConfig("budget must be >= 1")

    def validate_against(self, schema: FeatureSchema) -> None:
        schema.validate_row(self.origin)
        unknown = self.immutable - set(schema.feature_names)
        if unknown:
            raise BadConfig(f"immutable features not in schema: {sorted(unknown)}")

    def to_dict(self, schema: FeatureSchema) -> dict:
        return {
            "origin": _values_list(self.origin, schema),
            "target_class": self.target_class,
            "k": self.k,
            "immutable": sorted(self.immutable),
            "lambda1": self.lambda1,
            "lambda2": self.lambda2,
            "optimizer": self.optimizer,
            "seed": self.seed,
            "budget": self.budget,
            "distance_mode": self.distance_mode,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "CFQuery":
        return cls(
            origin=np.array(d["origin"], dtype=float),
            target_class=int(d["target_class"]),
            k=int(d.get("k", 1)),
            immutable=frozenset(d.get("immutable", ())),
            lambda1=float(d.get("lambda1", 0.5)),
            lambda2=float(d.get("lambda2", 1.0)),
            optimizer=d.get("optimizer", EVOLUTIONARY),
            seed=int(d.get("seed", 0)),
            budget=int(d.get("budget", 20000)),
            distance_mode=d.get("distance_mode", ORDINAL_AS_CATEGORICAL),
        )


def _values_list(values: np.ndarray, schema: FeatureSchema) -> list:
    """Raw values as JSON scalars: ints for ordinal features, floats otherwise."""
    out = []
    for v, f in zip(values, schema.features):
        out.append(int(v) if f.kind == ORDINAL else float(v))
    return out


@dataclass(frozen=True)
class DiffEntry:
    feature: str
    old: float
    new: float

    @property
    def delta(self) -> float:
        return self.new - self.old

    def to_dict(self) -> dict:
        def scalar(x):
            return int(x) if float(x).is_integer() else float(x)
        return {
            "feature": self.feature,
            "old": scalar(self.old),
            "new": scalar(self.new),
            "delta": scalar(self.delta),
        }


@dataclass(frozen=True)
class Counterfactual:
    values: np.ndarray
    predicted_probability: float
    valid: bool
    distance_to_origin: float
    diff: tuple[DiffEntry, ...]

    def to_dict(self, schema: FeatureSchema) -> dict:
        return {
            "values": _values_list(self.values, schema),
            "predicted_probability": self.predicted_probability,
            "valid": self.valid,
            "distance_to_origin": self.distance_to_origin,
            "diff": [d.to_dict() for d in self.diff],
        }


def diff_instances(origin: np.ndarray, cf_values: np.ndarray,
                   schema: FeatureSchema) -> tuple[DiffEntry, ...]:
    """Changed features only, in schema order, with signed deltas."""
    out = []
    for i, f in enumerate(schema.features):
        if cf_values[i] != origin[i]:
            out.append(DiffEntry(f.name, float(origin[i]), float(cf_values[i])))
    return tuple(out)


@dataclass(frozen=True)
class CounterfactualSet:
    query: CFQuery
    cfs: tuple[Counterfactual, ...]
    objective_value: float
    evaluations_used: int
    partial: bool = False

    def to_dict(self, schema: FeatureSchema) -> dict:
        return {
            "query": self.query.to_dict(schema),
            "cfs": [cf.to_dict(schema) for cf in self.cfs],
            "objective_value": self.objective_value,
            "evaluations_used": self.evaluations_used,
            "partial": self.partial,
            "seed": self.query.seed,
        }

    def to_json(self, schema: FeatureSchema) -> str:
        return canonical_json(self.to_dict(schema))


def canonical_json(obj) -> str:
    """One byte representation per value: sorted keys, no whitespace."""
    return json.dumps(obj, sort_keys=True, separators=(",", ":"), allow_nan=False)
