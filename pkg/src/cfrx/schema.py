"""Feature schema for ordinal/continuous tabular data.

A schema fixes the feature order, per-feature kind and range, the label
column name, and which features may change during counterfactual search.
Schemas are immutable after construction and safe to share across threads.
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass, field

import numpy as np

from .errors import BadSchema, NonIntegerOrdinal, NotOneHot, OutOfRangeValue

ORDINAL = "ordinal"
CONTINUOUS = "continuous"


@dataclass(frozen=True)
class FeatureSpec:
    """One feature: an ordinal scale 0..max_level or a bounded continuous value."""

    name: str
    kind: str = ORDINAL
    max_level: int | None = None
    min: float | None = None
    max: float | None = None
    default_mutable: bool = True
    description: str = ""

    def __post_init__(self):
        if not self.name:
            raise BadSchema("feature name must be non-empty")
        if self.kind == ORDINAL:
            if self.max_level is None or self.max_level < 1:
                raise BadSchema(f"ordinal feature {self.name!r} needs max_level >= 1")
        elif self.kind == CONTINUOUS:
            if self.min is None or self.max is None or not self.min < self.max:
                raise BadSchema(f"continuous feature {self.name!r} needs min < max")
        else:
            raise BadSchema(f"feature {self.name!r}: unknown kind {self.kind!r}")

    @property
    def n_levels(self) -> int:
        if self.kind != ORDINAL:
            raise BadSchema(f"{self.name!r} is not ordinal")
        return self.max_level + 1

    @property
    def encoded_width(self) -> int:
        return self.n_levels if self.kind == ORDINAL else 1

    def to_dict(self) -> dict:
        d = {"name": self.name, "kind": self.kind, "default_mutable": self.default_mutable}
        if self.kind == ORDINAL:
            d["max_level"] = self.max_level
        else:
            d["min"] = self.min
            d["max"] = self.max
        if self.description:
            d["description"] = self.description
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "FeatureSpec":
        return cls(
            name=d["name"],
            kind=d.get("kind", ORDINAL),
            max_level=d.get("max_level"),
            min=d.get("min"),
            max=d.get("max"),
            default_mutable=d.get("default_mutable", True),
            description=d.get("description", ""),
        )


@dataclass(frozen=True)
class FeatureSchema:
    """Ordered feature list plus the binary label column (0/1)."""

    features: tuple[FeatureSpec, ...]
    label_name: str = "label"
    positive_label_meaning: str = "SNRI"
    _index: dict = field(init=False, repr=False, compare=False, default=None)

    def __post_init__(self):
        object.__setattr__(self, "features", tuple(self.features))
        if not self.features:
            raise BadSchema("schema needs at least one feature")
        names = [f.name for f in self.features]
        if len(set(names)) != len(names):
            raise BadSchema("feature names must be unique")
        if not self.label_name:
            raise BadSchema("label_name must be non-empty")
        if self.label_name in names:
            raise BadSchema("label_name collides with a feature name")
        object.__setattr__(self, "_index", {n: i for i, n in enumerate(names)})

    # --- lookups ---

    @property
    def n_features(self) -> int:
        return len(self.features)

    @property
    def feature_names(self) -> list[str]:
        return [f.name for f in self.features]

    def index_of(self, name: str) -> int:
        try:
            return self._index[name]
        except KeyError:
            raise BadSchema(f"unknown feature {name!r}") from None

    def spec(self, name: str) -> FeatureSpec:
        return self.features[self.index_of(name)]

    # --- instance validation ---

    def validate_row(self, values, row: int = 0) -> np.ndarray:
        """Check one raw feature vector against the schema; returns it as float array."""
        arr = np.asarray(values, dtype=float)
        if arr.shape != (self.n_features,):
            from .errors import MalformedRow
            raise MalformedRow(row, f"expected {self.n_features} values, got {arr.shape}")
        for i, f in enumerate(self.features):
            v = arr[i]
            if not np.isfinite(v):
                raise OutOfRangeValue(row, f.name, v)
            if f.kind == ORDINAL:
                if v != int(v):
                    raise NonIntegerOrdinal(row, f.name, v)
                if not 0 <= v <= f.max_level:
                    raise OutOfRangeValue(row, f.name, int(v))
            else:
                if not f.min <= v <= f.max:
                    raise OutOfRangeValue(row, f.name, v)
        return arr

    # --- one-hot encoding ---

    @property
    def encoded_width(self) -> int:
        return sum(f.encoded_width for f in self.features)

    def encoding_map(self) -> list[tuple[int, int]]:
        """Per-feature (offset, width) into the encoded vector."""
        out, off = [], 0
        for f in self.features:
            out.append((off, f.encoded_width))
            off += f.encoded_width
        return out

    def encode(self, values) -> np.ndarray:
        """One-hot encode a single raw instance; continuous values pass through."""
        return self.encode_batch(np.asarray(values, dtype=float).reshape(1, -1))[0]

    def encode_batch(self, rows: np.ndarray) -> np.ndarray:
        rows = np.asarray(rows, dtype=float)
        n = rows.shape[0]
        out = np.zeros((n, self.encoded_width), dtype=float)
        for (off, width), i, f in zip(self.encoding_map(), range(self.n_features), self.features):
            if f.kind == ORDINAL:
                levels = rows[:, i].astype(int)
                out[np.arange(n), off + levels] = 1.0
            else:
                out[:, off] = rows[:, i]
        return out

    def decode(self, bits) -> np.ndarray:
        """Inverse of encode; raises NotOneHot if an ordinal slice is not one-hot."""
        bits = np.asarray(bits, dtype=float)
        values = np.zeros(self.n_features, dtype=float)
        for (off, width), i, f in zip(self.encoding_map(), range(self.n_features), self.features):
            if f.kind == ORDINAL:
                s = bits[off:off + width]
                hot = np.flatnonzero(s == 1.0)
                if len(hot) != 1 or s.sum() != 1.0:
                    raise NotOneHot(f.name)
                values[i] = hot[0]
            else:
                values[i] = bits[off]
        return values

    # --- serialization ---

    def to_dict(self) -> dict:
        return {
            "features": [f.to_dict() for f in self.features],
            "label_name": self.label_name,
            "positive_label_meaning": self.positive_label_meaning,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "FeatureSchema":
        return cls(
            features=tuple(FeatureSpec.from_dict(f) for f in d["features"]),
            label_name=d.get("label_name", "label"),
            positive_label_meaning=d.get("positive_label_meaning", "SNRI"),
        )

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True)

    @classmethod
    def from_json(cls, text: str) -> "FeatureSchema":
        return cls.from_dict(json.loads(text))

    def fingerprint(self) -> str:
        """Stable hash tying persisted models to the schema they were trained on."""
        canon = json.dumps(self.to_dict(), sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(canon.encode("utf-8")).hexdigest()[:16]


# Conventional 17-item map: items scored 0-4 vs 0-2 are configurable, this is
# the package default.
_WIDE_ITEMS = {1, 2, 3, 7, 8, 9, 10, 11, 15}

_ITEM_DESCRIPTIONS = {
    1: "Depressed mood",
    2: "Feelings of guilt",
    3: "Suicidal thoughts or actions",
    4: "Insomnia-early (sleep onset delay)",
    5: "Insomnia-middle (mid-sleep wakening)",
    6: "Insomnia-late (early morning wakening)",
    7: "Work and activities",
    8: "Psychomotor retardation",
    9: "Psychomotor agitation",
    10: "Psychic anxiety",
    11: "Somatic anxiety",
    12: "Loss of appetite",
    13: "Tiredness/pain",
    14: "Loss of sexual interest",
    15: "Hypochondriasis",
    16: "Weight loss",
    17: "Lack of insight",
}


def default_hamd_schema() -> FeatureSchema:
    """17 ordinal symptom items, ham01..ham17, all mutable by default."""
    feats = []
    for i in range(1, 18):
        feats.append(FeatureSpec(
            name=f"ham{i:02d}",
            kind=ORDINAL,
            max_level=4 if i in _WIDE_ITEMS else 2,
            description=_ITEM_DESCRIPTIONS[i],
        ))
    return FeatureSchema(features=tuple(feats))
