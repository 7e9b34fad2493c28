"""Dataset container plus the tabular operations the pipeline needs:
CSV ingestion, robust per-feature scale (MAD), minority oversampling,
cross-validation folds, and a synthetic generator with a planted label rule.

All randomized operations take an explicit seed and hold no global state.
"""

from __future__ import annotations

import csv
import json
from dataclasses import dataclass, field

import numpy as np

from .errors import (
    BadConfig,
    BadFoldCount,
    EmptyDataset,
    MalformedRow,
    MissingColumn,
    TooFewMinoritySamples,
)
from .schema import ORDINAL, FeatureSchema, default_hamd_schema


@dataclass(frozen=True)
class Dataset:
    """Rows (n x d raw feature matrix) with binary labels under a schema."""

    schema: FeatureSchema
    X: np.ndarray
    y: np.ndarray

    def __post_init__(self):
        X = np.asarray(self.X, dtype=float)
        y = np.asarray(self.y, dtype=int)
        if X.ndim != 2 or X.shape[1] != self.schema.n_features:
            raise MalformedRow(0, f"matrix shape {X.shape} does not match schema width {self.schema.n_features}")
        if len(X) != len(y):
            raise MalformedRow(0, f"{len(X)} rows but {len(y)} labels")
        if len(y) and not np.isin(y, (0, 1)).all():
            bad = int(np.flatnonzero(~np.isin(y, (0, 1)))[0])
            raise MalformedRow(bad, f"label {y[bad]} is not 0/1")
        X.setflags(write=False)
        y.setflags(write=False)
        object.__setattr__(self, "X", X)
        object.__setattr__(self, "y", y)

    def __len__(self) -> int:
        return len(self.y)

    def validate(self) -> "Dataset":
        for r in range(len(self)):
            self.schema.validate_row(self.X[r], row=r)
        return self

    def encoded(self) -> np.ndarray:
        return self.schema.encode_batch(self.X)

    def subset(self, idx) -> "Dataset":
        idx = np.asarray(idx, dtype=int)
        return Dataset(self.schema, self.X[idx].copy(), self.y[idx].copy())

    def class_counts(self) -> tuple[int, int]:
        return int((self.y == 0).sum()), int((self.y == 1).sum())


# --- CSV ---

def load_csv(path, schema: FeatureSchema) -> Dataset:
    """Read a header-first CSV whose columns are the schema features plus the label."""
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise EmptyDataset(f"{path}: empty file") from None
        expected = schema.feature_names + [schema.label_name]
        for col in expected:
            if col not in header:
                raise MissingColumn(col)
        if header != expected:
            raise MalformedRow(0, f"header order {header} does not match schema order {expected}")
        rows, labels = [], []
        for r, cells in enumerate(reader, start=1):
            if len(cells) != len(expected):
                raise MalformedRow(r, f"expected {len(expected)} cells, got {len(cells)}")
            try:
                vals = [float(c) for c in cells]
            except ValueError as e:
                raise MalformedRow(r, str(e)) from None
            schema.validate_row(vals[:-1], row=r)
            label = vals[-1]
            if label not in (0.0, 1.0):
                raise MalformedRow(r, f"label {cells[-1]!r} is not 0/1")
            rows.append(vals[:-1])
            labels.append(int(label))
    if not rows:
        raise EmptyDataset(f"{path}: no data rows")
    return Dataset(schema, np.array(rows, dtype=float), np.array(labels, dtype=int))


def save_csv(dataset: Dataset, path) -> None:
    schema = dataset.schema
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(schema.feature_names + [schema.label_name])
        for row, label in zip(dataset.X, dataset.y):
            cells = [_cell(v, f.kind) for v, f in zip(row, schema.features)]
            writer.writerow(cells + [int(label)])


def _cell(v: float, kind: str):
    return int(v) if kind == ORDINAL else float(v)


# --- robust scale ---

def mad(dataset: Dataset, feature: str) -> float:
    """Median absolute deviation of one column; 0 falls back to 1.0 so
    distance normalization never divides by zero."""
    if len(dataset) == 0:
        raise EmptyDataset("MAD of an empty dataset")
    col = dataset.X[:, dataset.schema.index_of(feature)]
    med = float(np.median(col))
    raw = float(np.median(np.abs(col - med)))
    return raw if raw > 0 else 1.0


def mad_vector(dataset: Dataset) -> np.ndarray:
    """Per-feature MADs (with the zero fallback), ordered as the schema."""
    return np.array([mad(dataset, f.name) for f in dataset.schema.features])


# --- class balancing ---

def smote_oversample(dataset: Dataset, k_neighbors: int = 5, seed: int = 0) -> Dataset:
    """Interpolate minority-class neighbors until class counts are equal.

    Synthetic rows are x + u * (neighbor - x) with u ~ U[0,1]; ordinal
    coordinates are rounded to the nearest valid level. Original rows are
    kept verbatim, synthetic rows appended.
    """
    n0, n1 = dataset.class_counts()
    if n0 == n1:
        return dataset
    if k_neighbors < 1:
        raise BadConfig("k_neighbors must be >= 1")
    minority = 0 if n0 < n1 else 1
    need = abs(n0 - n1)
    idx = np.flatnonzero(dataset.y == minority)
    if len(idx) < 2:
        raise TooFewMinoritySamples(f"minority class has {len(idx)} rows, need >= 2")
    Xm = dataset.X[idx]
    k = min(k_neighbors, len(idx) - 1)

    # pairwise distances among minority rows, self excluded
    d2 = ((Xm[:, None, :] - Xm[None, :, :]) ** 2).sum(axis=2)
    np.fill_diagonal(d2, np.inf)
    neighbor_ids = np.argsort(d2, axis=1, kind="stable")[:, :k]

    rng = np.random.default_rng(seed)
    base = rng.integers(0, len(idx), size=need)
    pick = rng.integers(0, k, size=need)
    u = rng.random(need)
    x = Xm[base]
    nb = Xm[neighbor_ids[base, pick]]
    synth = x + u[:, None] * (nb - x)

    for i, f in enumerate(dataset.schema.features):
        if f.kind == ORDINAL:
            synth[:, i] = np.clip(np.rint(synth[:, i]), 0, f.max_level)
        else:
            synth[:, i] = np.clip(synth[:, i], f.min, f.max)

    X = np.vstack([dataset.X, synth])
    y = np.concatenate([dataset.y, np.full(need, minority, dtype=int)])
    return Dataset(dataset.schema, X, y)


# --- cross-validation folds ---

def kfold_split(dataset: Dataset, k: int, seed: int = 0) -> list[tuple[np.ndarray, np.ndarray]]:
    """Shuffled k-fold (train_idx, val_idx) pairs; validation sets partition
    the index range with sizes differing by at most 1."""
    n = len(dataset)
    if k < 2 or k > n:
        raise BadFoldCount(f"k={k} with {n} rows")
    rng = np.random.default_rng(seed)
    perm = rng.permutation(n)
    folds = np.array_split(perm, k)
    out = []
    for i in range(k):
        val = np.sort(folds[i])
        train = np.sort(np.concatenate([folds[j] for j in range(k) if j != i]))
        out.append((train, val))
    return out


# --- synthetic data with a planted rule ---

@dataclass(frozen=True)
class SynthConfig:
    """Uniform per-feature sampling with a noisy linear-threshold label rule.

    label = 1 if sum(weight[f] * value[f]) >= threshold, flipped with
    probability noise_rate. The decisive map gives a known ground-truth
    importance ranking for recovery tests.
    """

    n_rows: int
    decisive: dict[str, float]
    threshold: float
    noise_rate: float = 0.0
    schema: FeatureSchema = field(default_factory=default_hamd_schema)

    def __post_init__(self):
        if self.n_rows < 1:
            raise BadConfig("n_rows must be >= 1")
        if not self.decisive:
            raise BadConfig("at least one decisive feature is required")
        if not 0 <= self.noise_rate < 0.5:
            raise BadConfig("noise_rate must be in [0, 0.5)")
        unknown = [n for n in self.decisive if n not in self.schema.feature_names]
        if unknown:
            raise BadConfig(f"decisive features not in schema: {unknown}")

    def to_dict(self) -> dict:
        return {
            "n_rows": self.n_rows,
            "decisive": dict(self.decisive),
            "threshold": self.threshold,
            "noise_rate": self.noise_rate,
            "schema": self.schema.to_dict(),
        }

    @classmethod
    def from_dict(cls, d: dict) -> "SynthConfig":
        schema = FeatureSchema.from_dict(d["schema"]) if "schema" in d else default_hamd_schema()
        return cls(
            n_rows=d["n_rows"],
            decisive=dict(d["decisive"]),
            threshold=d["threshold"],
            noise_rate=d.get("noise_rate", 0.0),
            schema=schema,
        )

    @classmethod
    def from_json(cls, text: str) -> "SynthConfig":
        return cls.from_dict(json.loads(text))

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True)


def standard_synth_config(n_rows: int = 2000, noise_rate: float = 0.1) -> SynthConfig:
    """The benchmark config: three decisive items, the rest pure noise."""
    return SynthConfig(
        n_rows=n_rows,
        decisive={"ham01": 1.0, "ham09": 1.0, "ham13": 1.0},
        threshold=5.0,
        noise_rate=noise_rate,
    )


def synth_generate(config: SynthConfig, seed: int = 0) -> Dataset:
    """Draw rows uniformly per feature and label them by the planted rule."""
    rng = np.random.default_rng(seed)
    schema = config.schema
    X = np.zeros((config.n_rows, schema.n_features))
    for i, f in enumerate(schema.features):
        if f.kind == ORDINAL:
            X[:, i] = rng.integers(0, f.max_level + 1, size=config.n_rows)
        else:
            X[:, i] = rng.uniform(f.min, f.max, size=config.n_rows)
    score = np.zeros(config.n_rows)
    for name, w in config.decisive.items():
        score += w * X[:, schema.index_of(name)]
    y = (score >= config.threshold).astype(int)
    if config.noise_rate > 0:
        flip = rng.random(config.n_rows) < config.noise_rate
        y = np.where(flip, 1 - y, y)
    return Dataset(schema, X, y)


def planted_labels(config: SynthConfig, X: np.ndarray) -> np.ndarray:
    """Noise-free labels the rule would assign; the oracle for recovery tests."""
    score = np.zeros(len(X))
    for name, w in config.decisive.items():
        score += w * X[:, config.schema.index_of(name)]
    return (score >= config.threshold).astype(int)
