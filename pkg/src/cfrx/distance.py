"""Proximity and diversity terms of the counterfactual objective.

Distance splits into a MAD-normalized L1 part over continuous features and a
mismatch-indicator part over categorical ones; ordinal items count as
categorical by default (they are one-hot encoded for the models) with a
mode switch to treat them as continuous instead. The diversity of a set is
the determinant of the kernel K_ij = 1 / (1 + distance_ij).
"""

from __future__ import annotations

import numpy as np

from .errors import ModeMismatch
from .schema import CONTINUOUS, ORDINAL, FeatureSchema

ORDINAL_AS_CATEGORICAL = "ordinal_as_categorical"
ORDINAL_AS_CONTINUOUS = "ordinal_as_continuous"
DISTANCE_MODES = (ORDINAL_AS_CATEGORICAL, ORDINAL_AS_CONTINUOUS)


def _part_indices(schema: FeatureSchema, mode: str) -> tuple[np.ndarray, np.ndarray]:
    """(continuous-part indices, categorical-part indices) for the mode."""
    if mode not in DISTANCE_MODES:
        raise ModeMismatch(f"unknown distance mode {mode!r}")
    cont, cat = [], []
    for i, f in enumerate(schema.features):
        if f.kind == CONTINUOUS or mode == ORDINAL_AS_CONTINUOUS:
            cont.append(i)
        else:
            cat.append(i)
    if not cont and not cat:
        raise ModeMismatch("schema has no features to measure distance over")
    return np.array(cont, dtype=int), np.array(cat, dtype=int)


def distance_batch(rows: np.ndarray, origin: np.ndarray, schema: FeatureSchema,
                   mads: np.ndarray, mode: str = ORDINAL_AS_CATEGORICAL) -> np.ndarray:
    """Distance from each raw-space row to origin; vectorized over rows."""
    rows = np.atleast_2d(np.asarray(rows, dtype=float))
    origin = np.asarray(origin, dtype=float)
    mads = np.asarray(mads, dtype=float)
    cont, cat = _part_indices(schema, mode)
    total = np.zeros(len(rows))
    if len(cont):
        if np.any(mads[cont] <= 0):
            raise ModeMismatch("continuous part requested with non-positive MAD")
        diffs = np.abs(rows[:, cont] - origin[cont]) / mads[cont]
        total += diffs.mean(axis=1)
    if len(cat):
        total += (rows[:, cat] != origin[cat]).mean(axis=1)
    return total


def distance(a, b, schema: FeatureSchema, mads,
             mode: str = ORDINAL_AS_CATEGORICAL) -> float:
    """Semimetric between two raw instances: non-negative, symmetric,
    zero iff equal under the chosen mode."""
    return float(distance_batch(np.asarray(a, dtype=float).reshape(1, -1),
                                np.asarray(b, dtype=float), schema, mads, mode)[0])


def distance_rowwise(a_rows: np.ndarray, b_rows: np.ndarray, schema: FeatureSchema,
                     mads: np.ndarray, mode: str = ORDINAL_AS_CATEGORICAL) -> np.ndarray:
    """Element i is the distance between a_rows[i] and b_rows[i]."""
    a_rows = np.atleast_2d(np.asarray(a_rows, dtype=float))
    b_rows = np.atleast_2d(np.asarray(b_rows, dtype=float))
    mads = np.asarray(mads, dtype=float)
    cont, cat = _part_indices(schema, mode)
    total = np.zeros(len(a_rows))
    if len(cont):
        if np.any(mads[cont] <= 0):
            raise ModeMismatch("continuous part requested with non-positive MAD")
        total += (np.abs(a_rows[:, cont] - b_rows[:, cont]) / mads[cont]).mean(axis=1)
    if len(cat):
        total += (a_rows[:, cat] != b_rows[:, cat]).mean(axis=1)
    return total


def pairwise_distances(rows: np.ndarray, schema: FeatureSchema, mads: np.ndarray,
                       mode: str = ORDINAL_AS_CATEGORICAL) -> np.ndarray:
    rows = np.atleast_2d(np.asarray(rows, dtype=float))
    k = len(rows)
    out = np.zeros((k, k))
    for i in range(k):
        out[i] = distance_batch(rows, rows[i], schema, mads, mode)
    return 0.5 * (out + out.T)  # enforce exact symmetry


def hinge_loss(probability: float, target_class: int) -> float:
    """max(0, 1 - z * probability) with z = -1 for target 0, +1 for target 1.

    Kept in its literal form: for target 0 the floor is 1, but the loss still
    decreases as the probability moves toward the target side, which is all
    the optimizer needs. Validity is always judged at the 0.5 threshold.
    """
    z = 1.0 if target_class == 1 else -1.0
    return max(0.0, 1.0 - z * probability)


def hinge_loss_batch(probabilities: np.ndarray, target_class: int) -> np.ndarray:
    z = 1.0 if target_class == 1 else -1.0
    return np.maximum(0.0, 1.0 - z * np.asarray(probabilities, dtype=float))


def dpp_kernel(rows: np.ndarray, schema: FeatureSchema, mads: np.ndarray,
               mode: str = ORDINAL_AS_CATEGORICAL) -> np.ndarray:
    return 1.0 / (1.0 + pairwise_distances(rows, schema, mads, mode))


def dpp_diversity(rows, schema: FeatureSchema, mads,
                  mode: str = ORDINAL_AS_CATEGORICAL) -> float:
    """det(K) over the inverse-distance kernel: 1 for a single instance,
    0 when any two coincide, larger for mutually distant sets."""
    K = dpp_kernel(np.atleast_2d(np.asarray(rows, dtype=float)), schema,
                   np.asarray(mads, dtype=float), mode)
    return float(np.linalg.det(K))


def dice_objective(cfs, query, model, schema: FeatureSchema, mads) -> float:
    """Mean hinge loss + (lambda1/k) * summed proximity - lambda2 * det(K)."""
    cfs = np.atleast_2d(np.asarray(cfs, dtype=float))
    probs = model.predict_proba(schema.encode_batch(cfs))
    return dice_objective_from_probs(cfs, probs, query, schema, mads)


def dice_objective_from_probs(cfs: np.ndarray, probs: np.ndarray, query,
                              schema: FeatureSchema, mads) -> float:
    """Objective value when the model outputs are already known."""
    mads = np.asarray(mads, dtype=float)
    k = len(cfs)
    hinge = hinge_loss_batch(probs, query.target_class).mean()
    prox = distance_batch(cfs, query.origin, schema, mads, query.distance_mode).sum()
    div = dpp_diversity(cfs, schema, mads, query.distance_mode)
    return float(hinge + (query.lambda1 / k) * prox - query.lambda2 * div)
