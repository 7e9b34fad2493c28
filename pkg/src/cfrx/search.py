"""Counterfactual generation.

Two optimizers behind one contract: projected gradient descent for
differentiable (logistic) models, and a model-agnostic evolutionary search
over candidate k-sets for anything with predict_proba. Both pin immutable
features to the origin at every stage, respect an evaluation budget, and
finish with a sparsity pass that reverts changes the prediction does not
need. Results are deterministic for a fixed seed.
"""

from __future__ import annotations

import numpy as np

from .cftypes import (
    CFQuery,
    Counterfactual,
    CounterfactualSet,
    GRADIENT,
    diff_instances,
)
from .distance import (
    ORDINAL_AS_CATEGORICAL,
    ORDINAL_AS_CONTINUOUS,
    _part_indices,
    dice_objective_from_probs,
    distance_batch,
    distance_rowwise,
    hinge_loss_batch,
)
from .errors import BadConfig, NoCounterfactualFound, TargetEqualsPrediction
from .models import LogisticModel
from .schema import CONTINUOUS, ORDINAL, FeatureSchema


def predicted_class(probability) -> int:
    """Ties at exactly 0.5 resolve to class 1."""
    return int(np.asarray(probability) >= 0.5)


def _immutable_indices(query: CFQuery, schema: FeatureSchema) -> np.ndarray:
    """Query-pinned features plus any the schema marks immutable by default."""
    pinned = set(query.immutable) | {f.name for f in schema.features if not f.default_mutable}
    return np.array(sorted(schema.index_of(n) for n in pinned), dtype=int)


def _feature_bounds(schema: FeatureSchema):
    lo = np.array([0.0 if f.kind == ORDINAL else f.min for f in schema.features])
    hi = np.array([float(f.max_level) if f.kind == ORDINAL else f.max for f in schema.features])
    is_ordinal = np.array([f.kind == ORDINAL for f in schema.features])
    return lo, hi, is_ordinal


class _EvalCounter:
    """Tracks model forward passes against the query budget."""

    def __init__(self, model, schema: FeatureSchema, budget: int):
        self.model = model
        self.schema = schema
        self.budget = budget
        self.used = 0

    def predict(self, rows: np.ndarray) -> np.ndarray:
        rows = np.atleast_2d(rows)
        self.used += len(rows)
        return self.model.predict_proba(self.schema.encode_batch(rows))

    def remaining(self) -> int:
        return self.budget - self.used


# --- sparsity post-pass ---

def sparsity_pass(values: np.ndarray, origin: np.ndarray, counter: _EvalCounter,
                  target_class: int) -> tuple[np.ndarray, float]:
    """Revert changed features one at a time, largest |delta| first (ties by
    ascending feature index), keeping each revert only if the prediction
    stays on the target class. Returns the slimmed values and their
    probability. Never increases the distance to origin."""
    values = values.copy()
    prob = float(counter.predict(values)[0])
    changed = [i for i in range(len(values)) if values[i] != origin[i]]
    changed.sort(key=lambda i: (-abs(values[i] - origin[i]), i))
    for i in changed:
        trial = values.copy()
        trial[i] = origin[i]
        p = float(counter.predict(trial)[0])
        if predicted_class(p) == target_class:
            values = trial
            prob = p
    return values, prob


def apply_sparsity(cf: Counterfactual, origin, model, schema: FeatureSchema,
                   mads=None, mode: str = ORDINAL_AS_CATEGORICAL) -> Counterfactual:
    """Standalone sparsity pass over an existing counterfactual record."""
    origin = np.asarray(origin, dtype=float)
    if mads is None:
        mads = np.ones(schema.n_features)
    target = predicted_class(cf.predicted_probability)
    counter = _EvalCounter(model, schema, budget=2 ** 31)
    values, prob = sparsity_pass(np.asarray(cf.values, dtype=float), origin, counter, target)
    return Counterfactual(
        values=values,
        predicted_probability=prob,
        valid=predicted_class(prob) == target,
        distance_to_origin=float(distance_batch(values.reshape(1, -1), origin, schema, mads, mode)[0]),
        diff=diff_instances(origin, values, schema),
    )


# --- gradient path (differentiable models) ---

def relaxed_objective_and_grad(x_enc: np.ndarray, origin_enc: np.ndarray,
                               model: LogisticModel, schema: FeatureSchema,
                               mads: np.ndarray, mode: str, target_class: int,
                               lam1: float) -> tuple[float, np.ndarray]:
    """Hinge loss + lam1 * relaxed distance in the encoded space, with its
    analytic gradient.

    The relaxation replaces the categorical indicator by half the L1 gap of
    the one-hot slice (they agree at valid one-hot points) and, in the
    ordinal-as-continuous mode, measures |sum_l l*x_l - level| / MAD.
    """
    z = 1.0 if target_class == 1 else -1.0
    s = float(x_enc @ model.weights + model.bias)
    p = 1.0 / (1.0 + np.exp(-s)) if s >= 0 else np.exp(s) / (1.0 + np.exp(s))
    hinge = max(0.0, 1.0 - z * p)
    grad = np.zeros_like(x_enc)
    if hinge > 0.0:
        grad += -z * p * (1.0 - p) * model.weights

    cont, cat = _part_indices(schema, mode)
    d_cont, d_cat = len(cont), len(cat)
    dist = 0.0
    enc_map = schema.encoding_map()
    for i, f in enumerate(schema.features):
        off, width = enc_map[i]
        if f.kind == CONTINUOUS or mode == ORDINAL_AS_CONTINUOUS:
            if f.kind == ORDINAL:
                levels = np.arange(width, dtype=float)
                v = float(levels @ x_enc[off:off + width])
                v0 = float(levels @ origin_enc[off:off + width])
                dist += abs(v - v0) / (mads[i] * d_cont)
                grad += lam1 * np.sign(v - v0) / (mads[i] * d_cont) * _slot_mask(len(x_enc), off, width, levels)
            else:
                gap = x_enc[off] - origin_enc[off]
                dist += abs(gap) / (mads[i] * d_cont)
                grad[off] += lam1 * np.sign(gap) / (mads[i] * d_cont)
        else:
            sl = slice(off, off + width)
            gaps = x_enc[sl] - origin_enc[sl]
            dist += float(np.abs(gaps).sum()) / (2.0 * d_cat)
            grad[sl] += lam1 * np.sign(gaps) / (2.0 * d_cat)
    return hinge + lam1 * dist, grad


def _slot_mask(n: int, off: int, width: int, levels: np.ndarray) -> np.ndarray:
    out = np.zeros(n)
    out[off:off + width] = levels
    return out


def _project_to_instance(x_enc: np.ndarray, origin: np.ndarray,
                         schema: FeatureSchema, immutable_idx: np.ndarray) -> np.ndarray:
    """Relaxed encoded point -> nearest valid raw instance: ordinal slices
    snap to their argmax level, continuous values clamp, pinned features
    reset to origin."""
    values = np.zeros(schema.n_features)
    for (off, width), i, f in zip(schema.encoding_map(), range(schema.n_features), schema.features):
        if f.kind == ORDINAL:
            values[i] = float(np.argmax(x_enc[off:off + width]))
        else:
            values[i] = float(np.clip(x_enc[off], f.min, f.max))
    if len(immutable_idx):
        values[immutable_idx] = origin[immutable_idx]
    return values


def _simplex_projection(v: np.ndarray) -> np.ndarray:
    """Euclidean projection onto {x >= 0, sum(x) = 1} (sort-based)."""
    u = np.sort(v)[::-1]
    css = np.cumsum(u)
    rho = np.nonzero(u * np.arange(1, len(v) + 1) > css - 1.0)[0][-1]
    theta = (css[rho] - 1.0) / (rho + 1.0)
    return np.maximum(v - theta, 0.0)


def _relax_project(x_enc: np.ndarray, origin_enc: np.ndarray, schema: FeatureSchema,
                   immutable_idx: np.ndarray) -> np.ndarray:
    """Keep the relaxed iterate feasible: each mutable ordinal slice becomes a
    soft level assignment on the simplex (so raising one level drains the
    others), continuous coords clamp, pinned slices reset to origin."""
    out = x_enc.copy()
    pinned = set(immutable_idx.tolist())
    for (off, width), i, f in zip(schema.encoding_map(), range(schema.n_features), schema.features):
        sl = slice(off, off + width)
        if i in pinned:
            out[sl] = origin_enc[sl]
        elif f.kind == ORDINAL:
            out[sl] = _simplex_projection(out[sl])
        else:
            out[off] = np.clip(out[off], f.min, f.max)
    return out


def generate_single_cf(query: CFQuery, model: LogisticModel, schema: FeatureSchema,
                       mads=None, learning_rate: float = 0.25,
                       stationary_tol: float = 1e-7) -> CounterfactualSet:
    """Projected gradient descent on hinge + lambda1 * distance for a
    differentiable model; returns one valid counterfactual or raises."""
    if not isinstance(model, LogisticModel):
        raise BadConfig("gradient optimizer needs a logistic model")
    if query.k != 1:
        raise BadConfig("gradient optimizer generates one counterfactual (k=1)")
    query.validate_against(schema)
    mads = np.ones(schema.n_features) if mads is None else np.asarray(mads, dtype=float)
    origin = np.asarray(query.origin, dtype=float)
    counter = _EvalCounter(model, schema, query.budget)

    p0 = float(counter.predict(origin)[0])
    if predicted_class(p0) == query.target_class:
        raise TargetEqualsPrediction(
            f"origin already predicts class {query.target_class} (p={p0:.4f})")

    immutable_idx = _immutable_indices(query, schema)
    enc_map = schema.encoding_map()
    frozen = np.zeros(schema.encoded_width, dtype=bool)
    for i in immutable_idx:
        off, width = enc_map[i]
        frozen[off:off + width] = True

    origin_enc = schema.encode(origin)
    x = origin_enc.copy()
    best_valid = None  # (distance, values, prob)

    while counter.remaining() >= 2:
        _, grad = relaxed_objective_and_grad(
            x, origin_enc, model, schema, mads, query.distance_mode,
            query.target_class, query.lambda1)
        counter.used += 1
        grad[frozen] = 0.0
        x_new = _relax_project(x - learning_rate * grad, origin_enc, schema, immutable_idx)
        snapped = _project_to_instance(x_new, origin, schema, immutable_idx)
        p = float(counter.predict(snapped)[0])
        step = float(np.max(np.abs(x_new - x)))
        x = x_new
        if predicted_class(p) == query.target_class:
            d = float(distance_batch(snapped.reshape(1, -1), origin, schema,
                                     mads, query.distance_mode)[0])
            if best_valid is None or d < best_valid[0]:
                best_valid = (d, snapped, p)
            if step < stationary_tol:
                break
        elif step < stationary_tol and best_valid is None:
            break  # stalled without ever reaching the target side

    if best_valid is None:
        raise NoCounterfactualFound(
            f"no valid counterfactual within budget {query.budget}")

    _, values, prob = best_valid
    values, prob = sparsity_pass(values, origin, counter, query.target_class)
    cf = Counterfactual(
        values=values,
        predicted_probability=prob,
        valid=True,
        distance_to_origin=float(distance_batch(values.reshape(1, -1), origin,
                                                schema, mads, query.distance_mode)[0]),
        diff=diff_instances(origin, values, schema),
    )
    objective = dice_objective_from_probs(
        values.reshape(1, -1), np.array([prob]), query, schema, mads)
    return CounterfactualSet(
        query=query, cfs=(cf,), objective_value=objective,
        evaluations_used=counter.used, partial=False,
    )


# --- evolutionary path (model-agnostic) ---

def _set_objectives(cands: np.ndarray, probs: np.ndarray, query: CFQuery,
                    schema: FeatureSchema, mads: np.ndarray) -> np.ndarray:
    """dice objective for m candidate sets of shape (m, k, d) at once."""
    m, k, d = cands.shape
    hinge = hinge_loss_batch(probs, query.target_class).mean(axis=1)
    flat = cands.reshape(m * k, d)
    prox = distance_batch(flat, query.origin, schema, mads,
                          query.distance_mode).reshape(m, k).sum(axis=1)
    K = np.ones((m, k, k))
    for i in range(k):
        for j in range(i + 1, k):
            dij = distance_rowwise(cands[:, i, :], cands[:, j, :], schema, mads,
                                   query.distance_mode)
            K[:, i, j] = K[:, j, i] = 1.0 / (1.0 + dij)
    dets = np.linalg.det(K)
    return hinge + (query.lambda1 / k) * prox - query.lambda2 * dets


def generate_diverse_cfs(query: CFQuery, model, schema: FeatureSchema, mads=None,
                         population: int = 60, stagnation_limit: int = 25,
                         mutation_rate: float = 0.9) -> CounterfactualSet:
    """Evolutionary search over candidate k-sets scored by the diverse-CF
    objective. Candidates start uniform within per-feature ranges (immutable
    features pinned), evolve by elitist selection, uniform value-swapping
    crossover, and single-feature mutations of one ordinal level or a
    Gaussian step, then the surviving set is validity-filtered and slimmed.
    """
    query.validate_against(schema)
    mads = np.ones(schema.n_features) if mads is None else np.asarray(mads, dtype=float)
    origin = np.asarray(query.origin, dtype=float)
    k, d = query.k, schema.n_features
    counter = _EvalCounter(model, schema, query.budget)
    rng = np.random.default_rng(query.seed)

    p0 = float(counter.predict(origin)[0])
    if predicted_class(p0) == query.target_class:
        raise TargetEqualsPrediction(
            f"origin already predicts class {query.target_class} (p={p0:.4f})")

    immutable_idx = _immutable_indices(query, schema)
    mutable_idx = np.array([i for i in range(d) if i not in set(immutable_idx.tolist())], dtype=int)
    if len(mutable_idx) == 0:
        raise NoCounterfactualFound("every feature is immutable")
    lo, hi, is_ordinal = _feature_bounds(schema)

    def pin(arr: np.ndarray) -> np.ndarray:
        if len(immutable_idx):
            arr[..., immutable_idx] = origin[immutable_idx]
        return arr

    def init_uniform(m: int) -> np.ndarray:
        out = np.zeros((m, k, d))
        for i, f in enumerate(schema.features):
            if f.kind == ORDINAL:
                out[:, :, i] = rng.integers(0, f.max_level + 1, size=(m, k))
            else:
                out[:, :, i] = rng.uniform(f.min, f.max, size=(m, k))
        return pin(out)

    def evaluate(cands: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        m = len(cands)
        probs = counter.predict(cands.reshape(m * k, d)).reshape(m, k)
        return _set_objectives(cands, probs, query, schema, mads), probs

    pop = init_uniform(population)
    if counter.remaining() < population * k:
        raise NoCounterfactualFound(f"budget {query.budget} cannot fund one generation")
    obj, probs = evaluate(pop)

    n_elite = max(2, population // 4)
    n_child = population - n_elite
    sigma = 0.1 * (hi - lo)
    best_obj = np.inf
    stagnation = 0
    # hold back enough budget for the post-search sparsity pass
    reserve = k * (d + 1)

    while counter.remaining() - reserve >= n_child * k:
        gen_best = float(obj.min())
        if gen_best < best_obj - 1e-9:
            best_obj = gen_best
            stagnation = 0
        else:
            stagnation += 1
            if stagnation >= stagnation_limit:
                break
        order = np.argsort(obj, kind="stable")
        elites = pop[order[:n_elite]]
        elite_obj = obj[order[:n_elite]]
        elite_probs = probs[order[:n_elite]]

        pa = rng.integers(0, n_elite, size=n_child)
        pb = rng.integers(0, n_elite, size=n_child)
        swap = rng.random((n_child, k, d)) < 0.5
        children = np.where(swap, elites[pa], elites[pb])

        mutate = rng.random((n_child, k)) < mutation_rate
        feat = mutable_idx[rng.integers(0, len(mutable_idx), size=(n_child, k))]
        steps_sign = rng.integers(0, 2, size=(n_child, k)) * 2 - 1
        steps_gauss = rng.normal(0.0, 1.0, size=(n_child, k))
        rows, members = np.nonzero(mutate)
        cols = feat[rows, members]
        cur = children[rows, members, cols]
        new = np.where(
            is_ordinal[cols],
            cur + steps_sign[rows, members],
            cur + steps_gauss[rows, members] * sigma[cols],
        )
        children[rows, members, cols] = np.clip(new, lo[cols], hi[cols])
        pin(children)

        child_obj, child_probs = evaluate(children)
        pop = np.concatenate([elites, children])
        obj = np.concatenate([elite_obj, child_obj])
        probs = np.concatenate([elite_probs, child_probs])

    best_idx = int(np.argmin(obj))
    best_set = pop[best_idx]
    best_probs = probs[best_idx]

    valid = np.array([predicted_class(p) == query.target_class for p in best_probs])
    if not valid.any():
        raise NoCounterfactualFound(
            f"no valid counterfactual among the best set (budget {query.budget})")

    cfs = []
    final_rows, final_probs = [], []
    for row, p in zip(best_set[valid], best_probs[valid]):
        slim, prob = sparsity_pass(row, origin, counter, query.target_class)
        final_rows.append(slim)
        final_probs.append(prob)
        cfs.append(Counterfactual(
            values=slim,
            predicted_probability=prob,
            valid=True,
            distance_to_origin=float(distance_batch(slim.reshape(1, -1), origin,
                                                    schema, mads, query.distance_mode)[0]),
            diff=diff_instances(origin, slim, schema),
        ))
    objective = dice_objective_from_probs(
        np.array(final_rows), np.array(final_probs), query, schema, mads)
    return CounterfactualSet(
        query=query,
        cfs=tuple(cfs),
        objective_value=objective,
        evaluations_used=counter.used,
        partial=len(cfs) < k,
    )


def generate(query: CFQuery, model, schema: FeatureSchema, mads=None, **kwargs) -> CounterfactualSet:
    """Dispatch on the query's optimizer choice."""
    if query.optimizer == GRADIENT:
        return generate_single_cf(query, model, schema, mads=mads, **kwargs)
    return generate_diverse_cfs(query, model, schema, mads=mads, **kwargs)
