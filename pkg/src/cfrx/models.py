"""From-scratch binary classifiers over one-hot encoded rows.

Three families: a Gini-split decision tree, a bootstrap random forest with
per-split feature subsampling, and full-batch gradient-descent logistic
regression. All expose predict_proba over encoded batches and serialize to
a single JSON document. Fitted models are immutable and safe to share.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np

from .errors import BadConfig, BadModelFile, DivergedTraining, WidthMismatch

# Tree nodes live in flat parallel arrays: feature[i] == -1 marks a leaf and
# prob[i] is its positive-class fraction; otherwise rows with
# x[feature[i]] <= threshold[i] descend to left[i], the rest to right[i].


def _best_split(X, y, feat_ids, min_leaf):
    """Best (feature, threshold, impurity) over candidate features, or None.

    Thresholds are midpoints between consecutive distinct sorted values;
    all candidate features are scanned in one vectorized pass. Ties resolve
    to the lowest feature index, then the lowest threshold, so fitting is
    fully deterministic.
    """
    feat_ids = np.asarray(feat_ids, dtype=int)
    sub = X[:, feat_ids]
    n, m = sub.shape
    order = np.argsort(sub, axis=0, kind="stable")
    xs = np.take_along_axis(sub, order, axis=0)
    ys = y[order]
    pos = float(y.sum())

    n_l = np.arange(1, n, dtype=float)[:, None]
    n_r = float(n) - n_l
    pos_l = np.cumsum(ys, axis=0)[:-1].astype(float)
    pos_r = pos - pos_l
    g_l = 1.0 - (pos_l / n_l) ** 2 - ((n_l - pos_l) / n_l) ** 2
    g_r = 1.0 - (pos_r / n_r) ** 2 - ((n_r - pos_r) / n_r) ** 2
    imp = (n_l * g_l + n_r * g_r) / n

    usable = (xs[:-1] != xs[1:]) & (n_l >= min_leaf) & (n_r >= min_leaf)
    if not usable.any():
        return None
    imp = np.where(usable, imp, np.inf)
    # argmin over the transpose walks feature-major, giving the tie-break order
    flat = int(np.argmin(imp.T))
    j, i = divmod(flat, n - 1)
    thr = 0.5 * (xs[i, j] + xs[i + 1, j])
    return int(feat_ids[j]), float(thr), float(imp[i, j])


@dataclass(frozen=True)
class DecisionTreeModel:
    width: int
    feature: np.ndarray
    threshold: np.ndarray
    left: np.ndarray
    right: np.ndarray
    prob: np.ndarray
    max_depth: int = 8
    min_leaf: int = 1
    single_class_warning: bool = False

    def predict_proba(self, X: np.ndarray) -> np.ndarray:
        X = np.atleast_2d(np.asarray(X, dtype=float))
        if X.shape[1] != self.width:
            raise WidthMismatch(self.width, X.shape[1])
        ptr = np.zeros(len(X), dtype=int)
        while True:
            feat = self.feature[ptr]
            active = feat >= 0
            if not active.any():
                break
            xv = X[np.arange(len(X)), np.where(active, feat, 0)]
            go_left = xv <= self.threshold[ptr]
            nxt = np.where(go_left, self.left[ptr], self.right[ptr])
            ptr = np.where(active, nxt, ptr)
        return self.prob[ptr]

    @property
    def n_nodes(self) -> int:
        return len(self.feature)

    def to_dict(self) -> dict:
        return {
            "width": self.width,
            "feature": self.feature.tolist(),
            "threshold": self.threshold.tolist(),
            "left": self.left.tolist(),
            "right": self.right.tolist(),
            "prob": self.prob.tolist(),
            "max_depth": self.max_depth,
            "min_leaf": self.min_leaf,
            "single_class_warning": self.single_class_warning,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "DecisionTreeModel":
        return cls(
            width=d["width"],
            feature=np.array(d["feature"], dtype=int),
            threshold=np.array(d["threshold"], dtype=float),
            left=np.array(d["left"], dtype=int),
            right=np.array(d["right"], dtype=int),
            prob=np.array(d["prob"], dtype=float),
            max_depth=d.get("max_depth", 8),
            min_leaf=d.get("min_leaf", 1),
            single_class_warning=d.get("single_class_warning", False),
        )


def fit_decision_tree(X, y, max_depth: int = 8, min_leaf: int = 1,
                      seed: int = 0, feature_subsample: float = 1.0,
                      rng: np.random.Generator | None = None) -> DecisionTreeModel:
    """Greedy Gini-impurity tree; leaf probability is the positive fraction.

    A single-class training set yields one constant leaf with
    single_class_warning set instead of failing.
    """
    X = np.asarray(X, dtype=float)
    y = np.asarray(y, dtype=int)
    if len(X) == 0:
        raise BadConfig("empty training set")
    if min_leaf < 1:
        raise BadConfig("min_leaf must be >= 1")
    single_class = len(np.unique(y)) < 2
    if feature_subsample < 1.0 and rng is None:
        rng = np.random.default_rng(seed)
    n_sub = max(1, int(round(feature_subsample * X.shape[1])))

    feature, threshold, left, right, prob = [], [], [], [], []

    def grow(idx, depth):
        node = len(feature)
        ys = y[idx]
        p = float(ys.mean()) if len(ys) else 0.0
        feature.append(-1)
        threshold.append(0.0)
        left.append(-1)
        right.append(-1)
        prob.append(p)
        if depth >= max_depth or len(idx) < 2 * min_leaf or p in (0.0, 1.0):
            return node
        if feature_subsample >= 1.0:
            feat_ids = range(X.shape[1])
        else:
            feat_ids = np.sort(rng.choice(X.shape[1], size=n_sub, replace=False))
        split = _best_split(X[idx], ys, feat_ids, min_leaf)
        if split is None:
            return node
        j, thr, _ = split
        mask = X[idx, j] <= thr
        feature[node] = j
        threshold[node] = thr
        left[node] = grow(idx[mask], depth + 1)
        right[node] = grow(idx[~mask], depth + 1)
        return node

    grow(np.arange(len(X)), 0)
    return DecisionTreeModel(
        width=X.shape[1],
        feature=np.array(feature, dtype=int),
        threshold=np.array(threshold, dtype=float),
        left=np.array(left, dtype=int),
        right=np.array(right, dtype=int),
        prob=np.array(prob, dtype=float),
        max_depth=max_depth,
        min_leaf=min_leaf,
        single_class_warning=single_class,
    )


@dataclass(frozen=True)
class RandomForestModel:
    trees: tuple[DecisionTreeModel, ...]
    n_trees: int
    max_depth: int
    seed: int
    single_class_warning: bool = False
    # stacked node arrays for batch prediction, built once post-fit
    _stacked: dict = field(init=False, repr=False, compare=False, default=None)

    def __post_init__(self):
        roots, feat, thr, lft, rgt, prb = [], [], [], [], [], []
        off = 0
        for t in self.trees:
            roots.append(off)
            feat.append(t.feature)
            thr.append(t.threshold)
            lft.append(t.left + off)
            rgt.append(t.right + off)
            prb.append(t.prob)
            off += t.n_nodes
        object.__setattr__(self, "_stacked", {
            "roots": np.array(roots, dtype=int),
            "feature": np.concatenate(feat),
            "threshold": np.concatenate(thr),
            "left": np.concatenate(lft),
            "right": np.concatenate(rgt),
            "prob": np.concatenate(prb),
        })

    @property
    def width(self) -> int:
        return self.trees[0].width

    def predict_proba(self, X: np.ndarray) -> np.ndarray:
        """Mean of member-tree probabilities; all trees descend in lockstep."""
        X = np.atleast_2d(np.asarray(X, dtype=float))
        if X.shape[1] != self.width:
            raise WidthMismatch(self.width, X.shape[1])
        s = self._stacked
        n = len(X)
        ptr = np.broadcast_to(s["roots"][:, None], (self.n_trees, n)).copy()
        while True:
            feat = s["feature"][ptr]
            active = feat >= 0
            if not active.any():
                break
            xv = X[np.arange(n)[None, :], np.where(active, feat, 0)]
            go_left = xv <= s["threshold"][ptr]
            nxt = np.where(go_left, s["left"][ptr], s["right"][ptr])
            ptr = np.where(active, nxt, ptr)
        return s["prob"][ptr].mean(axis=0)

    def to_dict(self) -> dict:
        return {
            "trees": [t.to_dict() for t in self.trees],
            "n_trees": self.n_trees,
            "max_depth": self.max_depth,
            "seed": self.seed,
            "single_class_warning": self.single_class_warning,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "RandomForestModel":
        return cls(
            trees=tuple(DecisionTreeModel.from_dict(t) for t in d["trees"]),
            n_trees=d["n_trees"],
            max_depth=d["max_depth"],
            seed=d["seed"],
            single_class_warning=d.get("single_class_warning", False),
        )


def fit_random_forest(X, y, n_trees: int = 100, max_depth: int = 8,
                      feature_subsample: float = 0.6, min_leaf: int = 1,
                      seed: int = 0, bootstrap: bool = True) -> RandomForestModel:
    """Bootstrap-resampled trees with per-split feature subsampling.

    Each tree draws its own generator from the seed sequence, so results do
    not depend on fitting order.
    """
    X = np.asarray(X, dtype=float)
    y = np.asarray(y, dtype=int)
    if n_trees < 1:
        raise BadConfig("n_trees must be >= 1")
    child_seeds = np.random.SeedSequence(seed).spawn(n_trees)
    trees = []
    for t in range(n_trees):
        rng = np.random.default_rng(child_seeds[t])
        if bootstrap:
            idx = rng.integers(0, len(X), size=len(X))
        else:
            idx = np.arange(len(X))
        trees.append(fit_decision_tree(
            X[idx], y[idx], max_depth=max_depth, min_leaf=min_leaf,
            feature_subsample=feature_subsample, rng=rng,
        ))
    return RandomForestModel(
        trees=tuple(trees),
        n_trees=n_trees,
        max_depth=max_depth,
        seed=seed,
        single_class_warning=all(t.single_class_warning for t in trees),
    )


def _sigmoid(z):
    out = np.empty_like(z, dtype=float)
    pos = z >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-z[pos]))
    ez = np.exp(z[~pos])
    out[~pos] = ez / (1.0 + ez)
    return out


@dataclass(frozen=True)
class LogisticModel:
    weights: np.ndarray
    bias: float

    @property
    def width(self) -> int:
        return len(self.weights)

    def predict_proba(self, X: np.ndarray) -> np.ndarray:
        X = np.atleast_2d(np.asarray(X, dtype=float))
        if X.shape[1] != self.width:
            raise WidthMismatch(self.width, X.shape[1])
        return _sigmoid(X @ self.weights + self.bias)

    def to_dict(self) -> dict:
        return {"weights": self.weights.tolist(), "bias": self.bias}

    @classmethod
    def from_dict(cls, d: dict) -> "LogisticModel":
        return cls(weights=np.array(d["weights"], dtype=float), bias=float(d["bias"]))


def logistic_loss(X, y, w, b, l2: float) -> float:
    """Mean cross-entropy plus l2 * ||w||^2 (bias unpenalized)."""
    z = X @ w + b
    # log(1 + e^-|z|) form keeps the loss finite for large |z|
    ce = np.mean(np.log1p(np.exp(-np.abs(z))) + np.maximum(z, 0) - y * z)
    return float(ce + l2 * np.dot(w, w))


def logistic_gradient(X, y, w, b, l2: float) -> tuple[np.ndarray, float]:
    p = _sigmoid(X @ w + b)
    err = (p - y) / len(y)
    return X.T @ err + 2.0 * l2 * w, float(err.sum())


def fit_logistic_regression(X, y, learning_rate: float = 0.5, epochs: int = 500,
                            l2: float = 0.0, seed: int = 0) -> LogisticModel:
    """Full-batch gradient descent; the loss is non-increasing across epochs.

    The weight and bias steps halve their rates independently: a heavily
    regularized weight step must not starve the (unpenalized) bias update.
    """
    X = np.asarray(X, dtype=float)
    y = np.asarray(y, dtype=float)
    if len(X) == 0:
        raise BadConfig("empty training set")
    w = np.zeros(X.shape[1])
    b = 0.0
    lr_w = lr_b = learning_rate
    loss = logistic_loss(X, y, w, b, l2)

    def try_step(lr, apply):
        nonlocal loss
        for _ in range(60):
            w_new, b_new = apply(lr)
            loss_new = logistic_loss(X, y, w_new, b_new, l2)
            if not np.isfinite(loss_new):
                raise DivergedTraining(f"loss became {loss_new}")
            if loss_new <= loss + 1e-9:
                loss = loss_new
                return w_new, b_new, lr * 1.1, True
            lr *= 0.5
        return None, None, lr, False

    for _ in range(epochs):
        gw, _ = logistic_gradient(X, y, w, b, l2)
        w_new, b_new, lr_w, ok_w = try_step(lr_w, lambda r: (w - r * gw, b))
        if ok_w:
            w, b = w_new, b_new
        _, gb = logistic_gradient(X, y, w, b, l2)
        w_new, b_new, lr_b, ok_b = try_step(lr_b, lambda r: (w, b - r * gb))
        if ok_b:
            w, b = w_new, b_new
        if not ok_w and not ok_b:
            break
    if not (np.all(np.isfinite(w)) and np.isfinite(b)):
        raise DivergedTraining("non-finite parameters")
    return LogisticModel(weights=w, bias=float(b))


# --- config + persistence ---

MODEL_KINDS = ("forest", "tree", "logistic")


@dataclass(frozen=True)
class ModelConfig:
    kind: str = "forest"
    n_trees: int = 100
    max_depth: int = 8
    min_leaf: int = 1
    feature_subsample: float = 0.6
    learning_rate: float = 0.5
    epochs: int = 500
    l2: float = 1e-4

    def __post_init__(self):
        if self.kind not in MODEL_KINDS:
            raise BadConfig(f"unknown model kind {self.kind!r}")


def fit_model(config: ModelConfig, X, y, seed: int = 0):
    if config.kind == "forest":
        return fit_random_forest(
            X, y, n_trees=config.n_trees, max_depth=config.max_depth,
            feature_subsample=config.feature_subsample, min_leaf=config.min_leaf,
            seed=seed,
        )
    if config.kind == "tree":
        return fit_decision_tree(X, y, max_depth=config.max_depth,
                                 min_leaf=config.min_leaf, seed=seed)
    return fit_logistic_regression(X, y, learning_rate=config.learning_rate,
                                   epochs=config.epochs, l2=config.l2, seed=seed)


_KIND_BY_CLASS = {
    RandomForestModel: "forest",
    DecisionTreeModel: "tree",
    LogisticModel: "logistic",
}
_CLASS_BY_KIND = {v: k for k, v in _KIND_BY_CLASS.items()}


def model_to_document(model, schema) -> dict:
    return {
        "model_kind": _KIND_BY_CLASS[type(model)],
        "schema_fingerprint": schema.fingerprint(),
        "parameters": model.to_dict(),
    }


def model_from_document(doc: dict, schema=None):
    try:
        kind = doc["model_kind"]
        cls = _CLASS_BY_KIND[kind]
        model = cls.from_dict(doc["parameters"])
    except (KeyError, TypeError) as e:
        raise BadModelFile(f"malformed model document: {e}") from None
    if schema is not None and doc.get("schema_fingerprint") != schema.fingerprint():
        raise BadModelFile("model was trained under a different schema")
    return model


def save_model(model, schema, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(model_to_document(model, schema), fh, indent=2, sort_keys=True)
        fh.write("\n")


def load_model(path, schema=None):
    with open(path, encoding="utf-8") as fh:
        return model_from_document(json.load(fh), schema)


def predict_proba(model, encoded) -> np.ndarray:
    """Probability of class 1; predicted class is 1 iff probability >= 0.5."""
    return model.predict_proba(encoded)


def predict_class(model, encoded) -> np.ndarray:
    return (model.predict_proba(encoded) >= 0.5).astype(int)
