"""Change-frequency feature importance.

A feature's local importance at one instance is the fraction of that
instance's counterfactuals in which it changed; global importance averages
the local scores across a dataset. Instances whose generation fails are
counted in `failures`, not silently folded into the mean.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .cftypes import CFQuery, canonical_json
from .data import Dataset
from .errors import AllGenerationsFailed, GenerationFailed, NoCounterfactualFound
from .schema import FeatureSchema
from .search import generate_diverse_cfs, predicted_class

LOCAL = "local"
GLOBAL = "global"


@dataclass(frozen=True)
class ImportanceReport:
    scope: str
    scores: dict[str, float]
    k_per_instance: int
    instances_covered: int
    failures: int

    def ranked(self) -> list[tuple[str, float]]:
        """Features sorted by descending score, name-ascending on ties."""
        return sorted(self.scores.items(), key=lambda kv: (-kv[1], kv[0]))

    def to_dict(self) -> dict:
        return {
            "scope": self.scope,
            "scores": {k: float(v) for k, v in self.scores.items()},
            "k_per_instance": self.k_per_instance,
            "instances_covered": self.instances_covered,
            "failures": self.failures,
        }

    def to_json(self) -> str:
        return canonical_json(self.to_dict())

    @classmethod
    def from_dict(cls, d: dict) -> "ImportanceReport":
        return cls(
            scope=d["scope"],
            scores=dict(d["scores"]),
            k_per_instance=d["k_per_instance"],
            instances_covered=d["instances_covered"],
            failures=d["failures"],
        )


def local_importance(origin, model, schema: FeatureSchema, mads=None, k: int = 10,
                     constraints=frozenset(), seed: int = 0, budget: int = 20000,
                     lambda1: float = 0.5, lambda2: float = 1.0,
                     **search_kwargs) -> ImportanceReport:
    """Generate k counterfactuals toward the opposite of the model's current
    prediction and score each feature by how often it changed."""
    origin = np.asarray(origin, dtype=float)
    p = float(model.predict_proba(schema.encode_batch(origin.reshape(1, -1)))[0])
    target = 1 - predicted_class(p)
    query = CFQuery(
        origin=origin, target_class=target, k=k,
        immutable=frozenset(constraints), seed=seed, budget=budget,
        lambda1=lambda1, lambda2=lambda2,
    )
    try:
        result = generate_diverse_cfs(query, model, schema, mads=mads, **search_kwargs)
    except NoCounterfactualFound as e:
        raise GenerationFailed(str(e)) from e
    counts = {f.name: 0 for f in schema.features}
    for cf in result.cfs:
        for entry in cf.diff:
            counts[entry.feature] += 1
    n = len(result.cfs)
    return ImportanceReport(
        scope=LOCAL,
        scores={name: c / n for name, c in counts.items()},
        k_per_instance=k,
        instances_covered=1,
        failures=0,
    )


def global_importance(dataset: Dataset, model, schema: FeatureSchema, mads=None,
                      k: int = 10, seed: int = 0, budget: int = 20000,
                      limit: int | None = None, **search_kwargs) -> ImportanceReport:
    """Mean of per-instance local scores over instances whose generation
    succeeded. Per-instance seeds derive from the master seed, so the
    aggregate does not depend on evaluation order. `limit` caps how many
    rows are explained (None = all)."""
    n = len(dataset) if limit is None else min(limit, len(dataset))
    if n == 0:
        raise AllGenerationsFailed("empty dataset")
    instance_seeds = np.random.SeedSequence(seed).spawn(n)
    totals = np.zeros(schema.n_features)
    successes = 0
    failures = 0
    names = schema.feature_names
    for i in range(n):
        child_seed = int(instance_seeds[i].generate_state(1)[0] % (2 ** 31))
        try:
            local = local_importance(
                dataset.X[i], model, schema, mads=mads, k=k,
                seed=child_seed, budget=budget, **search_kwargs)
        except GenerationFailed:
            failures += 1
            continue
        totals += np.array([local.scores[name] for name in names])
        successes += 1
    if successes == 0:
        raise AllGenerationsFailed(f"all {n} generations failed")
    means = totals / successes
    return ImportanceReport(
        scope=GLOBAL,
        scores={name: float(means[j]) for j, name in enumerate(names)},
        k_per_instance=k,
        instances_covered=successes,
        failures=failures,
    )


def importance_to_csv(report: ImportanceReport) -> str:
    """Sorted (feature, score) rows for charting."""
    lines = ["feature,score"]
    for name, score in report.ranked():
        lines.append(f"{name},{score}")
    return "\n".join(lines) + "\n"
