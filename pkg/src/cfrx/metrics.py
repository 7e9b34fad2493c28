"""Evaluation machinery: confusion matrix, threshold metrics, rank-based
ROC-AUC, and k-fold cross-validation with optional training-fold oversampling.
"""

from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np

from .data import Dataset, kfold_split, smote_oversample
from .errors import LengthMismatch, SingleClassLabels
from .models import ModelConfig, fit_model


def confusion_matrix(predictions, labels) -> dict:
    predictions = np.asarray(predictions, dtype=int)
    labels = np.asarray(labels, dtype=int)
    if len(predictions) != len(labels):
        raise LengthMismatch(f"{len(predictions)} predictions vs {len(labels)} labels")
    return {
        "tn": int(((labels == 0) & (predictions == 0)).sum()),
        "fp": int(((labels == 0) & (predictions == 1)).sum()),
        "fn": int(((labels == 1) & (predictions == 0)).sum()),
        "tp": int(((labels == 1) & (predictions == 1)).sum()),
    }


def roc_auc(scores, labels) -> float:
    """Pairwise concordance probability, ties counted 0.5 (Mann-Whitney)."""
    scores = np.asarray(scores, dtype=float)
    labels = np.asarray(labels, dtype=int)
    n_pos = int((labels == 1).sum())
    n_neg = int((labels == 0).sum())
    if n_pos == 0 or n_neg == 0:
        raise SingleClassLabels("ROC-AUC needs both classes")
    order = np.argsort(scores, kind="stable")
    ranks = np.empty(len(scores))
    sorted_scores = scores[order]
    # average ranks over tied score groups
    i = 0
    while i < len(scores):
        j = i
        while j + 1 < len(scores) and sorted_scores[j + 1] == sorted_scores[i]:
            j += 1
        ranks[order[i:j + 1]] = 0.5 * (i + j) + 1.0
        i = j + 1
    rank_sum_pos = float(ranks[labels == 1].sum())
    return (rank_sum_pos - n_pos * (n_pos + 1) / 2.0) / (n_pos * n_neg)


@dataclass(frozen=True)
class MetricsReport:
    accuracy: float
    f1: float
    precision: float
    recall: float
    roc_auc: float | None
    confusion: dict
    n: int
    roc_auc_error: str | None = None

    def to_dict(self) -> dict:
        return {
            "accuracy": self.accuracy,
            "f1": self.f1,
            "precision": self.precision,
            "recall": self.recall,
            "roc_auc": self.roc_auc,
            "confusion": dict(self.confusion),
            "n": self.n,
            "roc_auc_error": self.roc_auc_error,
        }


def _prf_weighted(cm: dict) -> tuple[float, float, float]:
    """Precision/recall/F1 per class, weighted by label frequency.

    An empty denominator contributes 0 for that class.
    """
    tn, fp, fn, tp = cm["tn"], cm["fp"], cm["fn"], cm["tp"]
    n = tn + fp + fn + tp
    stats = []
    for actual, predicted, correct in (
        (tn + fp, tn + fn, tn),  # class 0
        (tp + fn, tp + fp, tp),  # class 1
    ):
        prec = correct / predicted if predicted else 0.0
        rec = correct / actual if actual else 0.0
        f1 = 2 * prec * rec / (prec + rec) if prec + rec else 0.0
        stats.append((actual / n, prec, rec, f1))
    precision = sum(wt * p for wt, p, _, _ in stats)
    recall = sum(wt * r for wt, _, r, _ in stats)
    f1 = sum(wt * f for wt, _, _, f in stats)
    return precision, recall, f1


def compute_metrics(scores, labels, threshold: float = 0.5) -> MetricsReport:
    """Threshold at `threshold` (ties predict class 1) and report accuracy,
    frequency-weighted precision/recall/F1, and rank-based ROC-AUC.

    With single-class labels the ROC-AUC is reported as an error and the
    remaining metrics are still returned.
    """
    scores = np.asarray(scores, dtype=float)
    labels = np.asarray(labels, dtype=int)
    if len(scores) != len(labels):
        raise LengthMismatch(f"{len(scores)} scores vs {len(labels)} labels")
    preds = (scores >= threshold).astype(int)
    cm = confusion_matrix(preds, labels)
    n = len(labels)
    accuracy = (cm["tn"] + cm["tp"]) / n
    precision, recall, f1 = _prf_weighted(cm)
    try:
        auc = roc_auc(scores, labels)
        auc_err = None
    except SingleClassLabels as e:
        auc = None
        auc_err = str(e)
    return MetricsReport(
        accuracy=accuracy, f1=f1, precision=precision, recall=recall,
        roc_auc=auc, confusion=cm, n=n, roc_auc_error=auc_err,
    )


def metrics_from_confusion(cm: dict, scores=None, labels=None) -> MetricsReport:
    """Report derived from explicit confusion counts (no scores available);
    ROC-AUC comes along only when scores are supplied."""
    n = cm["tn"] + cm["fp"] + cm["fn"] + cm["tp"]
    precision, recall, f1 = _prf_weighted(cm)
    report = MetricsReport(
        accuracy=(cm["tn"] + cm["tp"]) / n,
        f1=f1, precision=precision, recall=recall,
        roc_auc=None, confusion=dict(cm), n=n,
        roc_auc_error="no scores supplied",
    )
    if scores is not None and labels is not None:
        report = replace(report, roc_auc=roc_auc(scores, labels), roc_auc_error=None)
    return report


@dataclass(frozen=True)
class CrossValidationResult:
    fold_reports: tuple[MetricsReport, ...]
    mean_report: MetricsReport

    def to_dict(self) -> dict:
        return {
            "folds": [r.to_dict() for r in self.fold_reports],
            "mean": self.mean_report.to_dict(),
        }


def _mean_reports(reports) -> MetricsReport:
    """Scalar metrics averaged across folds; confusion counts pooled."""
    def avg(vals):
        vals = [v for v in vals if v is not None]
        return float(np.mean(vals)) if vals else None

    pooled = {k: sum(r.confusion[k] for r in reports) for k in ("tn", "fp", "fn", "tp")}
    aucs = [r.roc_auc for r in reports]
    return MetricsReport(
        accuracy=avg([r.accuracy for r in reports]),
        f1=avg([r.f1 for r in reports]),
        precision=avg([r.precision for r in reports]),
        recall=avg([r.recall for r in reports]),
        roc_auc=avg(aucs) if all(a is not None for a in aucs) else None,
        confusion=pooled,
        n=sum(r.n for r in reports),
        roc_auc_error=None if all(a is not None for a in aucs) else "undefined in some fold",
    )


def cross_validate(dataset: Dataset, config: ModelConfig, k: int = 5,
                   seed: int = 0, smote: bool = False,
                   smote_k: int = 5) -> CrossValidationResult:
    """Train on k-1 folds, evaluate on the held-out fold.

    Oversampling, when enabled, touches the training folds only; validation
    rows are scored as-is.
    """
    folds = kfold_split(dataset, k, seed=seed)
    fold_seeds = np.random.SeedSequence(seed).spawn(k)
    reports = []
    for i, (train_idx, val_idx) in enumerate(folds):
        train = dataset.subset(train_idx)
        val = dataset.subset(val_idx)
        fold_seed = int(fold_seeds[i].generate_state(1)[0] % (2 ** 31))
        if smote:
            train = smote_oversample(train, k_neighbors=smote_k, seed=fold_seed)
        model = fit_model(config, train.encoded(), train.y, seed=fold_seed)
        scores = model.predict_proba(val.encoded())
        reports.append(compute_metrics(scores, val.y))
    return CrossValidationResult(tuple(reports), _mean_reports(reports))
