import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from cfrx import (
    ModelConfig,
    compute_metrics,
    confusion_matrix,
    cross_validate,
    roc_auc,
    standard_synth_config,
    synth_generate,
)
from cfrx.errors import LengthMismatch, SingleClassLabels
from cfrx.metrics import metrics_from_confusion


def scores_for_confusion(tn, fp, fn, tp):
    """Synthesize a (scores, labels) pair that thresholds into these counts."""
    scores = [0.1] * tn + [0.9] * fp + [0.1] * fn + [0.9] * tp
    labels = [0] * (tn + fp) + [1] * (fn + tp)
    return np.array(scores), np.array(labels)


class TestConfusionMatrix:
    def test_reference_counts(self):
        # 1121 of each class; 931 and 974 classified correctly
        preds = [0] * 931 + [1] * 190 + [0] * 147 + [1] * 974
        labels = [0] * 1121 + [1] * 1121
        cm = confusion_matrix(preds, labels)
        assert cm == {"tn": 931, "fp": 190, "fn": 147, "tp": 974}

    def test_all_correct(self):
        cm = confusion_matrix([0, 1, 1, 0], [0, 1, 1, 0])
        assert cm["fp"] == 0 and cm["fn"] == 0

    def test_all_flipped(self):
        cm = confusion_matrix([1, 0, 0, 1], [0, 1, 1, 0])
        assert cm["tn"] == 0 and cm["tp"] == 0

    def test_length_mismatch(self):
        with pytest.raises(LengthMismatch):
            confusion_matrix([0, 1], [0])


class TestComputeMetrics:
    def test_reference_accuracy(self):
        scores, labels = scores_for_confusion(tn=931, fp=190, fn=147, tp=974)
        report = compute_metrics(scores, labels)
        assert report.accuracy == pytest.approx((931 + 974) / 2242, abs=1e-12)
        assert report.accuracy == pytest.approx(0.8497, abs=1e-4)
        assert report.confusion == {"tn": 931, "fp": 190, "fn": 147, "tp": 974}

    def test_perfect_scores(self):
        report = compute_metrics([0.1, 0.2, 0.9, 0.8], [0, 0, 1, 1])
        assert report.accuracy == 1.0
        assert report.f1 == 1.0
        assert report.precision == 1.0
        assert report.recall == 1.0
        assert report.roc_auc == 1.0

    def test_counts_sum_and_accuracy_identity(self):
        rng = np.random.default_rng(1)
        scores = rng.random(200)
        labels = rng.integers(0, 2, 200)
        report = compute_metrics(scores, labels)
        cm = report.confusion
        assert cm["tn"] + cm["fp"] + cm["fn"] + cm["tp"] == 200
        assert report.accuracy == pytest.approx((cm["tn"] + cm["tp"]) / 200, abs=1e-12)

    def test_single_class_reports_auc_error(self):
        report = compute_metrics([0.2, 0.7], [1, 1])
        assert report.roc_auc is None
        assert report.roc_auc_error is not None
        assert report.accuracy == 0.5  # 0.2 thresholds to class 0

    def test_threshold_tie_predicts_class_one(self):
        report = compute_metrics([0.5], [1])
        assert report.accuracy == 1.0

    def test_from_confusion_counts(self):
        report = metrics_from_confusion({"tn": 931, "fp": 190, "fn": 147, "tp": 974})
        assert report.accuracy == pytest.approx(0.8497, abs=1e-4)
        assert report.n == 2242


def brute_force_auc(scores, labels):
    """Concordant-pair counting, ties worth half."""
    scores = np.asarray(scores, dtype=float)
    pos = scores[np.asarray(labels) == 1]
    neg = scores[np.asarray(labels) == 0]
    total = 0.0
    for p in pos:
        for q in neg:
            if p > q:
                total += 1.0
            elif p == q:
                total += 0.5
    return total / (len(pos) * len(neg))


class TestRocAuc:
    def test_hand_computed_case(self):
        # pairs: (0.35 vs 0.1)+ (0.35 vs 0.4)- (0.8 vs 0.1)+ (0.8 vs 0.4)+
        assert roc_auc([0.1, 0.4, 0.35, 0.8], [0, 0, 1, 1]) == pytest.approx(0.75)

    def test_matches_pair_counting_oracle(self):
        rng = np.random.default_rng(9)
        for _ in range(20):
            n = rng.integers(4, 40)
            scores = rng.choice([0.1, 0.25, 0.5, 0.6, 0.9], size=n)  # force ties
            labels = rng.integers(0, 2, n)
            if labels.min() == labels.max():
                continue
            assert roc_auc(scores, labels) == pytest.approx(
                brute_force_auc(scores, labels), abs=1e-12)

    @given(st.integers(0, 2 ** 31 - 1))
    @settings(max_examples=25)
    def test_invariant_under_monotone_transform(self, seed):
        rng = np.random.default_rng(seed)
        scores = rng.random(30)
        labels = rng.integers(0, 2, 30)
        if labels.min() == labels.max():
            return
        base = roc_auc(scores, labels)
        assert roc_auc(np.exp(3 * scores), labels) == pytest.approx(base, abs=1e-12)
        assert roc_auc(scores ** 3 + 7, labels) == pytest.approx(base, abs=1e-12)

    def test_single_class_raises(self):
        with pytest.raises(SingleClassLabels):
            roc_auc([0.5, 0.6], [1, 1])


class TestCrossValidate:
    def test_five_folds_of_twenty(self):
        ds = synth_generate(standard_synth_config(n_rows=100), seed=3)
        result = cross_validate(ds, ModelConfig(kind="tree", max_depth=4), k=5, seed=1)
        assert len(result.fold_reports) == 5
        assert all(r.n == 20 for r in result.fold_reports)

    def test_mean_is_arithmetic_mean(self):
        ds = synth_generate(standard_synth_config(n_rows=100), seed=3)
        result = cross_validate(ds, ModelConfig(kind="tree", max_depth=4), k=5, seed=1)
        for attr in ("accuracy", "f1", "precision", "recall", "roc_auc"):
            folds = [getattr(r, attr) for r in result.fold_reports]
            assert getattr(result.mean_report, attr) == pytest.approx(np.mean(folds))

    def test_forest_on_noiseless_rule(self):
        ds = synth_generate(standard_synth_config(n_rows=800, noise_rate=0.0), seed=2)
        config = ModelConfig(kind="forest", n_trees=60, max_depth=8)
        result = cross_validate(ds, config, k=5, seed=0)
        assert result.mean_report.accuracy >= 0.95

    def test_smote_only_touches_training_folds(self):
        # fold sizes must match the raw dataset even when oversampling is on
        ds = synth_generate(standard_synth_config(n_rows=90), seed=5)
        result = cross_validate(ds, ModelConfig(kind="tree", max_depth=3), k=3, seed=2, smote=True)
        assert sum(r.n for r in result.fold_reports) == 90
