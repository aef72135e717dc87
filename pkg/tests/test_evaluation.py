"""Leave-one-out cross-validation, confusion matrices, and agreement metrics."""

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from tidalbelt.errors import (
    FoldFailureError,
    InsufficientDataError,
    InvalidInputError,
    InvalidLabelError,
)
from tidalbelt.evaluation import (
    ConfusionMatrix,
    cohen_kappa,
    confusion,
    loocv,
    metrics,
    report_to_dict,
)


def _cm(counts, classes=("Obstructed", "Normal"), positive="Obstructed"):
    return ConfusionMatrix(
        classes=tuple(classes),
        counts=tuple(tuple(row) for row in counts),
        positive_class=positive,
    )


class TestLoocv:
    def test_matches_explicit_double_loop(self):
        rng = np.random.default_rng(0)
        xs = rng.normal(size=12)
        ys = 2.0 * xs + rng.normal(scale=0.3, size=12)
        dataset = list(zip(xs.tolist(), ys.tolist()))

        def trainer(rows):
            a = np.array([x for x, _ in rows])
            b = np.array([y for _, y in rows])
            slope = float((a * b).sum() / (a * a).sum())
            return slope

        def predictor(slope, x):
            return slope * x

        got = loocv(dataset, trainer, predictor)
        assert len(got) == 12
        for i, (truth, pred) in enumerate(got):
            rest = dataset[:i] + dataset[i + 1 :]
            slope = trainer(rest)
            assert truth == dataset[i][1]
            assert pred == pytest.approx(slope * dataset[i][0], abs=1e-15)

    def test_two_point_nearest_neighbor(self):
        dataset = [(0.0, "a"), (10.0, "b")]

        def trainer(rows):
            return rows

        def predictor(rows, x):
            return min(rows, key=lambda r: abs(r[0] - x))[1]

        got = loocv(dataset, trainer, predictor)
        # each fold trains on the single other point
        assert got == [("a", "b"), ("b", "a")]

    def test_fold_order_is_dataset_order(self):
        dataset = [(i, i * i) for i in range(8)]
        got = loocv(dataset, lambda rows: None, lambda m, x: -1)
        assert [t for t, _ in got] == [y for _, y in dataset]

    def test_trainer_failure_names_fold(self):
        dataset = [(i, i) for i in range(5)]

        def trainer(rows):
            if len([r for r in rows if r[0] == 3]) == 0:
                raise ValueError("boom")
            return None

        with pytest.raises(FoldFailureError, match="3"):
            loocv(dataset, trainer, lambda m, x: 0)

    def test_needs_two_rows(self):
        with pytest.raises(InsufficientDataError):
            loocv([(1, 2)], lambda rows: None, lambda m, x: 0)

    @given(seed=st.integers(0, 100))
    @settings(max_examples=20, deadline=None)
    def test_prediction_multiset_invariant_under_shuffle(self, seed):
        # 1-NN predictions as a multiset do not depend on dataset order
        # (ties broken by distance value, none occur at random floats)
        rng = np.random.default_rng(seed)
        xs = rng.normal(size=10)
        dataset = [(float(x), "hi" if x > 0 else "lo") for x in xs]

        def trainer(rows):
            return rows

        def predictor(rows, x):
            return min(rows, key=lambda r: abs(r[0] - x))[1]

        base = loocv(dataset, trainer, predictor)
        perm = rng.permutation(10)
        shuffled = [dataset[i] for i in perm]
        moved = loocv(shuffled, trainer, predictor)
        assert sorted(map(str, base)) == sorted(map(str, moved))


class TestConfusion:
    def test_counts_rows_truth_columns_prediction(self):
        pairs = [
            ("Obstructed", "Obstructed"),
            ("Obstructed", "Normal"),
            ("Normal", "Normal"),
            ("Normal", "Normal"),
            ("Normal", "Obstructed"),
        ]
        cm = confusion(pairs, ["Obstructed", "Normal"], "Obstructed")
        assert cm.counts == ((1, 1), (1, 2))
        assert cm.total == 5
        assert cm.row_sum(0) == 2
        assert cm.col_sum(0) == 2

    def test_unknown_label_rejected(self):
        with pytest.raises(InvalidLabelError):
            confusion([("Obstructed", "weird")], ["Obstructed", "Normal"])

    def test_accepts_enum_values(self):
        from tidalbelt.classify import ObstructionLabel

        pairs = [(ObstructionLabel.NORMAL, ObstructionLabel.OBSTRUCTED)]
        cm = confusion(pairs, ["Obstructed", "Normal"], "Obstructed")
        assert cm.counts == ((0, 0), (1, 0))

    def test_positive_class_must_be_listed(self):
        with pytest.raises(InvalidLabelError):
            _cm([[1, 0], [0, 1]], positive="Borked")

    def test_square_shape_enforced(self):
        with pytest.raises(InvalidInputError):
            _cm([[1, 0, 0], [0, 1, 0]])

    def test_negative_counts_rejected(self):
        with pytest.raises(InvalidInputError):
            _cm([[1, -1], [0, 1]])

    def test_empty_rejected(self):
        with pytest.raises(InvalidInputError):
            _cm([[0, 0], [0, 0]])


class TestBinaryMetrics:
    def test_frozen_detection_table(self):
        # 19 true positives, 1 missed, 1 false alarm, 4 true negatives
        rep = metrics(_cm([[19, 1], [1, 4]]))
        assert rep.sensitivity == pytest.approx(0.95, abs=1e-12)
        assert rep.specificity == pytest.approx(0.80, abs=1e-12)
        assert rep.balanced_accuracy == pytest.approx(0.875, abs=1e-12)
        assert rep.f1 == pytest.approx(0.95, abs=1e-12)
        assert rep.raw_accuracy == pytest.approx(23 / 25, abs=1e-12)

    def test_frozen_staging_table(self):
        rep = metrics(_cm([[10, 1], [2, 7]]))
        assert rep.sensitivity == pytest.approx(10 / 11, abs=1e-12)
        assert rep.specificity == pytest.approx(7 / 9, abs=1e-12)
        assert rep.balanced_accuracy == pytest.approx(0.8434, abs=5e-5)
        assert rep.f1 == pytest.approx(0.8696, abs=5e-5)
        assert rep.kappa == pytest.approx(0.6939, abs=5e-5)

    def test_balanced_differs_from_raw_on_imbalance(self):
        rep = metrics(_cm([[19, 1], [1, 4]]))
        assert rep.raw_accuracy != rep.balanced_accuracy
        assert rep.raw_accuracy == pytest.approx(0.92, abs=1e-12)

    def test_f1_ignores_true_negatives(self):
        a = metrics(_cm([[10, 2], [3, 5]]))
        b = metrics(_cm([[10, 2], [3, 500]]))
        assert a.f1 == pytest.approx(b.f1, abs=1e-12)
        assert a.balanced_accuracy != b.balanced_accuracy

    def test_no_positive_truths_marks_undefined(self):
        rep = metrics(_cm([[0, 0], [1, 9]]))
        assert rep.sensitivity is None
        assert "sensitivity" in rep.undefined_metrics
        assert rep.specificity == pytest.approx(0.9)
        assert rep.balanced_accuracy is None

    def test_never_predicted_positive_undefined_precision(self):
        rep = metrics(_cm([[0, 5], [0, 10]]))
        assert rep.precision is None
        assert "precision" in rep.undefined_metrics

    def test_multiclass_has_no_binary_block(self):
        cm = ConfusionMatrix(
            classes=("Mild", "Moderate", "Severe"),
            counts=((5, 1, 0), (1, 4, 1), (0, 2, 6)),
            positive_class=None,
        )
        rep = metrics(cm)
        assert rep.sensitivity is None
        assert rep.per_class["Mild"]["recall"] == pytest.approx(5 / 6)
        assert rep.per_class["Moderate"]["precision"] == pytest.approx(4 / 7)

    def test_per_class_undefined_marked(self):
        cm = ConfusionMatrix(
            classes=("Mild", "Moderate", "Severe"),
            counts=((5, 1, 0), (2, 4, 0), (1, 2, 0)),
            positive_class=None,
        )
        rep = metrics(cm)
        assert rep.per_class["Severe"]["precision"] is None
        assert "precision[Severe]" in rep.undefined_metrics


class TestCohenKappa:
    def test_perfect_agreement(self):
        assert cohen_kappa(_cm([[12, 0], [0, 8]])) == pytest.approx(1.0)

    def test_transpose_symmetric(self):
        counts = [[10, 3], [2, 7]]
        t = [list(r) for r in zip(*counts)]
        assert cohen_kappa(_cm(counts)) == pytest.approx(
            cohen_kappa(_cm(t)), abs=1e-15
        )

    def test_chance_level_is_zero(self):
        # independent marginals: observed agreement equals expected
        assert cohen_kappa(_cm([[4, 6], [6, 9]])) == pytest.approx(
            0.0, abs=1e-12
        )

    def test_single_marginal_undefined(self):
        # both raters always say the positive class: p_e = 1
        assert cohen_kappa(_cm([[20, 0], [0, 0]], positive="Obstructed")) is None

    def test_hand_computed_value(self):
        # po = 17/25, pe = (11*12 + 14*13)/625
        cm = _cm([[9, 2], [3, 11]])
        po = 20 / 25
        pe = (12 * 11 + 13 * 14) / 625
        assert cohen_kappa(cm) == pytest.approx((po - pe) / (1 - pe), abs=1e-12)

    def test_multiclass_against_sklearn_formula(self):
        counts = ((5, 1, 0), (1, 4, 1), (0, 2, 6))
        cm = ConfusionMatrix(
            classes=("a", "b", "c"), counts=counts, positive_class=None
        )
        arr = np.array(counts, dtype=float)
        n = arr.sum()
        po = np.trace(arr) / n
        pe = float((arr.sum(axis=1) * arr.sum(axis=0)).sum()) / n**2
        assert cohen_kappa(cm) == pytest.approx((po - pe) / (1 - pe), abs=1e-12)


class TestReportDict:
    def test_shape_and_values(self):
        cm = _cm([[19, 1], [1, 4]])
        rep = metrics(cm)
        doc = report_to_dict("detect", cm, rep)
        assert doc["task"] == "detect"
        assert doc["n"] == 25
        assert doc["classes"] == ["Obstructed", "Normal"]
        assert doc["confusion"] == [[19, 1], [1, 4]]
        assert doc["metrics"]["sensitivity"] == pytest.approx(0.95)
        assert doc["metrics"]["balanced_accuracy"] == pytest.approx(0.875)

    def test_undefined_metrics_serialized_as_null(self):
        cm = _cm([[0, 0], [1, 9]])
        rep = metrics(cm)
        doc = report_to_dict("detect", cm, rep)
        assert doc["metrics"]["sensitivity"] is None
        assert "sensitivity" in doc["undefined_metrics"]
