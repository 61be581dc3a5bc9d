import math

import numpy as np
import pytest
from sklearn.metrics import roc_auc_score

from phishlens.errors import SingleClass
from phishlens.evaluation import compute_metrics, confusion, log_loss, rates, roc_auc
from phishlens.evaluation.metrics import rank_auc
from phishlens.protocol import ConfusionMatrix, PredictionRecord


def record(truth, predicted=None, probability=0.5, email_id=0):
    predicted = predicted or truth
    return PredictionRecord(
        email_id=email_id,
        condition="noURL",
        repetition=0,
        truth=truth,
        predicted=predicted,
        probability=probability,
        correct=truth == predicted,
    )


def records_from(tp, fp, tn, fn):
    rows = (
        [("phishing", "phishing", 0.9)] * tp
        + [("legit", "phishing", 0.7)] * fp
        + [("legit", "legit", 0.1)] * tn
        + [("phishing", "legit", 0.3)] * fn
    )
    return [record(t, p, q, i) for i, (t, p, q) in enumerate(rows)]


def test_confusion_tallies():
    assert confusion([record("phishing"), record("legit")]) == ConfusionMatrix(tp=1, fp=0, tn=1, fn=0)
    assert confusion([]) == ConfusionMatrix()
    assert confusion(records_from(1970, 74, 1926, 30)) == ConfusionMatrix(tp=1970, fp=74, tn=1926, fn=30)


@pytest.mark.parametrize(
    "counts, expected",
    [
        ((1970, 74, 1926, 30), (0.964, 0.985, 0.974, 0.974)),
        ((2000, 4, 1996, 0), (0.998, 1.000, 0.999, 0.999)),
    ],
)
def test_reference_rows(counts, expected):
    report = compute_metrics(records_from(*counts))
    assert (report.precision, report.recall, report.accuracy, report.f1) == pytest.approx(expected, abs=5e-4)
    assert report.n_correct == counts[0] + counts[2]
    assert report.n_wrong == counts[1] + counts[3]


def test_zero_denominators_are_flagged():
    values, undefined = rates(ConfusionMatrix(tp=0, fp=0, tn=5, fn=0))
    assert values["precision"] == 0.0
    assert values["recall"] == 0.0
    assert set(undefined) == {"precision", "recall", "f1"}


def test_identities_hold_for_random_matrices():
    rng = np.random.default_rng(7)
    for tp, fp, tn, fn in rng.integers(0, 50, size=(200, 4)):
        cm = ConfusionMatrix(tp=int(tp), fp=int(fp), tn=int(tn), fn=int(fn))
        if cm.n == 0:
            continue
        values, _ = rates(cm)
        assert values["accuracy"] == (cm.tp + cm.tn) / cm.n
        if 2 * cm.tp + cm.fp + cm.fn:
            assert values["f1"] == 2 * cm.tp / (2 * cm.tp + cm.fp + cm.fn)


def test_log_loss_of_a_coin_flip():
    assert log_loss([record("phishing", probability=0.5)]) == pytest.approx(math.log(2))


def test_log_loss_clips_certain_mistakes():
    value = log_loss([record("phishing", "legit", probability=0.0)], eps=1e-15)
    assert value == pytest.approx(-math.log(1e-15))


@pytest.mark.parametrize("eps", [0.0, 0.5, -1.0])
def test_log_loss_eps_range(eps):
    with pytest.raises(ValueError):
        log_loss([record("phishing")], eps=eps)


def test_auc_extremes_and_ties():
    separated = [record("phishing", probability=0.9, email_id=i) for i in range(3)] + [
        record("legit", probability=0.1, email_id=3 + i) for i in range(3)
    ]
    inverted = [r.model_copy(update={"probability": 1 - r.probability}) for r in separated]
    tied = [record("phishing", probability=0.8), record("legit", probability=0.8, email_id=1)]

    assert roc_auc(separated) == 1.0
    assert roc_auc(inverted) == 0.0
    assert roc_auc(tied) == 0.5


def test_auc_needs_both_classes():
    with pytest.raises(SingleClass):
        roc_auc([record("phishing"), record("phishing", email_id=1)])
    report = compute_metrics([record("phishing")], require_auc=False)
    assert report.roc_auc is None
    assert "roc_auc" in report.undefined


def test_rank_auc_matches_trapezoidal_integration():
    rng = np.random.default_rng(11)
    for _ in range(200):
        n = int(rng.integers(2, 1000))
        y = rng.integers(0, 2, size=n)
        if y.min() == y.max():
            y[0] = 1 - y[0]
        # Rounded scores so that ties occur.
        q = np.round(rng.random(n), 2)
        assert rank_auc(y, q) == pytest.approx(roc_auc_score(y, q), abs=1e-12)


def test_auc_complement_symmetry():
    rng = np.random.default_rng(3)
    y = rng.integers(0, 2, size=300)
    q = np.round(rng.random(300), 2)
    assert rank_auc(1 - y, 1 - q) == pytest.approx(rank_auc(y, q), abs=1e-12)
    assert rank_auc(y, 1 - q) == pytest.approx(1 - rank_auc(y, q), abs=1e-12)


def test_unconfident_records_are_counted():
    report = compute_metrics(
        [record("phishing", "legit", 0.2), record("legit", "legit", 0.1, email_id=1)]
    )
    # -ln(0.2) > 1, -ln(0.9) < 1
    assert report.n_unconfident == 1
