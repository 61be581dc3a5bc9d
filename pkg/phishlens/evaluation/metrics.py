from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np
from scipy.stats import rankdata
from sklearn.metrics import confusion_matrix

from phishlens.errors import SingleClass
from phishlens.protocol import ConfusionMatrix, MetricsReport, PredictionRecord

DEFAULT_EPS = 1e-15
# A record whose own log-loss reaches this value is reported as unconfident.
UNCONFIDENT_LOG_LOSS = 1.0


def _arrays(records: Sequence[PredictionRecord]) -> Tuple[np.ndarray, np.ndarray]:
    y = np.array([1 if r.truth == "phishing" else 0 for r in records], dtype=np.int64)
    q = np.array([r.probability for r in records], dtype=np.float64)
    return y, q


def confusion(records: Sequence[PredictionRecord]) -> ConfusionMatrix:
    """Tallies with phishing as the positive class."""
    if not records:
        return ConfusionMatrix()
    truth = [r.truth for r in records]
    predicted = [r.predicted for r in records]
    (tn, fp), (fn, tp) = confusion_matrix(truth, predicted, labels=["legit", "phishing"])
    return ConfusionMatrix(tp=int(tp), fp=int(fp), tn=int(tn), fn=int(fn))


def _ratio(num: float, den: float, name: str, undefined: List[str]) -> float:
    if den == 0:
        undefined.append(name)
        return 0.0
    return num / den


def rates(cm: ConfusionMatrix) -> Tuple[Dict[str, float], List[str]]:
    """
    precision, recall, accuracy and f1 of a confusion matrix. Metrics with a
    zero denominator are 0 and named in the returned list.
    """
    undefined: List[str] = []
    precision = _ratio(cm.tp, cm.tp + cm.fp, "precision", undefined)
    recall = _ratio(cm.tp, cm.tp + cm.fn, "recall", undefined)
    accuracy = _ratio(cm.tp + cm.tn, cm.n, "accuracy", undefined)
    f1 = _ratio(2 * cm.tp, 2 * cm.tp + cm.fp + cm.fn, "f1", undefined)
    return {"precision": precision, "recall": recall, "accuracy": accuracy, "f1": f1}, undefined


def per_record_log_loss(y: np.ndarray, q: np.ndarray, eps: float = DEFAULT_EPS) -> np.ndarray:
    q = np.clip(q, eps, 1.0 - eps)
    return -(y * np.log(q) + (1 - y) * np.log(1.0 - q))


def log_loss(records: Sequence[PredictionRecord], eps: float = DEFAULT_EPS) -> float:
    if not 0.0 < eps < 0.5:
        raise ValueError("eps must lie in (0, 0.5)")
    if not records:
        return 0.0
    y, q = _arrays(records)
    return float(np.mean(per_record_log_loss(y, q, eps)))


def rank_auc(y: np.ndarray, q: np.ndarray) -> float:
    """Mann-Whitney form: P(positive outranks negative), ties counted 1/2."""
    n_pos = int(y.sum())
    n_neg = int(len(y) - n_pos)
    if n_pos == 0 or n_neg == 0:
        raise SingleClass("roc_auc needs both classes")
    ranks = rankdata(q, method="average")
    return float((ranks[y == 1].sum() - n_pos * (n_pos + 1) / 2.0) / (n_pos * n_neg))


def roc_auc(records: Sequence[PredictionRecord]) -> float:
    y, q = _arrays(records)
    return rank_auc(y, q)


def compute_metrics(
    records: Sequence[PredictionRecord],
    eps: float = DEFAULT_EPS,
    require_auc: bool = True,
) -> MetricsReport:
    """
    Classification metrics of a set of prediction records.

    Args:
        records: predictions of one (condition, repetition).
        eps: probability clipping for log-loss, in (0, 0.5).
        require_auc: raise SingleClass when a class is missing; otherwise
            roc_auc is reported as None.
    """
    cm = confusion(records)
    values, undefined = rates(cm)

    auc: Optional[float]
    try:
        auc = roc_auc(records)
    except SingleClass:
        if require_auc:
            raise
        auc = None
        undefined.append("roc_auc")

    n_unconfident = 0
    if records:
        y, q = _arrays(records)
        n_unconfident = int((per_record_log_loss(y, q, eps) >= UNCONFIDENT_LOG_LOSS).sum())

    n_correct = cm.tp + cm.tn
    return MetricsReport(
        **values,
        log_loss=log_loss(records, eps),
        roc_auc=auc,
        n_correct=n_correct,
        n_wrong=cm.n - n_correct,
        n_unconfident=n_unconfident,
        undefined=undefined,
    )
