"""Evaluation metrics for binary classifiers.

Positive class is 1 throughout. Scalar metrics follow the usual
zero-denominator conventions (precision/recall fall back to 0, Jaccard
of two empty sets is 1); :func:`full_report` records whenever one of
those conventions fired.

Two identities are guaranteed bitwise, not just to rounding:

* ``hamming_loss == 1 - accuracy`` (the loss is computed as the
  complement of accuracy rather than by a second division);
* trapezoidal AUC equals the Mann-Whitney pair statistic with ties
  counted half (the curve keeps integer TP/FP counts and the area is
  formed as one exact integer ratio).
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .data import validate_labels
from .errors import BadBeta, DimensionMismatch, LengthMismatch, NonFiniteInput, SingleClassTruth

__all__ = [
    "ConfusionMatrix",
    "RocCurve",
    "MetricsReport",
    "confusion",
    "accuracy",
    "precision_recall",
    "f_beta",
    "hamming_loss",
    "jaccard",
    "roc_curve",
    "auc",
    "full_report",
    "roc_csv",
]


def _check_pair(y: np.ndarray, yhat: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    y = validate_labels(np.asarray(y))
    yhat = validate_labels(np.asarray(yhat))
    if len(y) != len(yhat):
        raise LengthMismatch(f"{len(y)} true labels vs {len(yhat)} predictions")
    if len(y) == 0:
        raise LengthMismatch("need at least one sample")
    return y, yhat


def _check_scores(y: np.ndarray, scores: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    y = validate_labels(np.asarray(y))
    s = np.asarray(scores, dtype=np.float64)
    if s.ndim != 1:
        raise DimensionMismatch(f"scores must be 1-D, got shape {s.shape}")
    if len(y) != len(s):
        raise LengthMismatch(f"{len(y)} labels vs {len(s)} scores")
    if not np.isfinite(s).all():
        raise NonFiniteInput("scores contain NaN or infinite entries")
    return y, s


@dataclass(frozen=True)
class ConfusionMatrix:
    """2x2 contingency counts with class 1 as positive."""

    tp: int
    fp: int
    fn: int
    tn: int

    def __post_init__(self):
        if min(self.tp, self.fp, self.fn, self.tn) < 0:
            raise ValueError("confusion counts must be non-negative")

    @property
    def n(self) -> int:
        return self.tp + self.fp + self.fn + self.tn

    @property
    def support(self) -> tuple[int, int]:
        """True-class sizes as (class 0, class 1)."""
        return (self.tn + self.fp, self.tp + self.fn)


def confusion(y, yhat) -> ConfusionMatrix:
    """Count tp/fp/fn/tn for label vectors of equal length."""
    y, yhat = _check_pair(y, yhat)
    tp = int(np.sum((y == 1) & (yhat == 1)))
    fp = int(np.sum((y == 0) & (yhat == 1)))
    fn = int(np.sum((y == 1) & (yhat == 0)))
    tn = int(np.sum((y == 0) & (yhat == 0)))
    return ConfusionMatrix(tp, fp, fn, tn)


def accuracy(y, yhat) -> float:
    """Fraction of matching labels."""
    cm = confusion(y, yhat)
    return (cm.tp + cm.tn) / cm.n


def hamming_loss(y, yhat) -> float:
    """Fraction of mismatched labels.

    Computed as ``1.0 - accuracy`` so the binary single-label identity
    holds bitwise (two independent divisions can disagree in the last
    ulp; the complement cannot).
    """
    return 1.0 - accuracy(y, yhat)


def _ratio(num: int, den: int) -> tuple[float, bool]:
    """num/den with the 0/0 -> 0 convention; second value marks the fallback."""
    if den == 0:
        return 0.0, True
    return num / den, False


def _per_class_pr(cm: ConfusionMatrix) -> tuple[tuple[float, float], tuple[float, float], list[str]]:
    """Per-class (precision, recall) as ((P0, P1), (R0, R1)) plus convention flags."""
    flags: list[str] = []
    p1, f = _ratio(cm.tp, cm.tp + cm.fp)
    if f:
        flags.append("precision[class 1]: nothing predicted positive, set to 0")
    p0, f = _ratio(cm.tn, cm.tn + cm.fn)
    if f:
        flags.append("precision[class 0]: nothing predicted negative, set to 0")
    r1, f = _ratio(cm.tp, cm.tp + cm.fn)
    if f:
        flags.append("recall[class 1]: no true positives, set to 0")
    r0, f = _ratio(cm.tn, cm.tn + cm.fp)
    if f:
        flags.append("recall[class 0]: no true negatives, set to 0")
    return (p0, p1), (r0, r1), flags


def precision_recall(cm: ConfusionMatrix, averaging: str = "per_class"):
    """Precision and recall from a confusion matrix.

    averaging:
      * ``per_class``: returns ``((P0, P1), (R0, R1))``
      * ``macro``: unweighted class mean, returns ``(P, R)``
      * ``weighted``: true-support-weighted class mean, returns ``(P, R)``
    """
    (p0, p1), (r0, r1), _ = _per_class_pr(cm)
    if averaging == "per_class":
        return (p0, p1), (r0, r1)
    if averaging == "macro":
        return (p0 + p1) / 2.0, (r0 + r1) / 2.0
    if averaging == "weighted":
        n0, n1 = cm.support
        n = cm.n
        return (n0 * p0 + n1 * p1) / n, (n0 * r0 + n1 * r1) / n
    raise ValueError(f"unknown averaging {averaging!r}")


def f_beta(precision: float, recall: float, beta: float) -> float:
    """F_beta = (1 + b^2) P R / (b^2 P + R); 0 when P = R = 0.

    beta > 1 weights recall more, beta < 1 weights precision more,
    beta = 1 is the harmonic mean.
    """
    if not np.isfinite(beta) or beta <= 0:
        raise BadBeta(f"beta must be positive and finite, got {beta}")
    b2 = beta * beta
    den = b2 * precision + recall
    if den == 0.0:
        return 0.0
    return (1.0 + b2) * precision * recall / den


def jaccard(y, yhat, averaging: str = "class1") -> float:
    """Intersection over union of predicted and true index sets.

    ``class1`` scores the positive-label sets: tp / (tp + fp + fn).
    ``macro`` averages that with the symmetric class-0 score. Two empty
    sets (empty union) score 1 by convention.
    """
    cm = confusion(y, yhat)
    j1, _ = _ratio(cm.tp, cm.tp + cm.fp + cm.fn)
    if cm.tp + cm.fp + cm.fn == 0:
        j1 = 1.0
    if averaging == "class1":
        return j1
    if averaging == "macro":
        j0, _ = _ratio(cm.tn, cm.tn + cm.fn + cm.fp)
        if cm.tn + cm.fn + cm.fp == 0:
            j0 = 1.0
        return (j0 + j1) / 2.0
    raise ValueError(f"unknown averaging {averaging!r}")


@dataclass(frozen=True)
class RocCurve:
    """ROC curve kept as exact integer counts.

    Row k gives the cumulative true/false positive counts among samples
    with score >= ``thresholds[k]``. Row 0 is the ``+inf`` sentinel
    (0, 0); the last row is (n_neg, n_pos), i.e. the (1, 1) corner.
    """

    thresholds: np.ndarray  # float64, descending, thresholds[0] = +inf
    tp_counts: np.ndarray  # int64, non-decreasing, starts 0
    fp_counts: np.ndarray  # int64, non-decreasing, starts 0
    n_pos: int
    n_neg: int

    def __post_init__(self):
        for name in ("thresholds", "tp_counts", "fp_counts"):
            a = getattr(self, name)
            a.setflags(write=False)

    @property
    def tpr(self) -> np.ndarray:
        return self.tp_counts / self.n_pos

    @property
    def fpr(self) -> np.ndarray:
        return self.fp_counts / self.n_neg

    def points(self) -> list[tuple[float, float, float]]:
        """(threshold, fpr, tpr) triples from (0,0) to (1,1)."""
        return list(zip(self.thresholds.tolist(), self.fpr.tolist(), self.tpr.tolist()))


def roc_curve(y, scores) -> RocCurve:
    """ROC points over descending distinct score thresholds.

    Tied scores collapse into a single point, which is what makes the
    trapezoidal area agree with the ties-count-half pair statistic.
    """
    y, s = _check_scores(y, scores)
    n_pos = int(np.sum(y == 1))
    n_neg = len(y) - n_pos
    if n_pos == 0 or n_neg == 0:
        raise SingleClassTruth(
            f"ROC needs both classes in the truth vector, got {n_pos} positives of {len(y)}"
        )
    order = np.argsort(-s, kind="stable")
    s_sorted = s[order]
    y_sorted = y[order]
    cum_tp = np.cumsum(y_sorted == 1)
    cum_fp = np.cumsum(y_sorted == 0)
    # last index of each run of equal scores
    last_of_group = np.r_[np.flatnonzero(np.diff(s_sorted) != 0.0), len(s) - 1]
    thresholds = np.r_[np.inf, s_sorted[last_of_group]]
    tp = np.r_[0, cum_tp[last_of_group]].astype(np.int64)
    fp = np.r_[0, cum_fp[last_of_group]].astype(np.int64)
    return RocCurve(thresholds=thresholds, tp_counts=tp, fp_counts=fp,
                    n_pos=n_pos, n_neg=n_neg)


def auc(curve: RocCurve) -> float:
    """Trapezoidal area under the ROC curve as one exact integer ratio.

    Sum over segments of (dFP) * (TP_left + TP_right) equals twice the
    Mann-Whitney count (correct pairs plus half the ties), and the
    denominator 2 * n_pos * n_neg completes both readings, so the two
    definitions coincide bitwise.
    """
    tp = curve.tp_counts
    fp = curve.fp_counts
    num = int(np.sum((fp[1:] - fp[:-1]) * (tp[1:] + tp[:-1])))
    den = 2 * curve.n_pos * curve.n_neg
    return num / den


def roc_csv(curve: RocCurve) -> str:
    """CSV text for a curve: header ``threshold,fpr,tpr``, shortest
    round-trip decimals, one row per point."""
    lines = ["threshold,fpr,tpr"]
    for t, x, yv in curve.points():
        lines.append(f"{t!r},{x!r},{yv!r}")
    return "\n".join(lines) + "\n"


@dataclass(frozen=True)
class MetricsReport:
    """Every evaluation quantity for one (truth, score) pairing."""

    counts: ConfusionMatrix
    accuracy: float
    hamming_loss: float
    precision_per_class: tuple[float, float]  # (class 0, class 1)
    recall_per_class: tuple[float, float]
    precision_macro: float
    precision_weighted: float
    recall_macro: float
    recall_weighted: float
    f1_macro: float
    f1_weighted: float
    f_half_macro: float  # beta = 0.5, precision-leaning
    f2_macro: float  # beta = 2, recall-leaning
    jaccard_class1: float
    jaccard_macro: float
    auc: float
    roc: RocCurve
    threshold: float
    flags: tuple[str, ...] = field(default=())

    def scalars(self) -> dict[str, float]:
        """Flat name -> value mapping of every scalar metric."""
        return {
            "accuracy": self.accuracy,
            "hamming_loss": self.hamming_loss,
            "precision_class0": self.precision_per_class[0],
            "precision_class1": self.precision_per_class[1],
            "recall_class0": self.recall_per_class[0],
            "recall_class1": self.recall_per_class[1],
            "precision_macro": self.precision_macro,
            "precision_weighted": self.precision_weighted,
            "recall_macro": self.recall_macro,
            "recall_weighted": self.recall_weighted,
            "f1_macro": self.f1_macro,
            "f1_weighted": self.f1_weighted,
            "f_half_macro": self.f_half_macro,
            "f2_macro": self.f2_macro,
            "jaccard_class1": self.jaccard_class1,
            "jaccard_macro": self.jaccard_macro,
            "auc": self.auc,
        }


def full_report(y, scores, threshold: float = 0.5) -> MetricsReport:
    """Assemble every metric; hard labels are ``score >= threshold``."""
    y, s = _check_scores(y, scores)
    yhat = (s >= threshold).astype(np.int8)
    cm = confusion(y, yhat)

    (p0, p1), (r0, r1), flags = _per_class_pr(cm)
    n0, n1 = cm.support
    n = cm.n
    acc = (cm.tp + cm.tn) / n

    f1_c = (f_beta(p0, r0, 1.0), f_beta(p1, r1, 1.0))
    fh_c = (f_beta(p0, r0, 0.5), f_beta(p1, r1, 0.5))
    f2_c = (f_beta(p0, r0, 2.0), f_beta(p1, r1, 2.0))

    j1 = jaccard(y, yhat, "class1")
    if cm.tp + cm.fp + cm.fn == 0:
        flags = flags + ["jaccard[class 1]: empty union, set to 1"]
    jm = jaccard(y, yhat, "macro")
    if cm.tn + cm.fn + cm.fp == 0:
        flags = flags + ["jaccard[class 0]: empty union, set to 1"]

    curve = roc_curve(y, s)

    return MetricsReport(
        counts=cm,
        accuracy=acc,
        hamming_loss=1.0 - acc,
        precision_per_class=(p0, p1),
        recall_per_class=(r0, r1),
        precision_macro=(p0 + p1) / 2.0,
        precision_weighted=(n0 * p0 + n1 * p1) / n,
        recall_macro=(r0 + r1) / 2.0,
        recall_weighted=(n0 * r0 + n1 * r1) / n,
        f1_macro=(f1_c[0] + f1_c[1]) / 2.0,
        f1_weighted=(n0 * f1_c[0] + n1 * f1_c[1]) / n,
        f_half_macro=(fh_c[0] + fh_c[1]) / 2.0,
        f2_macro=(f2_c[0] + f2_c[1]) / 2.0,
        jaccard_class1=j1,
        jaccard_macro=jm,
        auc=auc(curve),
        roc=curve,
        threshold=threshold,
        flags=tuple(flags),
    )
