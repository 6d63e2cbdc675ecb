"""Ranking metrics and the nearest-neighbor baseline.

Scores are normality scores throughout: higher means more normal.
Tie handling is part of the contract: AUROC uses midranks, the
recall-at-FPR threshold counts strictly-greater scores, and the
contamination threshold flags exactly the configured number of rows
(stable order on ties).
"""

from dataclasses import dataclass, field

import numpy as np

from . import kernels
from .errors import ContractError, UndefinedMetricError


def _check_scored(scores, labels):
    s = np.asarray(scores, dtype=np.float64)
    y = np.asarray(labels)
    if s.shape != y.shape or s.ndim != 1:
        raise ContractError("scores and labels must be equal-length 1-D arrays")
    if not np.isfinite(s).all():
        raise ContractError("scores must be finite")
    return s, y


def _midranks(values: np.ndarray) -> np.ndarray:
    """1-based ranks with ties averaged."""
    order = np.argsort(values, kind="mergesort")
    ranks = np.empty(len(values))
    sv = values[order]
    i = 0
    while i < len(sv):
        j = i
        while j + 1 < len(sv) and sv[j + 1] == sv[i]:
            j += 1
        ranks[order[i : j + 1]] = 0.5 * (i + j) + 1.0
        i = j + 1
    return ranks


def auroc(scores, labels) -> float:
    """P(score of a normal row > score of an anomalous row) + half ties.

    Computed from the midrank sum; equals exhaustive pair counting.
    """
    s, y = _check_scored(scores, labels)
    pos = y == 1
    n_pos = int(pos.sum())
    n_neg = len(y) - n_pos
    if n_pos == 0 or n_neg == 0:
        raise UndefinedMetricError("AUROC needs at least one row of each label")
    ranks = _midranks(s)
    return float((ranks[pos].sum() - n_pos * (n_pos + 1) / 2.0) / (n_pos * n_neg))


def f1_at_contamination(scores, labels, ratio: float):
    """Flag the k lowest-scoring rows as anomalies, k = round(ratio * n)
    half away from zero; F1 treats anomaly (-1) as the positive class.

    Returns (f1, precision, recall, threshold).
    """
    s, y = _check_scored(scores, labels)
    if not 0.0 < ratio < 1.0:
        raise ContractError("contamination ratio must be in (0, 1)")
    n = len(s)
    k = int(np.floor(ratio * n + 0.5))
    if k == 0 or k == n:
        raise ContractError(f"ratio {ratio} flags {k} of {n} rows")
    order = np.argsort(s, kind="mergesort")
    flagged = order[:k]
    threshold = float(s[flagged[-1]])
    tp = int((y[flagged] == -1).sum())
    actual_neg = int((y == -1).sum())
    precision = tp / k
    recall = tp / actual_neg if actual_neg > 0 else 0.0
    f1 = 2 * precision * recall / (precision + recall) if (precision + recall) > 0 else 0.0
    return f1, precision, recall, threshold


def recall_at_fpr(pos_scores, neg_scores, fpr: float):
    """Recall of positives at a threshold capping the FPR on negatives.

    The threshold is the inverted-CDF (1 - fpr)-quantile of the negative
    scores, so the realized FPR never exceeds the target; recall counts
    positives strictly above it. Returns (recall, threshold).
    """
    pos = np.asarray(pos_scores, dtype=np.float64)
    neg = np.asarray(neg_scores, dtype=np.float64)
    if not 0.0 < fpr < 1.0:
        raise ContractError("fpr must be in (0, 1)")
    if pos.size == 0 or neg.size == 0:
        raise ContractError("need nonempty positive and negative scores")
    n = neg.size
    k = int(np.ceil(n * (1.0 - fpr))) - 1
    k = min(max(k, 0), n - 1)
    threshold = float(np.sort(neg, kind="mergesort")[k])
    recall = float((pos > threshold).mean())
    return recall, threshold


def nearest_neighbor_scores(train_features, X) -> np.ndarray:
    """Normality score -min_i |x - train_i| (brute force, exact)."""
    T = np.ascontiguousarray(train_features, dtype=np.float64)
    Q = np.ascontiguousarray(X, dtype=np.float64)
    if Q.ndim == 1:
        Q = Q[None, :]
    if T.shape[0] == 0:
        raise ContractError("train set must be nonempty")
    if T.shape[1] != Q.shape[1]:
        raise ContractError("dimension mismatch between train set and queries")
    return -kernels.min_distances(T, Q)


@dataclass
class EvalReport:
    """Metric bundle for one scored evaluation set."""

    auroc: float
    f1: float
    precision: float
    recall: float
    recall_at_fpr: dict[float, float] = field(default_factory=dict)
    f1_threshold: float = float("nan")
    fpr_thresholds: dict[float, float] = field(default_factory=dict)
    n_pos: int = 0
    n_neg: int = 0
    contamination: float = float("nan")
    threshold_source: str = "test"

    def to_text(self) -> str:
        lines = [
            f"auroc = {self.auroc:.10f}",
            f"f1 = {self.f1:.10f}",
            f"precision = {self.precision:.10f}",
            f"recall = {self.recall:.10f}",
            f"f1_threshold = {self.f1_threshold:.10g}",
            f"contamination = {self.contamination:.10g}",
            f"n_pos = {self.n_pos}",
            f"n_neg = {self.n_neg}",
            f"threshold_source = {self.threshold_source}",
        ]
        for fpr in sorted(self.recall_at_fpr):
            lines.append(f"recall_at_fpr_{fpr:g} = {self.recall_at_fpr[fpr]:.10f}")
            lines.append(f"threshold_at_fpr_{fpr:g} = {self.fpr_thresholds[fpr]:.10g}")
        return "\n".join(lines) + "\n"


def evaluate(
    scores,
    labels,
    fpr_targets=(0.03, 0.05),
    contamination: float | None = None,
    threshold_source: str = "test",
) -> EvalReport:
    """Full report for one scored set; contamination defaults to the true
    anomaly fraction of the set."""
    s, y = _check_scored(scores, labels)
    pos = y == 1
    n_pos = int(pos.sum())
    n_neg = len(y) - n_pos
    if contamination is None:
        contamination = n_neg / len(y)
    f1, precision, recall, thr = f1_at_contamination(s, y, contamination)
    report = EvalReport(
        auroc=auroc(s, y),
        f1=f1,
        precision=precision,
        recall=recall,
        f1_threshold=thr,
        n_pos=n_pos,
        n_neg=n_neg,
        contamination=contamination,
        threshold_source=threshold_source,
    )
    for fpr in fpr_targets:
        r, t = recall_at_fpr(s[pos], s[~pos], fpr)
        report.recall_at_fpr[fpr] = r
        report.fpr_thresholds[fpr] = t
    return report
