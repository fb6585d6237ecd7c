"""ROC curves, AUROC, TPR at a fixed FPR and the fraud rank sum.

Convention throughout: a higher score means "more anomalous" and label 1
marks an anomaly. Tied scores form one threshold step, so the ROC has a
diagonal segment there and the area equals the Mann-Whitney statistic with
half credit per tie.
"""

from __future__ import annotations

from dataclasses import asdict, dataclass, field

import numpy as np

from ._backend import kernels
from .geometry import atomic_write_text


@dataclass(frozen=True)
class RocCurve:
    fpr: np.ndarray
    tpr: np.ndarray
    thresholds: np.ndarray
    auroc: float

    @property
    def points(self) -> list[tuple[float, float, float]]:
        return list(zip(self.fpr.tolist(), self.tpr.tolist(), self.thresholds.tolist()))

    def to_csv(self, path) -> None:
        lines = ["fpr,tpr,threshold"]
        lines += [f"{f!r},{t!r},{th!r}" for f, t, th in self.points]
        atomic_write_text(path, "\n".join(lines) + "\n")


@dataclass
class ScoreReport:
    method_name: str
    auroc: float
    tpr_at_fpr: dict[str, float] = field(default_factory=dict)
    wall_clock_seconds: float = 0.0
    extra: dict = field(default_factory=dict)

    def __post_init__(self):
        if not 0.0 <= self.auroc <= 1.0:
            raise ValueError(f"auroc {self.auroc} outside [0, 1]")

    def to_dict(self) -> dict:
        return asdict(self)


def _check(scores, labels) -> tuple[np.ndarray, np.ndarray]:
    s = np.asarray(scores, dtype=np.float64).ravel()
    y = np.asarray(labels).ravel()
    if s.shape != y.shape:
        raise ValueError(f"{s.size} scores for {y.size} labels")
    if not np.all(np.isfinite(s)):
        raise ValueError("scores must be finite")
    k = int(np.count_nonzero(y == 1))
    if k == 0 or k == y.size or np.count_nonzero((y == 0) | (y == 1)) != y.size:
        raise ValueError("labels must be binary with both classes present")
    return s, y.astype(np.int8)


def auroc(scores, labels) -> float:
    """Rank-based (Mann-Whitney) AUROC in O(N log N)."""
    s, y = _check(scores, labels)
    return float(kernels.auroc(s, y))


def roc_curve(scores, labels) -> RocCurve:
    s, y = _check(scores, labels)
    order = np.argsort(-s, kind="stable")
    s_sorted = s[order]
    y_sorted = y[order]
    # last index of each group of equal scores
    ends = np.flatnonzero(np.diff(s_sorted) != 0)
    ends = np.append(ends, s.size - 1)
    tp = np.cumsum(y_sorted)[ends].astype(np.int64)
    fp = (ends + 1) - tp
    tp = np.concatenate([[0], tp])
    fp = np.concatenate([[0], fp])
    n_pos = int(tp[-1])
    n_neg = int(fp[-1])
    # integer trapezoid: twice the area times n_pos * n_neg is an exact integer
    area2 = int(np.sum(np.diff(fp) * (tp[1:] + tp[:-1])))
    return RocCurve(
        fpr=fp / n_neg,
        tpr=tp / n_pos,
        thresholds=np.concatenate([[np.inf], s_sorted[ends]]),
        auroc=area2 / (2.0 * n_pos * n_neg),
    )


def tpr_at_fpr(curve: RocCurve, fpr_target: float) -> float:
    """TPR linearly interpolated at ``fpr_target``.

    Where the curve is vertical at exactly that FPR, the highest TPR is used.
    """
    if curve.fpr.size == 0:
        raise ValueError("empty ROC curve")
    if not 0.0 < fpr_target < 1.0:
        raise ValueError(f"fpr_target must lie in (0, 1), got {fpr_target}")
    fpr, tpr = curve.fpr, curve.tpr
    j = int(np.searchsorted(fpr, fpr_target, side="right")) - 1
    if fpr[j] == fpr_target or j == fpr.size - 1:
        return float(tpr[j])
    w = (fpr_target - fpr[j]) / (fpr[j + 1] - fpr[j])
    return float(tpr[j] + w * (tpr[j + 1] - tpr[j]))


def tpr_at_fpr_scores(scores, labels, fpr_target: float) -> float:
    return tpr_at_fpr(roc_curve(scores, labels), fpr_target)


def fraud_rank_sum(scores, labels) -> float:
    """Sum of anomaly ranks when sorted by descending score (rank 0 = top).

    Tied scores share the average of their ranks, so the result is a
    half-integer when ties straddle an odd number of positions; otherwise
    it is an integer. ``auroc == 1 - (rank_sum - k(k-1)/2) / (k (N-k))``.
    """
    s, y = _check(scores, labels)
    k = int(y.sum())
    n = s.size
    u = kernels.mw_u(s[y == 0], s[y == 1])
    # ascending anomaly rank sum R = U + k(k-1)/2; descending = k(N-1) - R
    return float(k * (n - 1) - (u + k * (k - 1) / 2.0))


def auroc_from_rank_sum(rank_sum: float, n_anomalies: int, n_total: int) -> float:
    k = n_anomalies
    return 1.0 - (rank_sum - k * (k - 1) / 2.0) / (k * (n_total - k))
