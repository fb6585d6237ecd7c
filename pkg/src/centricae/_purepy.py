"""Numpy implementations of the scoring kernels.

Always importable; used when the compiled ``_kernels`` module is missing or
``CENTRICAE_PURE_PYTHON`` is set. Function signatures and results match the
Cython module exactly (the Mann-Whitney count is an exact half-integer sum).
"""

import numpy as np


def mw_u(neg, pos):
    """Mann-Whitney U of ``pos`` over ``neg``, ties counted as one half."""
    neg = np.sort(np.asarray(neg, dtype=np.float64))
    pos = np.asarray(pos, dtype=np.float64)
    lo = np.searchsorted(neg, pos, side="left")
    hi = np.searchsorted(neg, pos, side="right")
    return float(lo.sum()) + 0.5 * float((hi - lo).sum())


def auroc(scores, labels):
    scores = np.asarray(scores, dtype=np.float64)
    mask = np.asarray(labels).astype(bool)
    neg = scores[~mask]
    pos = scores[mask]
    return mw_u(neg, pos) / (neg.shape[0] * pos.shape[0])


def weighted_sq_sum(dev2, w):
    """Row sums of ``dev2 * w``: squared radii after a per-axis deformation."""
    return np.asarray(dev2, dtype=np.float64) @ np.asarray(w, dtype=np.float64)


def deformed_auroc(neg_dev2, pos_dev2, w):
    neg = weighted_sq_sum(neg_dev2, w)
    pos = weighted_sq_sum(pos_dev2, w)
    return mw_u(neg, pos) / (neg.shape[0] * pos.shape[0])


def axis_auroc(neg_rest, neg_col, pos_rest, pos_col, w):
    """AUROC of ``rest + w * col`` split by class; one axis varies, the rest is frozen."""
    neg = neg_rest + w * neg_col
    pos = pos_rest + w * pos_col
    return mw_u(neg, pos) / (neg.shape[0] * pos.shape[0])
