# cython: boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled scoring kernels (same contract as ``centricae._purepy``).

Squared radii are accumulated row by row without temporaries and the
Mann-Whitney count is a single merge walk over the two sorted classes.
"""

import numpy as np
cimport numpy as cnp

cnp.import_array()


cdef double _merge_count(const double[::1] neg, const double[::1] pos) noexcept nogil:
    # neg and pos both sorted ascending; lo/hi only move forward.
    cdef Py_ssize_t n = neg.shape[0]
    cdef Py_ssize_t k = pos.shape[0]
    cdef Py_ssize_t j, lo = 0, hi = 0
    cdef double v
    cdef double below = 0.0, ties = 0.0
    for j in range(k):
        v = pos[j]
        while lo < n and neg[lo] < v:
            lo += 1
        if hi < lo:
            hi = lo
        while hi < n and neg[hi] <= v:
            hi += 1
        below += lo
        ties += hi - lo
    return below + 0.5 * ties


cdef void _weighted_rows(const double[:, ::1] dev2, const double[::1] w,
                         double[::1] out) noexcept nogil:
    cdef Py_ssize_t n = dev2.shape[0]
    cdef Py_ssize_t d = dev2.shape[1]
    cdef Py_ssize_t i, j
    cdef double acc
    for i in range(n):
        acc = 0.0
        for j in range(d):
            acc = acc + dev2[i, j] * w[j]
        out[i] = acc


def mw_u(neg, pos):
    """Mann-Whitney U of ``pos`` over ``neg``, ties counted as one half."""
    cdef double[::1] sneg = np.sort(np.asarray(neg, dtype=np.float64))
    cdef double[::1] spos = np.sort(np.asarray(pos, dtype=np.float64))
    return _merge_count(sneg, spos)


def auroc(scores, labels):
    scores = np.asarray(scores, dtype=np.float64)
    mask = np.asarray(labels).astype(bool)
    cdef double[::1] sneg = np.sort(scores[~mask])
    cdef double[::1] spos = np.sort(scores[mask])
    return _merge_count(sneg, spos) / (<double>sneg.shape[0] * spos.shape[0])


def weighted_sq_sum(dev2, w):
    cdef const double[:, ::1] d2 = np.ascontiguousarray(dev2, dtype=np.float64)
    cdef const double[::1] ww = np.ascontiguousarray(w, dtype=np.float64)
    out = np.empty(d2.shape[0], dtype=np.float64)
    cdef double[::1] o = out
    with nogil:
        _weighted_rows(d2, ww, o)
    return out


def deformed_auroc(neg_dev2, pos_dev2, w):
    cdef const double[:, ::1] nd = np.ascontiguousarray(neg_dev2, dtype=np.float64)
    cdef const double[:, ::1] pd = np.ascontiguousarray(pos_dev2, dtype=np.float64)
    cdef const double[::1] ww = np.ascontiguousarray(w, dtype=np.float64)
    neg = np.empty(nd.shape[0], dtype=np.float64)
    pos = np.empty(pd.shape[0], dtype=np.float64)
    cdef double[::1] nv = neg
    cdef double[::1] pv = pos
    with nogil:
        _weighted_rows(nd, ww, nv)
        _weighted_rows(pd, ww, pv)
    neg.sort()
    pos.sort()
    return _merge_count(nv, pv) / (<double>nv.shape[0] * pv.shape[0])


def axis_auroc(neg_rest, neg_col, pos_rest, pos_col, double w):
    cdef const double[::1] nr = neg_rest
    cdef const double[::1] nc = neg_col
    cdef const double[::1] pr = pos_rest
    cdef const double[::1] pc = pos_col
    cdef Py_ssize_t n = nr.shape[0], k = pr.shape[0], i
    neg = np.empty(n, dtype=np.float64)
    pos = np.empty(k, dtype=np.float64)
    cdef double[::1] nv = neg
    cdef double[::1] pv = pos
    with nogil:
        for i in range(n):
            nv[i] = nr[i] + w * nc[i]
        for i in range(k):
            pv[i] = pr[i] + w * pc[i]
    neg.sort()
    pos.sort()
    return _merge_count(nv, pv) / (<double>n * k)
