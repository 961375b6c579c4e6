# cython: boundscheck=False, wraparound=False, cdivision=True, language_level=3
"""Compiled best-split search; semantics identical to `_split_py.best_split`.

Scores are built from exact integer class counts, so the compiled and NumPy
kernels agree bit for bit; tie-breaking keeps the first candidate in
(feature, sorted-position) order via a strict > comparison.
"""

import numpy as np

from libc.stdint cimport int64_t


cdef void _sort_pair(double* v, int64_t* lab, Py_ssize_t lo, Py_ssize_t hi) noexcept nogil:
    """Quicksort of v[lo:hi+1] carrying lab along; insertion sort small runs."""
    cdef Py_ssize_t i, j, mid
    cdef double pivot, tv
    cdef int64_t tl
    while hi - lo > 16:
        mid = lo + (hi - lo) // 2
        # median of three -> pivot at mid
        if v[mid] < v[lo]:
            tv = v[mid]; v[mid] = v[lo]; v[lo] = tv
            tl = lab[mid]; lab[mid] = lab[lo]; lab[lo] = tl
        if v[hi] < v[lo]:
            tv = v[hi]; v[hi] = v[lo]; v[lo] = tv
            tl = lab[hi]; lab[hi] = lab[lo]; lab[lo] = tl
        if v[hi] < v[mid]:
            tv = v[hi]; v[hi] = v[mid]; v[mid] = tv
            tl = lab[hi]; lab[hi] = lab[mid]; lab[mid] = tl
        pivot = v[mid]
        i = lo
        j = hi
        while i <= j:
            while v[i] < pivot:
                i += 1
            while v[j] > pivot:
                j -= 1
            if i <= j:
                tv = v[i]; v[i] = v[j]; v[j] = tv
                tl = lab[i]; lab[i] = lab[j]; lab[j] = tl
                i += 1
                j -= 1
        if j - lo < hi - i:
            _sort_pair(v, lab, lo, j)
            lo = i
        else:
            _sort_pair(v, lab, i, hi)
            hi = j
    # insertion sort for the remaining short run
    for i in range(lo + 1, hi + 1):
        tv = v[i]
        tl = lab[i]
        j = i - 1
        while j >= lo and v[j] > tv:
            v[j + 1] = v[j]
            lab[j + 1] = lab[j]
            j -= 1
        v[j + 1] = tv
        lab[j + 1] = tl


def best_split(double[:, ::1] x, int64_t[:] y, int n_classes, int64_t[:] feats):
    """See `_split_py.best_split` for the contract."""
    cdef Py_ssize_t n = x.shape[0]
    cdef Py_ssize_t k = feats.shape[0]
    if n < 2 or k == 0:
        return -1, 0.0, -np.inf, 0

    v_arr = np.empty(n, dtype=np.float64)
    lab_arr = np.empty(n, dtype=np.int64)
    cl_arr = np.zeros(n_classes, dtype=np.float64)
    tot_arr = np.zeros(n_classes, dtype=np.float64)
    cdef double[::1] v = v_arr
    cdef int64_t[::1] lab = lab_arr
    cdef double[::1] cl = cl_arr
    cdef double[::1] tot = tot_arr

    cdef Py_ssize_t i, fi, c
    cdef int64_t f
    cdef double sl, sr, rc, score, thr
    cdef double best_score = -np.inf
    cdef double best_thr = 0.0
    cdef int64_t best_feat = -1
    cdef Py_ssize_t best_nl = 0

    for c in range(n_classes):
        tot[c] = 0.0
    for i in range(n):
        tot[y[i]] += 1.0

    for fi in range(k):
        f = feats[fi]
        for i in range(n):
            v[i] = x[i, f]
            lab[i] = y[i]
        _sort_pair(&v[0], &lab[0], 0, n - 1)
        for c in range(n_classes):
            cl[c] = 0.0
        for i in range(n - 1):
            cl[lab[i]] += 1.0
            if v[i] == v[i + 1]:
                continue
            sl = 0.0
            sr = 0.0
            for c in range(n_classes):
                sl += cl[c] * cl[c]
                rc = tot[c] - cl[c]
                sr += rc * rc
            score = sl / <double>(i + 1) + sr / <double>(n - i - 1)
            if score > best_score:
                best_score = score
                best_feat = f
                thr = (v[i] + v[i + 1]) * 0.5
                if thr >= v[i + 1]:
                    thr = v[i]
                best_thr = thr
                best_nl = i + 1

    if best_feat < 0:
        return -1, 0.0, -np.inf, 0
    return int(best_feat), float(best_thr), float(best_score), int(best_nl)
