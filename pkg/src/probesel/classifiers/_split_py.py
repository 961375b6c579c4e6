"""Pure NumPy best-split search, the fallback twin of `_split_fast`.

Both kernels must return bit-identical results.  The score maximized is
sum_c nL_c^2/nL + sum_c nR_c^2/nR, whose terms are exact small integers in
float64, so the only rounding happens in the two divisions and one addition --
written as the same expression in both kernels.  Ties keep the first candidate
in (feature, sorted-position) order.
"""

import numpy as np


def best_split(x, y, n_classes, feats):
    """Best Gini split over the candidate features.

    x: (n, p) float64, rows of the current node.
    y: (n,) int64 class codes.
    feats: ascending int64 array of candidate feature indices.

    Returns (feature, threshold, score, n_left); feature is -1 when no
    candidate splits the node (all candidate columns constant).
    """
    n = x.shape[0]
    if n < 2:
        return -1, 0.0, -np.inf, 0
    xs = x[:, feats]
    order = np.argsort(xs, axis=0, kind="stable")
    sv = np.take_along_axis(xs, order, axis=0)
    sy = y[order]
    onehot = sy[:, :, None] == np.arange(n_classes)
    cum = np.cumsum(onehot, axis=0).astype(np.float64)
    total = cum[-1]
    cl = cum[:-1]
    cr = total[None, :, :] - cl
    sl = np.sum(cl * cl, axis=2)
    sr = np.sum(cr * cr, axis=2)
    nl = np.arange(1, n, dtype=np.float64)[:, None]
    nr = np.float64(n) - nl
    score = sl / nl + sr / nr
    score[sv[:-1] == sv[1:]] = -np.inf
    st = score.T  # feature-major order for first-max tie-breaking
    flat = int(np.argmax(st))
    best = st.flat[flat]
    if not np.isfinite(best):
        return -1, 0.0, -np.inf, 0
    fi, pos = divmod(flat, n - 1)
    lo = sv[pos, fi]
    hi = sv[pos + 1, fi]
    thr = (lo + hi) * 0.5
    if thr >= hi:  # midpoint rounded up to the right value
        thr = lo
    return int(feats[fi]), float(thr), float(best), pos + 1
