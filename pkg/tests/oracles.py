"""Independent oracle implementations shared by unit and acceptance tests.

Each oracle deliberately recomputes its target quantity through a different
route than the library (exhaustive enumeration, exact rational arithmetic,
direct counting), so agreement is meaningful.
"""

from fractions import Fraction

import numpy as np


def gini_oracle(x, y, n_classes):
    """Exhaustive best-split search with exact Fraction impurities.

    Returns (best_weighted_child_impurity, winners) where winners is the set
    of (feature, sorted-position) pairs attaining the optimum, or (None, set())
    when no candidate split exists.
    """
    n, p = x.shape
    best = None
    winners = set()
    totals = np.bincount(y, minlength=n_classes)
    for f in range(p):
        order = np.argsort(x[:, f], kind="stable")
        sv = x[order, f]
        sy = y[order]
        counts_left = [0] * n_classes
        for i in range(n - 1):
            counts_left[sy[i]] += 1
            if sv[i] == sv[i + 1]:
                continue
            nl = i + 1
            nr = n - nl
            sl = sum(Fraction(c * c, nl) for c in counts_left)
            sr = sum(Fraction(int(t - c) ** 2, nr) for t, c in zip(totals, counts_left))
            impurity = 1 - Fraction(sl + sr, n)
            if best is None or impurity < best:
                best = impurity
                winners = {(f, i)}
            elif impurity == best:
                winners.add((f, i))
    return best, winners


def exact_impurity_of_split(x, y, n_classes, feat, thr):
    """Exact weighted child impurity of one concrete (feature, threshold)."""
    left = y[x[:, feat] <= thr]
    right = y[x[:, feat] > thr]
    n = len(y)
    sl = sum(Fraction(int(c) ** 2, len(left)) for c in np.bincount(left, minlength=n_classes))
    sr = sum(Fraction(int(c) ** 2, len(right)) for c in np.bincount(right, minlength=n_classes))
    return 1 - Fraction(sl + sr, n)


def ks_brute_force(a, b):
    """KS statistic by evaluating both ECDFs at every pooled point, counting."""
    best = 0.0
    for point in list(a) + list(b):
        fa = sum(1 for v in a if v <= point) / len(a)
        fb = sum(1 for v in b if v <= point) / len(b)
        best = max(best, abs(fa - fb))
    return best


def vdc_reference(n_points):
    """One-dimensional Sobol values: base-2 radical inverse of Gray(index)."""
    out = []
    for n in range(1, n_points + 1):
        gray = n ^ (n >> 1)
        value = 0.0
        for bit in range(32):
            if (gray >> bit) & 1:
                value += 2.0 ** -(bit + 1)
        out.append(value)
    return np.array(out)
