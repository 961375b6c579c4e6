"""Principal component analysis helpers (mean-centered, deterministic signs)."""

import numpy as np

from ..util import InvalidArgumentError


def _fix_signs(components):
    """Largest-magnitude entry of each component made positive, in place."""
    for row in components:
        j = int(np.argmax(np.abs(row)))
        if row[j] < 0:
            row *= -1.0
    return components


def pca(x, k):
    """Top-k principal components of the rows of x.

    Returns (components (k, p), explained_variance (k,), projected (n, k)).
    Components are orthonormal with non-increasing explained variance.
    """
    x = np.asarray(x, dtype=float)
    n, p = x.shape
    if not 1 <= k <= min(n, p):
        raise InvalidArgumentError(f"k must be in 1..min(n, p) = {min(n, p)}, got {k}")
    mean = x.mean(axis=0)
    xc = x - mean
    _, s, vt = np.linalg.svd(xc, full_matrices=False)
    components = _fix_signs(vt[:k].copy())
    explained = (s[:k] ** 2) / max(n - 1, 1)
    projected = xc @ components.T
    return components, explained, projected


def full_basis(x):
    """Full orthonormal eigenbasis of the column covariance of x.

    Unlike economy SVD this always yields a square (p, p) rotation, even for
    rank-deficient samples, which the rotation forest relies on.  Rows are
    components sorted by decreasing variance.
    """
    x = np.asarray(x, dtype=float)
    n, p = x.shape
    if n < 2:
        return np.eye(p), np.zeros(p)
    xc = x - x.mean(axis=0)
    cov = (xc.T @ xc) / (n - 1)
    evals, evecs = np.linalg.eigh((cov + cov.T) / 2.0)
    order = np.argsort(evals, kind="stable")[::-1]
    components = _fix_signs(evecs[:, order].T.copy())
    return components, evals[order]
