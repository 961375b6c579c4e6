"""CART decision tree grown to purity (min leaf 1) on continuous features."""

import numpy as np

from ..util import InvalidArgumentError
from . import _kernel


class CartTree:
    """Array-backed binary tree.  feature[i] == -1 marks a leaf."""

    __slots__ = ("feature", "threshold", "left", "right", "leaf_class", "importance")

    def __init__(self):
        self.feature = []
        self.threshold = []
        self.left = []
        self.right = []
        self.leaf_class = []
        self.importance = None  # per input feature, unnormalized decrease

    def _new_node(self):
        self.feature.append(-1)
        self.threshold.append(0.0)
        self.left.append(-1)
        self.right.append(-1)
        self.leaf_class.append(0)
        return len(self.feature) - 1

    def predict(self, x):
        """Class codes for an (n, p) matrix."""
        n = x.shape[0]
        out = np.empty(n, dtype=np.int64)
        if n == 0:
            return out
        stack = [(0, np.arange(n))]
        feature = self.feature
        while stack:
            node, idx = stack.pop()
            f = feature[node]
            if f < 0:
                out[idx] = self.leaf_class[node]
                continue
            go_left = x[idx, f] <= self.threshold[node]
            left_idx = idx[go_left]
            right_idx = idx[~go_left]
            if len(left_idx):
                stack.append((self.left[node], left_idx))
            if len(right_idx):
                stack.append((self.right[node], right_idx))
        return out

    def to_doc(self):
        return {
            "feature": list(self.feature),
            "threshold": [float(t) for t in self.threshold],
            "left": list(self.left),
            "right": list(self.right),
            "leaf_class": list(self.leaf_class),
            "importance": [float(v) for v in self.importance],
        }

    @classmethod
    def from_doc(cls, doc):
        tree = cls()
        tree.feature = list(doc["feature"])
        tree.threshold = list(doc["threshold"])
        tree.left = list(doc["left"])
        tree.right = list(doc["right"])
        tree.leaf_class = list(doc["leaf_class"])
        tree.importance = np.array(doc["importance"], dtype=float)
        return tree


def grow_tree(x, y, n_classes, rng=None, max_features=None):
    """Fit a CART tree: Gini splits, grown until pure or unsplittable.

    `max_features` < p samples a fresh candidate subset per node (random
    forest behaviour); None considers every feature.
    """
    x = np.ascontiguousarray(x, dtype=np.float64)
    y = np.asarray(y, dtype=np.int64)
    if not np.all(np.isfinite(x)):
        raise InvalidArgumentError("tree input must be finite (impute sentinels first)")
    n, p = x.shape
    tree = CartTree()
    importance = np.zeros(p)
    all_feats = np.arange(p, dtype=np.int64)
    n_total = float(n)

    stack = [(tree._new_node(), np.arange(n))]
    while stack:
        node, idx = stack.pop()
        y_node = y[idx]
        counts = np.bincount(y_node, minlength=n_classes)
        tree.leaf_class[node] = int(np.argmax(counts))  # ties -> lowest class code
        if counts.max() == len(idx):
            continue  # pure
        if max_features is not None and max_features < p:
            feats = np.sort(rng.choice(p, size=max_features, replace=False)).astype(np.int64)
        else:
            feats = all_feats
        x_node = np.ascontiguousarray(x[idx])
        feat, thr, score, n_left = _kernel.best_split(x_node, y_node, n_classes, feats)
        if feat < 0:
            continue  # candidate columns all constant
        n_node = float(len(idx))
        gini_parent = 1.0 - float(np.sum((counts / n_node) ** 2))
        gini_children = 1.0 - score / n_node
        importance[feat] += (n_node / n_total) * (gini_parent - gini_children)
        go_left = x_node[:, feat] <= thr
        tree.feature[node] = int(feat)
        tree.threshold[node] = float(thr)
        left = tree._new_node()
        right = tree._new_node()
        tree.left[node] = left
        tree.right[node] = right
        stack.append((left, idx[go_left]))
        stack.append((right, idx[~go_left]))

    tree.importance = importance
    return tree
