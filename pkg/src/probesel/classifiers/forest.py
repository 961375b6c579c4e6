"""Random forests on feature vectors and rotation forests on raw series.

Both ensembles share the CART tree from `tree.py`, vote by majority with ties
broken toward the lowest class code, impute sentinel (NaN) entries with the
training-fold median stored in the model, and serialize to versioned JSON that
round-trips predictions bit-exactly.
"""

import json
from dataclasses import dataclass, field

import numpy as np

from ..util import InvalidArgumentError, make_rng
from .pca import full_basis
from .tree import CartTree, grow_tree

RANDOM_FOREST = "random_forest"
ROTATION_FOREST = "rotation_forest"

DEFAULT_RF_TREES = 100
DEFAULT_ROTF_TREES = 10
DEFAULT_ROTF_GROUPS = 3
ROTF_SAMPLE_FRACTION = 0.75


@dataclass
class TrainedModel:
    kind: str
    classes: list
    n_features: int
    impute_values: np.ndarray
    trees: list = field(default_factory=list)
    rotations: list = field(default_factory=list)  # per tree: list of (idx, mean, comps)
    degenerate: bool = False
    seed: int = 0


def _prepare(x, y):
    x = np.asarray(x, dtype=float)
    y = np.asarray(y)
    if x.ndim != 2 or len(y) != x.shape[0]:
        raise InvalidArgumentError("X must be (n, p) with one label per row")
    classes = sorted(set(y.tolist()))
    codes = np.array([classes.index(v) for v in y.tolist()], dtype=np.int64)
    return x, codes, classes


def _impute_fit(x):
    """Training medians per column, NaN-aware; all-NaN columns impute to 0."""
    with np.errstate(all="ignore"):
        med = np.nanmedian(x, axis=0)
    return np.where(np.isfinite(med), med, 0.0)


def _impute_apply(x, values):
    x = np.array(x, dtype=float)
    bad = ~np.isfinite(x)
    if bad.any():
        x[bad] = np.broadcast_to(values, x.shape)[bad]
    return x


def fit_random_forest(x, y, n_trees=DEFAULT_RF_TREES, seed=0):
    """Bootstrap forest, sqrt(p) features per split, grown to purity."""
    x, codes, classes = _prepare(x, y)
    if x.shape[0] < 1:
        raise InvalidArgumentError("empty training set")
    impute = _impute_fit(x)
    model = TrainedModel(
        kind=RANDOM_FOREST,
        classes=classes,
        n_features=x.shape[1],
        impute_values=impute,
        seed=seed,
    )
    if len(classes) < 2:
        model.degenerate = True
        return model
    xi = _impute_apply(x, impute)
    n, p = xi.shape
    max_features = max(1, int(np.sqrt(p)))
    for t in range(n_trees):
        rng = make_rng("rf", seed, t)
        boot = rng.integers(0, n, n)
        model.trees.append(
            grow_tree(xi[boot], codes[boot], len(classes), rng, max_features=max_features)
        )
    return model


def fit_rotation_forest(
    x,
    y,
    n_trees=DEFAULT_ROTF_TREES,
    n_groups=DEFAULT_ROTF_GROUPS,
    seed=0,
):
    """Rotation forest: per tree, block-diagonal PCA rotation then full CART."""
    x, codes, classes = _prepare(x, y)
    n, p = x.shape
    if p < n_groups:
        raise InvalidArgumentError(f"need at least {n_groups} features, got {p}")
    impute = _impute_fit(x)
    model = TrainedModel(
        kind=ROTATION_FOREST,
        classes=classes,
        n_features=p,
        impute_values=impute,
        seed=seed,
    )
    if len(classes) < 2:
        model.degenerate = True
        return model
    xi = _impute_apply(x, impute)
    n_classes = len(classes)
    for t in range(n_trees):
        rng = make_rng("rotf", seed, t)
        perm = rng.permutation(p)
        groups = np.array_split(perm, n_groups)
        blocks = []
        for g in groups:
            g = np.sort(g)
            n_sub = int(rng.integers(1, n_classes + 1))
            chosen = rng.choice(n_classes, size=n_sub, replace=False)
            rows = np.flatnonzero(np.isin(codes, chosen))
            size = max(2, int(ROTF_SAMPLE_FRACTION * len(rows)))
            sel = rows[rng.integers(0, len(rows), size)] if len(rows) else np.arange(n)
            sample = xi[np.sort(sel)][:, g]
            comps, _ = full_basis(sample)
            blocks.append((g, sample.mean(axis=0), comps))
        xrot = _rotate(xi, blocks)
        model.rotations.append(blocks)
        model.trees.append(grow_tree(xrot, codes, n_classes, rng, max_features=None))
    return model


def _rotate(x, blocks):
    out = np.empty_like(x)
    for g, mean, comps in blocks:
        out[:, g] = (x[:, g] - mean) @ comps.T
    return out


def predict(model: TrainedModel, x):
    """Majority vote over trees; ties go to the lowest class code."""
    x = np.asarray(x, dtype=float)
    if x.ndim != 2:
        raise InvalidArgumentError("X must be 2-D")
    if x.shape[0] == 0:
        return []
    if x.shape[1] != model.n_features:
        raise InvalidArgumentError(
            f"feature count {x.shape[1]} != model's {model.n_features}"
        )
    if model.degenerate:
        return [model.classes[0]] * x.shape[0]
    xi = _impute_apply(x, model.impute_values)
    votes = np.zeros((x.shape[0], len(model.classes)), dtype=np.int64)
    for t, tree in enumerate(model.trees):
        xt = _rotate(xi, model.rotations[t]) if model.kind == ROTATION_FOREST else xi
        pred = tree.predict(np.ascontiguousarray(xt))
        votes[np.arange(x.shape[0]), pred] += 1
    winners = np.argmax(votes, axis=1)  # first max -> lowest class code
    return [model.classes[int(w)] for w in winners]


def importances(model: TrainedModel):
    """Mean impurity decrease per input feature, normalized to sum 1."""
    if model.kind != RANDOM_FOREST:
        raise InvalidArgumentError("importances are defined for random forests only")
    if model.degenerate or not model.trees:
        return np.zeros(model.n_features)
    acc = np.zeros(model.n_features)
    for tree in model.trees:
        acc += tree.importance
    acc /= len(model.trees)
    total = acc.sum()
    return acc / total if total > 0 else acc


def model_to_json(model: TrainedModel) -> str:
    doc = {
        "v": 1,
        "kind": model.kind,
        "classes": model.classes,
        "n_features": model.n_features,
        "impute_values": model.impute_values.tolist(),
        "degenerate": model.degenerate,
        "seed": model.seed,
        "trees": [t.to_doc() for t in model.trees],
        "rotations": [
            [
                {"idx": g.tolist(), "mean": mean.tolist(), "comps": comps.tolist()}
                for g, mean, comps in blocks
            ]
            for blocks in model.rotations
        ],
    }
    return json.dumps(doc, sort_keys=True, separators=(",", ":"))


def model_from_json(text: str) -> TrainedModel:
    doc = json.loads(text)
    if doc.get("v") != 1:
        raise InvalidArgumentError(f"unsupported model schema {doc.get('v')!r}")
    model = TrainedModel(
        kind=doc["kind"],
        classes=doc["classes"],
        n_features=doc["n_features"],
        impute_values=np.array(doc["impute_values"], dtype=float),
        degenerate=doc["degenerate"],
        seed=doc["seed"],
    )
    model.trees = [CartTree.from_doc(t) for t in doc["trees"]]
    model.rotations = [
        [
            (
                np.array(b["idx"], dtype=np.int64),
                np.array(b["mean"], dtype=float),
                np.array(b["comps"], dtype=float),
            )
            for b in blocks
        ]
        for blocks in doc["rotations"]
    ]
    return model
