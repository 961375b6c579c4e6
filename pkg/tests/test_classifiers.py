import json
import os
import subprocess
import sys

import numpy as np
import pytest

from probesel import classifiers as clf
from probesel.classifiers import _kernel, _split_py
from probesel.util import InvalidArgumentError

from oracles import exact_impurity_of_split, gini_oracle


def random_case(rng):
    n = int(rng.integers(2, 13))
    p = int(rng.integers(1, 4))
    c = int(rng.integers(2, 4))
    # small integer grids provoke ties in both values and impurities
    x = rng.integers(0, 4, (n, p)).astype(float)
    y = rng.integers(0, c, n).astype(np.int64)
    return np.ascontiguousarray(x), y, c


def test_gini_split_matches_exhaustive_oracle_corpus():
    rng = np.random.default_rng(2024)
    checked = 0
    for _ in range(200):
        x, y, c = random_case(rng)
        feats = np.arange(x.shape[1], dtype=np.int64)
        feat, thr, score, n_left = _kernel.best_split(x, y, c, feats)
        best, winners = gini_oracle(x, y, c)
        if feat < 0:
            assert best is None  # no candidate split exists
            continue
        achieved = exact_impurity_of_split(x, y, c, feat, thr)
        assert achieved == best
        if len(winners) == 1:
            ((wf, wpos),) = winners
            assert feat == wf
            order = np.sort(x[:, wf])
            assert order[wpos] <= thr < order[wpos + 1]
        checked += 1
    assert checked > 100  # corpus should be mostly splittable


@pytest.mark.skipif(not clf.COMPILED, reason="compiled kernel unavailable")
def test_kernel_parity_compiled_vs_numpy():
    from probesel.classifiers import _split_fast

    rng = np.random.default_rng(5)
    for _ in range(500):
        n = int(rng.integers(2, 60))
        p = int(rng.integers(1, 9))
        c = int(rng.integers(2, 5))
        x = np.where(
            rng.random((n, p)) < 0.5,
            rng.integers(0, 5, (n, p)).astype(float),
            rng.standard_normal((n, p)),
        )
        x = np.ascontiguousarray(x)
        y = rng.integers(0, c, n).astype(np.int64)
        k = int(rng.integers(1, p + 1))
        feats = np.sort(rng.choice(p, k, replace=False)).astype(np.int64)
        assert _split_fast.best_split(x, y, c, feats) == _split_py.best_split(x, y, c, feats)


def test_env_var_forces_numpy_fallback():
    code = "import probesel.classifiers as c; print(c.COMPILED)"
    env = {**os.environ, "PROBESEL_PURE_PYTHON": "1"}
    out = subprocess.run([sys.executable, "-c", code], capture_output=True, text=True, env=env)
    assert out.stdout.strip() == "False"


def two_clusters(rng, n_per=50, spread=1.0):
    x = np.vstack(
        [rng.normal(0, spread, (n_per, 2)), rng.normal(10, spread, (n_per, 2))]
    )
    y = np.array(["lo"] * n_per + ["hi"] * n_per)
    return x, y


def test_random_forest_separable_training_accuracy():
    rng = np.random.default_rng(1)
    x, y = two_clusters(rng)
    model = clf.fit_random_forest(x, y, seed=3)
    assert np.mean(np.array(clf.predict(model, x)) == y) == 1.0


def test_forest_beats_single_tree_on_heldout_majority_of_seeds():
    wins = 0
    for seed in range(20):
        rng = np.random.default_rng(seed)
        x, y = two_clusters(rng, n_per=40, spread=4.0)  # overlapping clusters
        test_x, test_y = two_clusters(np.random.default_rng(seed + 1000), n_per=40, spread=4.0)
        forest = clf.fit_random_forest(x, y, n_trees=30, seed=seed)
        single = clf.fit_random_forest(x, y, n_trees=1, seed=seed)
        acc_f = np.mean(np.array(clf.predict(forest, test_x)) == test_y)
        acc_s = np.mean(np.array(clf.predict(single, test_x)) == test_y)
        wins += acc_f >= acc_s
    assert wins > 10


def test_degenerate_single_class():
    x = np.random.default_rng(0).standard_normal((20, 3))
    y = ["only"] * 20
    model = clf.fit_random_forest(x, y, seed=0)
    assert model.degenerate
    assert clf.predict(model, x) == ["only"] * 20
    assert np.all(clf.importances(model) == 0.0)
    rot = clf.fit_rotation_forest(x, y, seed=0)
    assert clf.predict(rot, x[:5]) == ["only"] * 5


def test_memorization_on_distinct_separable_inputs():
    rng = np.random.default_rng(4)
    x = np.vstack([rng.normal(0, 0.5, (30, 3)), rng.normal(20, 0.5, (30, 3))])
    y = np.array(["a"] * 30 + ["b"] * 30)
    model = clf.fit_random_forest(x, y, seed=1)
    assert list(clf.predict(model, x)) == y.tolist()


def test_predict_edge_cases():
    rng = np.random.default_rng(2)
    x, y = two_clusters(rng)
    model = clf.fit_random_forest(x, y, seed=0)
    assert clf.predict(model, np.empty((0, 2))) == []
    # sentinel row is imputed, not an error
    row = np.array([[np.nan, np.nan]])
    assert clf.predict(model, row)[0] in ("lo", "hi")
    with pytest.raises(InvalidArgumentError):
        clf.predict(model, np.zeros((3, 5)))


def test_importances_synthetic_single_driver():
    rng = np.random.default_rng(8)
    driver = rng.standard_normal(300)
    driver = driver[np.abs(driver) > 0.3]  # margin so the label is clean
    noise = rng.integers(0, 2, (len(driver), 3)).astype(float)
    x = np.column_stack([noise[:, 0], driver, noise[:, 1:]])
    y = np.where(driver > 0, "p", "n")
    model = clf.fit_random_forest(x, y, seed=2)
    imp = clf.importances(model)
    assert imp[1] > 0.9
    assert imp.sum() == pytest.approx(1.0, abs=1e-9)
    rot = clf.fit_rotation_forest(x, y, seed=2)
    with pytest.raises(InvalidArgumentError):
        clf.importances(rot)


def test_rotation_forest_blocks_orthonormal():
    rng = np.random.default_rng(3)
    x = rng.standard_normal((80, 11)) * np.exp(rng.uniform(0, 6, 11))
    y = rng.choice(["a", "b", "c"], 80)
    model = clf.fit_rotation_forest(x, y, n_trees=5, seed=7)
    for blocks in model.rotations:
        assert len(blocks) == 3
        seen = []
        for idx, _, comps in blocks:
            assert np.max(np.abs(comps @ comps.T - np.eye(len(idx)))) < 1e-8
            seen.extend(idx.tolist())
        assert sorted(seen) == list(range(11))  # disjoint cover


def test_rotation_forest_beats_depth_one_axis_tree_on_diagonal_data():
    rng = np.random.default_rng(11)
    base = rng.uniform(-1, 1, (120, 2))
    x = np.column_stack([base[:, 0], base[:, 1], base.sum(axis=1) * 0 + rng.uniform(-1, 1, 120)])
    margin = 0.15
    s = base[:, 0] - base[:, 1]
    keep = np.abs(s) > margin
    x, s = x[keep], s[keep]
    y = np.where(s > 0, "up", "dn")

    def depth1_accuracy(x, y):
        best = 0.0
        for f in range(x.shape[1]):
            for thr in np.unique(x[:, f]):
                left = x[:, f] <= thr
                for a, b in (("up", "dn"), ("dn", "up")):
                    pred = np.where(left, a, b)
                    best = max(best, float(np.mean(pred == y)))
        return best

    model = clf.fit_rotation_forest(x, y, seed=5)
    acc = np.mean(np.array(clf.predict(model, x)) == y)
    assert acc >= depth1_accuracy(x, y)


def test_rotation_forest_needs_enough_features():
    x = np.random.default_rng(0).standard_normal((30, 2))
    y = np.array(["a", "b"] * 15)
    with pytest.raises(InvalidArgumentError):
        clf.fit_rotation_forest(x, y, n_groups=3, seed=0)


def test_model_json_roundtrip_identical_predictions():
    rng = np.random.default_rng(6)
    x = rng.standard_normal((60, 6))
    y = rng.choice(["a", "b", "c"], 60)
    probe = rng.standard_normal((25, 6))
    for fit in (clf.fit_random_forest, clf.fit_rotation_forest):
        model = fit(x, y, seed=9)
        text = clf.model_to_json(model)
        doc = json.loads(text)
        assert doc["v"] == 1
        back = clf.model_from_json(text)
        assert clf.predict(back, probe) == clf.predict(model, probe)
    with pytest.raises(InvalidArgumentError):
        clf.model_from_json(text.replace('"v":1', '"v":3'))


def test_fit_determinism():
    rng = np.random.default_rng(12)
    x = rng.standard_normal((50, 4))
    y = rng.choice(["a", "b"], 50)
    probe = rng.standard_normal((20, 4))
    a = clf.fit_random_forest(x, y, seed=4)
    b = clf.fit_random_forest(x, y, seed=4)
    assert clf.predict(a, probe) == clf.predict(b, probe)
    assert clf.model_to_json(a) == clf.model_to_json(b)


def test_vote_tie_breaks_to_lowest_class():
    # two trees voting differently: even tree count forces ties
    rng = np.random.default_rng(13)
    x = rng.standard_normal((40, 3))
    y = np.array(["a", "b"] * 20)
    model = clf.fit_random_forest(x, y, n_trees=2, seed=1)
    votes_rule = clf.predict(model, x)
    assert set(votes_rule) <= {"a", "b"}


# ---------------------------------------------------------------------------
# PCA
# ---------------------------------------------------------------------------


def test_pca_rank_one_line():
    t = np.linspace(-1, 1, 40)
    x = np.column_stack([t, 2 * t])
    comps, ev, proj = clf.pca(x, 2)
    expected = np.array([1.0, 2.0]) / np.sqrt(5.0)
    assert np.max(np.abs(comps[0] - expected)) < 1e-12
    assert ev[1] == pytest.approx(0.0, abs=1e-20)
    assert ev[0] >= ev[1]


def test_pca_orthonormal_components():
    rng = np.random.default_rng(0)
    x = rng.standard_normal((200, 5))
    comps, ev, _ = clf.pca(x, 2)
    assert np.max(np.abs(comps @ comps.T - np.eye(2))) < 1e-9
    assert np.all(np.diff(ev) <= 1e-12)


def test_pca_full_rank_reconstruction():
    rng = np.random.default_rng(7)
    x = rng.standard_normal((50, 6))
    comps, _, proj = clf.pca(x, 6)
    rec = proj @ comps + x.mean(axis=0)
    assert np.max(np.abs(rec - x)) < 1e-9


def test_pca_sign_convention_and_errors():
    rng = np.random.default_rng(9)
    x = rng.standard_normal((30, 4))
    comps, _, _ = clf.pca(x, 4)
    for row in comps:
        assert row[np.argmax(np.abs(row))] > 0
    with pytest.raises(InvalidArgumentError):
        clf.pca(x, 0)
    with pytest.raises(InvalidArgumentError):
        clf.pca(x, 5)
