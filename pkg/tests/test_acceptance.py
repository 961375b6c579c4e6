"""Acceptance gate: the pipeline-level criteria, each printed as one
PASS/FAIL line.

Criteria 1-4 run on fully regenerated desk-scale data (d=10, 5 instances per
function, 5 runs, labeling budget 10,000) produced once per session by the
`desk` fixture.  Criteria 5-7 are structural; criterion 8 records what is
deliberately out of reach at desk scale.
"""

import numpy as np
import pytest

from probesel import bbob, solvers, trajectory
from probesel import experiments as ex
from probesel.classifiers import _kernel, fit_rotation_forest, pca
from probesel.config import ExperimentConfig
from probesel.ela import SobolGenerator

from oracles import exact_impurity_of_split, gini_oracle, ks_brute_force, vdc_reference


def verdict(criterion, ok, detail):
    line = f"ACCEPTANCE {criterion} {'PASS' if ok else 'FAIL'}: {detail}"
    print(line)
    return line


@pytest.fixture(scope="session")
def desk():
    config = ExperimentConfig().validate()  # desk-scale defaults
    return ex.PipelineData.generate(config)


def _median(data, input_kind):
    report = ex.evaluate_selector(input_kind, data.config, data)
    return report.cells[0]["median"], report.cells[0]["fold_accuracies"]


def test_criterion_1_trajectory_matches_or_beats_ela500(desk):
    traj_med, traj_folds = _median(desk, "raw:ALL:current:g7")
    ela_med, ela_folds = _median(desk, "ela:500")
    line = verdict(
        1,
        traj_med >= ela_med,
        f"raw:ALL:current:g7 median {traj_med:.4f} (folds {np.round(traj_folds, 3)}) "
        f">= ela:500 median {ela_med:.4f} (folds {np.round(ela_folds, 3)})",
    )
    assert traj_med >= ela_med, line


def test_criterion_2_low_budget_pso_within_10_points_of_ela300(desk):
    pso_med, _ = _median(desk, "raw:P:best:g2")
    ela_med, _ = _median(desk, "ela:300")
    line = verdict(
        2,
        pso_med >= ela_med - 0.10,
        f"raw:P:best:g2 median {pso_med:.4f} within 10 points of ela:300 median {ela_med:.4f} "
        f"(budget 80 vs 300 evaluations)",
    )
    assert pso_med >= ela_med - 0.10, line


def test_criterion_3_shuffle_and_order_invariance(desk):
    shuffle_rep = ex.shuffle_study(desk.config, desk)
    order_rep = ex.order_study(desk.config, desk)
    shuffle_ps = [k["p_value"] for k in shuffle_rep.ks_results]
    order_ps = [k["p_value"] for k in order_rep.ks_results]
    ok = len(shuffle_ps) == 5 and len(order_ps) == 5 and all(
        p >= 0.05 for p in shuffle_ps + order_ps
    )
    line = verdict(
        3,
        ok,
        f"shuffle p-values {np.round(shuffle_ps, 4)}, order p-values {np.round(order_ps, 4)}, "
        f"all >= 0.05",
    )
    assert ok, line


def test_criterion_4_crossover_sweep_directions(desk):
    report = ex.generation_sweep(desk.config, desk)
    med = {(c["generations"], c["mode"]): c["median"] for c in report.cells}
    low_ok = med[(2, "best")] >= med[(2, "current")]
    high_ok = med[(7, "current")] >= med[(7, "best")]
    line = verdict(
        4,
        low_ok and high_ok,
        f"g=2 best {med[(2, 'best')]:.4f} vs current {med[(2, 'current')]:.4f} (need best >= current); "
        f"g=7 current {med[(7, 'current')]:.4f} vs best {med[(7, 'best')]:.4f} (need current >= best)",
    )
    assert low_ok and high_ok, line


def test_criterion_5_checkpoint_equivalence_50_triples():
    rng = np.random.default_rng(20240507)
    checked = 0
    for _ in range(50):
        alg = solvers.ALGORITHMS[rng.integers(3)]
        fid = int(rng.integers(1, 25))
        iid = int(rng.integers(1, 6))
        inst = bbob.make_instance(fid, iid, 10)
        pop = solvers.DEFAULT_POP[alg]
        g1 = int(rng.integers(1, 7))
        g2 = int(rng.integers(1, 5))
        seed = int(rng.integers(2**31))
        full = solvers.run(
            inst, solvers.SolverConfig(algorithm=alg, seed=seed, budget_evals=pop * (g1 + g2))
        )
        prefix = solvers.run(
            inst, solvers.SolverConfig(algorithm=alg, seed=seed, budget_evals=pop * g1)
        )
        cont = solvers.resume(inst, prefix.checkpoints[g1], pop * g2)
        joined = np.concatenate([prefix.fitness, cont.fitness])
        assert np.array_equal(joined, full.fitness), (alg, fid, iid, g1, g2)
        checked += 1
    line = verdict(5, checked == 50, f"{checked}/50 random (algorithm, instance, split) triples bit-exact")
    assert checked == 50, line


def test_criterion_6a_gini_oracle_corpus():
    rng = np.random.default_rng(2024)
    cases = splittable = 0
    for _ in range(200):
        n = int(rng.integers(2, 13))
        p = int(rng.integers(1, 4))
        c = int(rng.integers(2, 4))
        x = np.ascontiguousarray(rng.integers(0, 4, (n, p)).astype(float))
        y = rng.integers(0, c, n).astype(np.int64)
        feat, thr, _, _ = _kernel.best_split(x, y, c, np.arange(p, dtype=np.int64))
        best, winners = gini_oracle(x, y, c)
        cases += 1
        if feat < 0:
            assert best is None
            continue
        splittable += 1
        assert exact_impurity_of_split(x, y, c, feat, thr) == best
        if len(winners) == 1:
            assert feat == next(iter(winners))[0]
    line = verdict(
        "6a", cases == 200, f"Gini splits equal exhaustive search on {cases} cases ({splittable} splittable)"
    )
    assert cases == 200, line


def test_criterion_6b_ks_enumeration_corpus():
    rng = np.random.default_rng(42)
    for _ in range(100):
        n = int(rng.integers(1, 9))
        m = int(rng.integers(1, 9))
        a = rng.integers(0, 6, n).astype(float)
        b = rng.integers(0, 6, m).astype(float)
        d, _ = ex.ks_two_sample(a, b)
        assert d == pytest.approx(ks_brute_force(a, b), abs=1e-12)
    line = verdict("6b", True, "KS statistic equals ECDF enumeration on 100 sample pairs")
    assert line


def test_criterion_6c_sobol_reference_sequence():
    mine = SobolGenerator(1).next_points(32).ravel()
    ok = np.array_equal(mine, vdc_reference(32))
    line = verdict("6c", ok, "first 32 one-dimensional Sobol points match the reference sequence")
    assert ok, line


def test_criterion_6d_pca_reconstruction():
    rng = np.random.default_rng(7)
    x = rng.standard_normal((50, 6))
    comps, _, proj = pca(x, 6)
    err = float(np.max(np.abs(proj @ comps + x.mean(axis=0) - x)))
    line = verdict("6d", err < 1e-9, f"full-rank 50x6 PCA reconstruction error {err:.2e} < 1e-9")
    assert err < 1e-9, line


def test_criterion_7_structural_invariants(desk, tmp_path):
    # best-so-far trajectories non-increasing on every generated run log
    for log in desk.runs.values():
        probe = trajectory.probe(log, log.complete_generations, trajectory.BEST)
        assert np.all(np.diff(probe.values) <= 0)

    # LOIO folds leak-free on every dataset kind used by the studies
    datasets = [
        desk.trajectory_dataset("ALL", "current", 7),
        desk.ts_dataset("P", "best", 2),
        desk.ela_dataset(300),
    ]
    for ds in datasets:
        for _, train, val in ex.loio_folds(ds):
            assert not set(ds.groups[train]) & set(ds.groups[val])
            assert len(train) + len(val) == len(ds)

    # rotation-forest blocks orthonormal within 1e-8 on desk-scale raw data
    ds = desk.trajectory_dataset("ALL", "current", 7)
    model = fit_rotation_forest(ds.x, ds.y, n_trees=3, seed=desk.config.base_seed)
    for blocks in model.rotations:
        for idx, _, comps in blocks:
            assert np.max(np.abs(comps @ comps.T - np.eye(len(idx)))) < 1e-8

    # byte-identical reports across two full pipeline reruns with one seed
    from probesel import cli

    payloads = []
    for tag in ("a", "b"):
        ini = tmp_path / f"{tag}.ini"
        out = tmp_path / tag
        ini.write_text(
            "[suite]\ndimension = 2\ninstances_per_function = 2\nruns_per_instance = 2\n"
            "[solvers]\nlabeling_budget = 300\nbase_seed = 5\n"
            "[probing]\ngenerations = 2,7\nmodes = current,best\nkinds = C,ALL\n"
            "[ela]\nbudgets = 60\n"
            "[classifiers]\nrf_trees = 10\nrotf_trees = 3\n"
            f"[output]\ndirectory = {out}\n"
        )
        assert cli.main(["generate", "--config", str(ini)]) == 0
        assert cli.main(["extract", "--config", str(ini)]) == 0
        assert cli.main(["study", "sweep", "--config", str(ini)]) == 0
        payloads.append(next((out / "reports").glob("sweep_*.json")).read_bytes())
    assert payloads[0] == payloads[1]
    line = verdict(
        7,
        True,
        "best-mode monotone on all run logs; LOIO leak-free; rotation blocks orthonormal; "
        "pipeline reruns byte-identical",
    )
    assert line


def test_criterion_8_out_of_scope_documented():
    # Absolute accuracy levels depend on solver tuning, so no test pins them;
    # the 2-D projection is a principal-component map exported as coordinates
    # only, with no assertions about cluster geometry.
    line = verdict(
        8,
        True,
        "absolute accuracy levels and projection cluster geometry are not asserted; "
        "the projection study exports coordinates only",
    )
    assert line
