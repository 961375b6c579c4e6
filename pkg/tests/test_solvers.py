import numpy as np
import pytest

from probesel import bbob, solvers
from probesel.util import IncompatibleError, InvalidArgumentError


@pytest.fixture(scope="module")
def inst10():
    return bbob.make_instance(1, 1, 10)


def test_pso_budget_280_gives_7_generations(inst10):
    log = solvers.run(inst10, solvers.SolverConfig(algorithm="pso", seed=1, budget_evals=280))
    assert len(log) == 280
    assert log.complete_generations == 7
    gens, counts = np.unique(log.generations, return_counts=True)
    assert gens.tolist() == list(range(7))
    assert all(c == 40 for c in counts)


def test_cmaes_budget_20_two_generations(inst10):
    log = solvers.run(inst10, solvers.SolverConfig(algorithm="cmaes", seed=1, budget_evals=20))
    assert len(log) == 20
    assert np.all(np.unique(log.generations, return_counts=True)[1] == 10)


def test_default_population_sizes():
    for alg, pop in (("cmaes", 10), ("pso", 40), ("de", 30)):
        cfg = solvers.SolverConfig(algorithm=alg, seed=0, budget_evals=200)
        assert cfg.population_size == pop


def test_seeded_determinism(inst10):
    cfg = solvers.SolverConfig(algorithm="de", seed=5, budget_evals=300)
    a = solvers.run(inst10, cfg)
    b = solvers.run(inst10, cfg)
    assert np.array_equal(a.fitness, b.fitness)
    assert np.array_equal(a.generations, b.generations)


def test_final_best_and_monotone_running_min(inst10):
    for alg in solvers.ALGORITHMS:
        log = solvers.run(inst10, solvers.SolverConfig(algorithm=alg, seed=3, budget_evals=240))
        assert log.final_best == log.fitness.min()
        running = np.minimum.accumulate(log.fitness)
        assert np.all(np.diff(running) <= 0)


def test_budget_truncates_last_generation(inst10):
    log = solvers.run(inst10, solvers.SolverConfig(algorithm="de", seed=2, budget_evals=95))
    assert len(log) == 95
    assert np.sum(log.generations == log.generations.max()) == 5
    assert log.complete_generations == 3


def test_invalid_configs():
    with pytest.raises(InvalidArgumentError):
        solvers.SolverConfig(algorithm="de", seed=0, budget_evals=10)  # under one generation
    with pytest.raises(InvalidArgumentError):
        solvers.SolverConfig(algorithm="de", seed=0, budget_evals=100, population_size=3)
    with pytest.raises(InvalidArgumentError):
        solvers.SolverConfig(algorithm="newton", seed=0, budget_evals=100)


@pytest.mark.parametrize("alg", solvers.ALGORITHMS)
def test_checkpoint_resume_bit_exact(alg, inst10):
    pop = solvers.DEFAULT_POP[alg]
    full = solvers.run(inst10, solvers.SolverConfig(algorithm=alg, seed=7, budget_evals=pop * 10))
    pre = solvers.run(inst10, solvers.SolverConfig(algorithm=alg, seed=7, budget_evals=pop * 7))
    cont = solvers.resume(inst10, pre.checkpoints[7], pop * 3)
    assert np.array_equal(np.concatenate([pre.fitness, cont.fitness]), full.fitness)
    assert cont.generations.min() == 7


def test_resume_zero_is_empty(inst10):
    pre = solvers.run(inst10, solvers.SolverConfig(algorithm="pso", seed=1, budget_evals=120))
    cont = solvers.resume(inst10, pre.checkpoints[2], 0)
    assert len(cont) == 0
    assert cont.start_generation == 2


def test_resume_mismatches(inst10):
    pre = solvers.run(inst10, solvers.SolverConfig(algorithm="de", seed=1, budget_evals=90))
    chk = pre.checkpoints[1]
    with pytest.raises(IncompatibleError):
        solvers.resume(inst10, chk, 30, expect_algorithm="pso")
    other = bbob.make_instance(2, 1, 10)
    with pytest.raises(IncompatibleError):
        solvers.resume(other, chk, 30)


def test_sphere_sanity_all_solvers():
    inst = bbob.make_instance(1, 1, 5)
    for alg in solvers.ALGORITHMS:
        log = solvers.run(inst, solvers.SolverConfig(algorithm=alg, seed=42, budget_evals=10_000))
        assert log.final_best - inst.f_opt < 1e-3, alg


def test_run_portfolio_counts():
    suite = bbob.list_suite(2, 2)[:4]
    logs = solvers.run_portfolio(suite, 2, 120, base_seed=9)
    assert len(logs) == 3 * 4 * 2
    assert solvers.run_portfolio([], 1, 120, base_seed=9) == []
    with pytest.raises(InvalidArgumentError):
        solvers.run_portfolio(suite, 0, 120, base_seed=9)
    # seeds differ across run indices
    assert not np.array_equal(logs[0].fitness, logs[1].fitness)


def test_csv_json_roundtrip(tmp_path, inst10):
    logs = [
        solvers.run(inst10, solvers.SolverConfig(algorithm="de", seed=5, budget_evals=120), run_index=r)
        for r in range(2)
    ]
    csv_path = tmp_path / "runs.csv"
    json_path = tmp_path / "runs.json"
    solvers.write_runs(csv_path, json_path, logs, config_hash="abc123")
    assert "# config_hash=abc123" in csv_path.read_text().splitlines()[0]
    back = solvers.read_runs(csv_path, json_path)
    assert len(back) == 2
    for orig, loaded in zip(logs, back):
        assert np.array_equal(orig.fitness, loaded.fitness)
        assert np.array_equal(orig.generations, loaded.generations)
        assert orig.final_best == loaded.final_best
    # resume from a deserialized checkpoint matches resume from the live one
    cont_live = solvers.resume(inst10, logs[0].checkpoints[2], 60)
    cont_disk = solvers.resume(inst10, back[0].checkpoints[2], 60)
    assert np.array_equal(cont_live.fitness, cont_disk.fitness)


def test_checkpoint_b64_roundtrip(inst10):
    log = solvers.run(inst10, solvers.SolverConfig(algorithm="cmaes", seed=3, budget_evals=50))
    chk = log.checkpoints[3]
    back = solvers.checkpoint_from_b64(solvers.checkpoint_to_b64(chk))
    a = solvers.resume(inst10, chk, 40)
    b = solvers.resume(inst10, back, 40)
    assert np.array_equal(a.fitness, b.fitness)


def test_sidecar_schema_version(tmp_path, inst10):
    log = solvers.run(inst10, solvers.SolverConfig(algorithm="de", seed=5, budget_evals=60))
    csv_path = tmp_path / "r.csv"
    json_path = tmp_path / "r.json"
    solvers.write_runs(csv_path, json_path, [log])
    doc = json_path.read_text().replace('"v":1', '"v":9')
    json_path.write_text(doc)
    with pytest.raises(InvalidArgumentError):
        solvers.read_runs(csv_path, json_path)
