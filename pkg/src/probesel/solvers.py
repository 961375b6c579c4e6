"""CMA-ES, PSO and DE with full per-evaluation logging and warm-start resume.

All three solvers draw every random number from one seeded PCG64 stream, and a
checkpoint captures solver state plus the RNG state, so resuming from any
generation boundary reproduces the exact fitness sequence the uninterrupted
run would have produced.

Solver settings are canonical textbook defaults (see DEFAULT_HYPER); bound
handling is coordinate clipping to [-5, 5] for PSO/DE while CMA-ES evaluates
unclipped (the suite's boundary penalties keep it honest outside the box).
"""

import base64
import csv
import json
from dataclasses import dataclass, field

import numpy as np

from . import bbob
from .util import (
    IncompatibleError,
    InvalidArgumentError,
    derive_seed,
    json_dumps_stable,
    to_jsonable,
)

ALGORITHMS = ("cmaes", "de", "pso")  # fixed class order for tie-breaking

DEFAULT_POP = {"cmaes": 10, "pso": 40, "de": 30}

DEFAULT_HYPER = {
    "cmaes": {"sigma0": 2.0},
    "pso": {"omega": 0.7298, "c1": 1.49618, "c2": 1.49618, "vmax": 10.0},
    "de": {"f": 0.5, "cr": 0.9},
}

DEFAULT_CHECKPOINT_CAP = 8


@dataclass(frozen=True)
class SolverConfig:
    algorithm: str
    seed: int
    budget_evals: int
    population_size: int = 0  # 0 -> algorithm default
    hyperparameters: dict = field(default_factory=dict)
    checkpoint_cap: int = DEFAULT_CHECKPOINT_CAP

    def __post_init__(self):
        if self.algorithm not in ALGORITHMS:
            raise InvalidArgumentError(f"unknown algorithm {self.algorithm!r}")
        if self.population_size == 0:
            object.__setattr__(self, "population_size", DEFAULT_POP[self.algorithm])
        if self.population_size < 4:
            raise InvalidArgumentError("population_size must be >= 4")
        if self.budget_evals < self.population_size:
            raise InvalidArgumentError("budget_evals smaller than one generation")
        hyper = dict(DEFAULT_HYPER[self.algorithm])
        hyper.update(self.hyperparameters)
        object.__setattr__(self, "hyperparameters", hyper)


@dataclass(frozen=True)
class SolverCheckpoint:
    algorithm: str
    population_size: int
    hyperparameters: dict
    instance: dict  # bbob descriptor
    generation: int  # completed generations
    evals_done: int
    state: dict
    rng_state: dict


@dataclass
class RunLog:
    config: SolverConfig
    instance: dict
    generations: np.ndarray  # per record, absolute generation index
    fitness: np.ndarray
    checkpoints: dict
    final_best: float
    run_index: int = 0
    start_generation: int = 0

    def __len__(self):
        return len(self.fitness)

    @property
    def complete_generations(self) -> int:
        return len(self.fitness) // self.config.population_size


# ---------------------------------------------------------------------------
# Solver engines: ask() proposes one generation of points (consuming RNG),
# tell() folds the evaluations into the state.  State dicts are snapshotable.
# ---------------------------------------------------------------------------


class _CmaEs:
    def __init__(self, inst, pop, hyper, rng):
        self.inst = inst
        self.lam = pop
        self.hyper = hyper
        self.rng = rng
        d = inst.dimension
        self.mu = pop // 2
        w = np.log(pop / 2 + 0.5) - np.log(np.arange(1, self.mu + 1))
        self.weights = w / w.sum()
        self.mueff = 1.0 / np.sum(self.weights**2)
        self.cc = (4 + self.mueff / d) / (d + 4 + 2 * self.mueff / d)
        self.cs = (self.mueff + 2) / (d + self.mueff + 5)
        self.c1 = 2 / ((d + 1.3) ** 2 + self.mueff)
        self.cmu = min(1 - self.c1, 2 * (self.mueff - 2 + 1 / self.mueff) / ((d + 2) ** 2 + self.mueff))
        self.damps = 2 * self.mueff / pop + 0.3 + self.cs
        self.chi_n = np.sqrt(d) * (1 - 1 / (4 * d) + 1 / (21 * d * d))

    def init_state(self):
        d = self.inst.dimension
        self.mean = self.rng.uniform(-4.0, 4.0, d)
        self.sigma = float(self.hyper["sigma0"])
        self.cov = np.eye(d)
        self.pc = np.zeros(d)
        self.ps = np.zeros(d)
        self.t = 0

    def ask(self):
        d = self.inst.dimension
        evals, basis = np.linalg.eigh((self.cov + self.cov.T) / 2.0)
        sq = np.sqrt(np.maximum(evals, 0.0))
        self._basis, self._sq = basis, sq
        z = self.rng.standard_normal((self.lam, d))
        return self.mean + self.sigma * ((z * sq) @ basis.T)

    def tell(self, x, f):
        order = np.argsort(f, kind="stable")
        xsel = x[order[: self.mu]]
        mean_old = self.mean
        mean_new = self.weights @ xsel
        y = (mean_new - mean_old) / self.sigma
        inv_sq = 1.0 / np.maximum(self._sq, 1e-20)
        c_invsqrt_y = self._basis @ (inv_sq * (self._basis.T @ y))
        self.t += 1
        self.ps = (1 - self.cs) * self.ps + np.sqrt(
            self.cs * (2 - self.cs) * self.mueff
        ) * c_invsqrt_y
        hsig = float(
            np.sum(self.ps**2)
            / self.inst.dimension
            / (1 - (1 - self.cs) ** (2 * self.t))
            < 2 + 4.0 / (self.inst.dimension + 1)
        )
        self.pc = (1 - self.cc) * self.pc + hsig * np.sqrt(
            self.cc * (2 - self.cc) * self.mueff
        ) * y
        ys = (xsel - mean_old) / self.sigma
        c1a = self.c1 * (1 - (1 - hsig**2) * self.cc * (2 - self.cc))
        rank_mu = (self.weights[:, None] * ys).T @ ys
        self.cov = (
            (1 - c1a - self.cmu) * self.cov
            + self.c1 * np.outer(self.pc, self.pc)
            + self.cmu * rank_mu
        )
        self.sigma *= np.exp(
            min(1.0, (self.cs / self.damps) * (np.linalg.norm(self.ps) / self.chi_n - 1))
        )
        self.mean = mean_new

    def get_state(self):
        return {
            "mean": self.mean.copy(),
            "sigma": self.sigma,
            "cov": self.cov.copy(),
            "pc": self.pc.copy(),
            "ps": self.ps.copy(),
            "t": self.t,
        }

    def set_state(self, s):
        self.mean = np.array(s["mean"], dtype=float)
        self.sigma = float(s["sigma"])
        self.cov = np.array(s["cov"], dtype=float)
        self.pc = np.array(s["pc"], dtype=float)
        self.ps = np.array(s["ps"], dtype=float)
        self.t = int(s["t"])


class _Pso:
    def __init__(self, inst, pop, hyper, rng):
        self.inst = inst
        self.pop = pop
        self.hyper = hyper
        self.rng = rng

    def init_state(self):
        d = self.inst.dimension
        self.x = None
        self.v = np.zeros((self.pop, d))
        self.pbest = None
        self.pbest_f = None
        self.gbest = None
        self.gbest_f = np.inf
        self.t = 0

    def ask(self):
        d = self.inst.dimension
        if self.t == 0:
            self.x = self.rng.uniform(bbob.LOWER, bbob.UPPER, (self.pop, d))
            return self.x
        r1 = self.rng.random((self.pop, d))
        r2 = self.rng.random((self.pop, d))
        h = self.hyper
        self.v = (
            h["omega"] * self.v
            + h["c1"] * r1 * (self.pbest - self.x)
            + h["c2"] * r2 * (self.gbest - self.x)
        )
        np.clip(self.v, -h["vmax"], h["vmax"], out=self.v)
        self.x = np.clip(self.x + self.v, bbob.LOWER, bbob.UPPER)
        return self.x

    def tell(self, x, f):
        if self.t == 0:
            self.pbest = x.copy()
            self.pbest_f = f.copy()
        else:
            better = f < self.pbest_f
            self.pbest[better] = x[better]
            self.pbest_f[better] = f[better]
        g = int(np.argmin(self.pbest_f))
        self.gbest = self.pbest[g].copy()
        self.gbest_f = float(self.pbest_f[g])
        self.t += 1

    def get_state(self):
        return {
            "x": None if self.x is None else self.x.copy(),
            "v": self.v.copy(),
            "pbest": None if self.pbest is None else self.pbest.copy(),
            "pbest_f": None if self.pbest_f is None else self.pbest_f.copy(),
            "gbest": None if self.gbest is None else self.gbest.copy(),
            "gbest_f": self.gbest_f,
            "t": self.t,
        }

    def set_state(self, s):
        arr = lambda v: None if v is None else np.array(v, dtype=float)
        self.x = arr(s["x"])
        self.v = np.array(s["v"], dtype=float)
        self.pbest = arr(s["pbest"])
        self.pbest_f = arr(s["pbest_f"])
        self.gbest = arr(s["gbest"])
        self.gbest_f = float(s["gbest_f"])
        self.t = int(s["t"])


class _De:
    def __init__(self, inst, pop, hyper, rng):
        self.inst = inst
        self.pop = pop
        self.hyper = hyper
        self.rng = rng

    def init_state(self):
        self.x = None
        self.f = None
        self.t = 0

    def ask(self):
        d = self.inst.dimension
        if self.t == 0:
            self._trial = self.rng.uniform(bbob.LOWER, bbob.UPPER, (self.pop, d))
            return self._trial
        # rand/1/bin: partners chosen by random keys, self excluded
        keys = self.rng.random((self.pop, self.pop))
        np.fill_diagonal(keys, np.inf)
        partners = np.argsort(keys, axis=1, kind="stable")[:, :3]
        r1, r2, r3 = partners[:, 0], partners[:, 1], partners[:, 2]
        mutant = self.x[r1] + self.hyper["f"] * (self.x[r2] - self.x[r3])
        j_rand = self.rng.integers(0, d, self.pop)
        cross = self.rng.random((self.pop, d)) < self.hyper["cr"]
        cross[np.arange(self.pop), j_rand] = True
        self._trial = np.clip(np.where(cross, mutant, self.x), bbob.LOWER, bbob.UPPER)
        return self._trial

    def tell(self, x, f):
        if self.t == 0:
            self.x = x.copy()
            self.f = f.copy()
        else:
            accept = f <= self.f
            self.x[accept] = x[accept]
            self.f[accept] = f[accept]
        self.t += 1

    def get_state(self):
        return {
            "x": None if self.x is None else self.x.copy(),
            "f": None if self.f is None else self.f.copy(),
            "t": self.t,
        }

    def set_state(self, s):
        self.x = None if s["x"] is None else np.array(s["x"], dtype=float)
        self.f = None if s["f"] is None else np.array(s["f"], dtype=float)
        self.t = int(s["t"])


_ENGINES = {"cmaes": _CmaEs, "pso": _Pso, "de": _De}


def _snapshot(engine, source, inst, generation, evals_done) -> SolverCheckpoint:
    # source is the SolverConfig or prior checkpoint carrying the run identity
    return SolverCheckpoint(
        algorithm=source.algorithm,
        population_size=source.population_size,
        hyperparameters=dict(source.hyperparameters),
        instance=bbob.descriptor(inst),
        generation=generation,
        evals_done=evals_done,
        state=engine.get_state(),
        rng_state=engine.rng.bit_generator.state,
    )


def _drive(engine, inst, source, budget, start_gen, checkpoint_cap):
    """Run the ask/evaluate/tell loop for `budget` evaluations."""
    pop = engine.pop if hasattr(engine, "pop") else engine.lam
    fitness = np.empty(budget)
    generations = np.empty(budget, dtype=np.int64)
    checkpoints = {}
    done = 0
    gen = start_gen
    while True:
        # boundary snapshot: state after `gen` complete generations
        if gen - start_gen <= checkpoint_cap:
            checkpoints[gen] = _snapshot(engine, source, inst, gen, done)
        if done >= budget:
            break
        x = engine.ask()
        f = bbob.evaluate_batch(inst, x)
        take = min(pop, budget - done)
        fitness[done : done + take] = f[:take]
        generations[done : done + take] = gen
        done += take
        if take < pop:
            break  # budget truncated the generation; state stays untouched
        engine.tell(x, f)
        gen += 1
    return fitness, generations, checkpoints


def run(inst: bbob.ProblemInstance, cfg: SolverConfig, run_index: int = 0) -> RunLog:
    """Execute one seeded run; exactly cfg.budget_evals evaluations recorded."""
    rng = np.random.Generator(np.random.PCG64(cfg.seed))
    engine = _ENGINES[cfg.algorithm](inst, cfg.population_size, cfg.hyperparameters, rng)
    engine.init_state()
    fitness, generations, checkpoints = _drive(
        engine, inst, cfg, cfg.budget_evals, 0, cfg.checkpoint_cap
    )
    return RunLog(
        config=cfg,
        instance=bbob.descriptor(inst),
        generations=generations,
        fitness=fitness,
        checkpoints=checkpoints,
        final_best=float(fitness.min()),
        run_index=run_index,
    )


def resume(
    inst: bbob.ProblemInstance,
    chk: SolverCheckpoint,
    extra_evals: int,
    expect_algorithm: str = None,
    checkpoint_cap: int = DEFAULT_CHECKPOINT_CAP,
) -> RunLog:
    """Continue a checkpointed run for `extra_evals` more evaluations.

    The returned log's fitness, appended to the checkpoint's prefix, equals an
    uninterrupted run of prefix + extra_evals evaluations bit for bit.
    """
    if expect_algorithm is not None and expect_algorithm != chk.algorithm:
        raise IncompatibleError(
            f"checkpoint is from {chk.algorithm!r}, cannot resume as {expect_algorithm!r}"
        )
    if chk.instance != bbob.descriptor(inst):
        raise IncompatibleError("checkpoint belongs to a different instance")
    if extra_evals < 0:
        raise InvalidArgumentError("extra_evals must be >= 0")
    cfg = SolverConfig(
        algorithm=chk.algorithm,
        seed=0,
        budget_evals=max(extra_evals, chk.population_size),
        population_size=chk.population_size,
        hyperparameters=chk.hyperparameters,
        checkpoint_cap=checkpoint_cap,
    )
    if extra_evals == 0:
        return RunLog(
            config=cfg,
            instance=bbob.descriptor(inst),
            generations=np.empty(0, dtype=np.int64),
            fitness=np.empty(0),
            checkpoints={},
            final_best=np.inf,
            start_generation=chk.generation,
        )
    rng = np.random.Generator(np.random.PCG64())
    rng.bit_generator.state = chk.rng_state
    engine = _ENGINES[chk.algorithm](inst, chk.population_size, chk.hyperparameters, rng)
    engine.set_state(chk.state)  # no init_state: it would consume restored RNG draws
    fitness, generations, checkpoints = _drive(
        engine, inst, chk, extra_evals, chk.generation, checkpoint_cap
    )
    return RunLog(
        config=cfg,
        instance=bbob.descriptor(inst),
        generations=generations,
        fitness=fitness,
        checkpoints=checkpoints,
        final_best=float(fitness.min()),
        start_generation=chk.generation,
    )


def portfolio_seed(base_seed: int, algorithm: str, function_id: int, instance_id: int, run_index: int) -> int:
    return derive_seed("run", base_seed, algorithm, function_id, instance_id, run_index)


def run_portfolio(
    suite,
    runs_per_instance: int,
    budget: int,
    base_seed: int,
    algorithms=ALGORITHMS,
    checkpoint_cap: int = DEFAULT_CHECKPOINT_CAP,
) -> list:
    """Seeded runs of every algorithm on every instance; independent cells."""
    if runs_per_instance < 1:
        raise InvalidArgumentError("runs_per_instance must be >= 1")
    logs = []
    for alg in algorithms:
        for inst in suite:
            for r in range(runs_per_instance):
                cfg = SolverConfig(
                    algorithm=alg,
                    seed=portfolio_seed(base_seed, alg, inst.function_id, inst.instance_id, r),
                    budget_evals=budget,
                    checkpoint_cap=checkpoint_cap,
                )
                logs.append(run(inst, cfg, run_index=r))
    return logs


# ---------------------------------------------------------------------------
# Persistence: records as CSV, config + checkpoints as a JSON sidecar with
# base64-encoded checkpoint payloads ("v": 1 schema).
# ---------------------------------------------------------------------------

CSV_COLUMNS = ("algorithm", "function_id", "instance_id", "run_index", "eval_index", "generation", "fitness")


def checkpoint_to_b64(chk: SolverCheckpoint) -> str:
    doc = to_jsonable(
        {
            "algorithm": chk.algorithm,
            "population_size": chk.population_size,
            "hyperparameters": chk.hyperparameters,
            "instance": chk.instance,
            "generation": chk.generation,
            "evals_done": chk.evals_done,
            "state": chk.state,
            "rng_state": chk.rng_state,
        }
    )
    return base64.b64encode(json_dumps_stable(doc).encode()).decode()


def checkpoint_from_b64(payload: str) -> SolverCheckpoint:
    doc = json.loads(base64.b64decode(payload))
    return SolverCheckpoint(
        algorithm=doc["algorithm"],
        population_size=doc["population_size"],
        hyperparameters=doc["hyperparameters"],
        instance=doc["instance"],
        generation=doc["generation"],
        evals_done=doc["evals_done"],
        state=doc["state"],
        rng_state=doc["rng_state"],
    )


def write_runs(csv_path, json_path, logs, config_hash=None):
    """Persist a batch of RunLogs: one CSV of records plus one sidecar."""
    with open(csv_path, "w", newline="") as fh:
        if config_hash is not None:
            fh.write(f"# config_hash={config_hash}\n")
        writer = csv.writer(fh)
        writer.writerow(CSV_COLUMNS)
        for log in logs:
            alg = log.config.algorithm
            fid = log.instance["function_id"]
            iid = log.instance["instance_id"]
            for i in range(len(log)):
                writer.writerow(
                    (alg, fid, iid, log.run_index, i, int(log.generations[i]), repr(float(log.fitness[i])))
                )
    sidecar = {"v": 1, "config_hash": config_hash, "runs": []}
    for log in logs:
        sidecar["runs"].append(
            {
                "algorithm": log.config.algorithm,
                "function_id": log.instance["function_id"],
                "instance_id": log.instance["instance_id"],
                "dimension": log.instance["dimension"],
                "run_index": log.run_index,
                "seed": log.config.seed,
                "budget_evals": log.config.budget_evals,
                "population_size": log.config.population_size,
                "hyperparameters": to_jsonable(log.config.hyperparameters),
                "final_best": log.final_best,
                "checkpoints": {str(g): checkpoint_to_b64(c) for g, c in log.checkpoints.items()},
            }
        )
    with open(json_path, "w") as fh:
        fh.write(json_dumps_stable(sidecar))


def read_runs(csv_path, json_path) -> list:
    """Inverse of write_runs; fitness values round-trip bit-exactly."""
    with open(json_path) as fh:
        sidecar = json.load(fh)
    if sidecar.get("v") != 1:
        raise InvalidArgumentError(f"unsupported sidecar schema {sidecar.get('v')!r}")
    meta = {}
    for entry in sidecar["runs"]:
        key = (entry["algorithm"], entry["function_id"], entry["instance_id"], entry["run_index"])
        meta[key] = entry
    records = {}
    with open(csv_path, newline="") as fh:
        reader = csv.reader((line for line in fh if not line.startswith("#")))
        header = next(reader)
        if tuple(header) != CSV_COLUMNS:
            raise InvalidArgumentError(f"unexpected CSV header {header}")
        for row in reader:
            key = (row[0], int(row[1]), int(row[2]), int(row[3]))
            records.setdefault(key, []).append((int(row[4]), int(row[5]), float(row[6])))
    logs = []
    for key, entry in meta.items():
        rows = sorted(records.get(key, []))
        fitness = np.array([r[2] for r in rows])
        generations = np.array([r[1] for r in rows], dtype=np.int64)
        cfg = SolverConfig(
            algorithm=entry["algorithm"],
            seed=entry["seed"],
            budget_evals=entry["budget_evals"],
            population_size=entry["population_size"],
            hyperparameters=entry["hyperparameters"],
        )
        logs.append(
            RunLog(
                config=cfg,
                instance={
                    "function_id": entry["function_id"],
                    "instance_id": entry["instance_id"],
                    "dimension": entry["dimension"],
                    "seed": derive_seed("bbob", entry["function_id"], entry["instance_id"], entry["dimension"]),
                },
                generations=generations,
                fitness=fitness,
                checkpoints={int(g): checkpoint_from_b64(p) for g, p in entry["checkpoints"].items()},
                final_best=entry["final_best"],
                run_index=entry["run_index"],
            )
        )
    logs.sort(key=lambda lg: (lg.config.algorithm, lg.instance["function_id"], lg.instance["instance_id"], lg.run_index))
    return logs
