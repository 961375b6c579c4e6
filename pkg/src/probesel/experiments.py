"""Study orchestration: labeling, dataset assembly, LOIO evaluation, the
shuffle/order invariance analyses, the best-vs-current generation sweep and
the 2-D trajectory projection.

Every random choice is derived from the experiment config's base seed and the
cell identity, so rerunning a study reproduces its report byte for byte.
"""

import itertools
import math
from dataclasses import dataclass, field

import numpy as np

from . import bbob, ela, solvers, trajectory
from .classifiers import fit_random_forest, fit_rotation_forest, pca, predict
from .config import ExperimentConfig
from .ts_features import FEATURE_NAMES as TS_FEATURE_NAMES
from .ts_features import boruta_select, extract
from .util import (
    IncompleteDataError,
    InvalidArgumentError,
    derive_seed,
    json_dumps_stable,
    to_jsonable,
)

# concatenation recipes; "ALL" order is CMA-ES, PSO, DE
KIND_PARTS = {
    "C": ("cmaes",),
    "D": ("de",),
    "P": ("pso",),
    "C-P": ("cmaes", "pso"),
    "C-D": ("cmaes", "de"),
    "D-P": ("de", "pso"),
    "ALL": ("cmaes", "pso", "de"),
}

ALG_LABELS = {"cmaes": "CMAES", "de": "DE", "pso": "PSO"}
CLASS_ORDER = ("CMAES", "DE", "PSO")


@dataclass
class Dataset:
    x: np.ndarray
    y: list
    groups: np.ndarray  # instance id per row (LOIO grouping)
    feature_names: tuple
    origins: list  # (function_id, instance_id, run_index) per row

    def __len__(self):
        return len(self.y)


@dataclass(frozen=True)
class LabelTable:
    winners: dict  # function_id -> class label
    medians: dict  # (function_id, algorithm) -> median final target
    ties: tuple  # function_ids where argmin was tied

    def class_counts(self):
        counts = {c: 0 for c in CLASS_ORDER}
        for w in self.winners.values():
            counts[w] += 1
        return counts


@dataclass
class ExperimentReport:
    experiment: str
    config_hash: str
    cells: list = field(default_factory=list)
    ks_results: list = field(default_factory=list)
    projection: list = field(default_factory=list)
    notes: dict = field(default_factory=dict)

    def cell(self, name):
        for c in self.cells:
            if c["name"] == name:
                return c
        raise KeyError(name)

    def to_json(self) -> str:
        return json_dumps_stable(
            to_jsonable(
                {
                    "experiment": self.experiment,
                    "config_hash": self.config_hash,
                    "cells": self.cells,
                    "ks_results": self.ks_results,
                    "projection": self.projection,
                    "notes": self.notes,
                }
            )
        )


def label(suite_runs) -> LabelTable:
    """Winner per function: lowest median final target across instances x runs."""
    by_cell = {}
    for log in suite_runs:
        key = (log.instance["function_id"], log.config.algorithm)
        by_cell.setdefault(key, []).append(log.final_best)
    fids = sorted({fid for fid, _ in by_cell})
    algs = sorted({alg for _, alg in by_cell})
    medians = {}
    winners = {}
    ties = []
    for fid in fids:
        per_alg = []
        for alg in solvers.ALGORITHMS:  # class order
            if alg not in algs:
                continue
            if (fid, alg) not in by_cell:
                raise IncompleteDataError(f"no runs for function {fid}, algorithm {alg}")
            med = float(np.median(by_cell[(fid, alg)]))
            medians[(fid, ALG_LABELS[alg])] = med
            per_alg.append((med, ALG_LABELS[alg]))
        best = min(m for m, _ in per_alg)
        tied = [a for m, a in per_alg if m == best]
        winners[fid] = tied[0]
        if len(tied) > 1:
            ties.append(fid)
    return LabelTable(winners=winners, medians=medians, ties=tuple(ties))


def loio_folds(dataset: Dataset):
    """One fold per instance id: that id validates, the rest trains."""
    ids = sorted(set(dataset.groups.tolist()))
    if len(ids) < 2:
        raise InvalidArgumentError("LOIO needs at least 2 distinct instance ids")
    folds = []
    for iid in ids:
        val = np.flatnonzero(dataset.groups == iid)
        train = np.flatnonzero(dataset.groups != iid)
        folds.append((iid, train, val))
    return folds


def ks_two_sample(a, b):
    """Two-sample Kolmogorov-Smirnov statistic and asymptotic p-value."""
    a = np.sort(np.asarray(a, dtype=float))
    b = np.sort(np.asarray(b, dtype=float))
    n, m = len(a), len(b)
    if n == 0 or m == 0:
        raise InvalidArgumentError("KS test needs non-empty samples")
    pooled = np.concatenate([a, b])
    cdf_a = np.searchsorted(a, pooled, side="right") / n
    cdf_b = np.searchsorted(b, pooled, side="right") / m
    d = float(np.max(np.abs(cdf_a - cdf_b)))
    n_eff = n * m / (n + m)
    return d, _kolmogorov_sf(math.sqrt(n_eff) * d)


def _kolmogorov_sf(t: float) -> float:
    """Q(t) = P[sup|B(s)| > t] for the Kolmogorov distribution."""
    if t < 1e-10:
        return 1.0
    if t < 1.18:  # theta-function form converges fast for small t
        total = 0.0
        for j in range(1, 20, 2):
            total += math.exp(-(j * j) * math.pi**2 / (8.0 * t * t))
        return float(min(1.0, max(0.0, 1.0 - math.sqrt(2.0 * math.pi) / t * total)))
    total = 0.0
    for j in range(1, 101):
        term = (-1.0) ** (j - 1) * math.exp(-2.0 * j * j * t * t)
        total += term
        if abs(term) < 1e-16:
            break
    return float(min(1.0, max(0.0, 2.0 * total)))


# ---------------------------------------------------------------------------
# Data holder: generated runs + label table + cached datasets
# ---------------------------------------------------------------------------


class PipelineData:
    """In-memory experiment data: run logs, labels, derived datasets."""

    def __init__(self, config: ExperimentConfig, runs, labels: LabelTable = None):
        self.config = config
        self.runs = {}  # (algorithm, fid, iid, run_index) -> RunLog
        for log in runs:
            key = (
                log.config.algorithm,
                log.instance["function_id"],
                log.instance["instance_id"],
                log.run_index,
            )
            self.runs[key] = log
        self.labels = labels if labels is not None else label(list(self.runs.values()))
        self._traj_cache = {}
        self._ds_cache = {}

    @classmethod
    def generate(cls, config: ExperimentConfig):
        """Run the full solver portfolio at the labeling budget."""
        suite = bbob.list_suite(config.instances_per_function, config.dimension)
        logs = solvers.run_portfolio(
            suite,
            config.runs_per_instance,
            config.labeling_budget,
            base_seed=config.base_seed,
            checkpoint_cap=max(config.checkpoint_cap, max(config.generations)),
        )
        return cls(config, logs)

    def identities(self):
        cfg = self.config
        return [
            (fid, iid, run)
            for fid in range(1, bbob.N_FUNCTIONS + 1)
            for iid in range(1, cfg.instances_per_function + 1)
            for run in range(cfg.runs_per_instance)
        ]

    def _get_run(self, alg, fid, iid, run):
        try:
            return self.runs[(alg, fid, iid, run)]
        except KeyError:
            raise IncompleteDataError(f"missing run ({alg}, f{fid}, i{iid}, r{run})") from None

    def trajectories(self, kind, mode, generations):
        """One (possibly concatenated) trajectory per run identity."""
        key = (kind, mode, generations)
        if key not in self._traj_cache:
            if kind not in KIND_PARTS:
                raise InvalidArgumentError(f"unknown input kind {kind!r}")
            out = []
            for fid, iid, run in self.identities():
                parts = [
                    trajectory.probe(self._get_run(alg, fid, iid, run), generations, mode)
                    for alg in KIND_PARTS[kind]
                ]
                out.append(trajectory.concat(parts) if len(parts) > 1 else parts[0])
            self._traj_cache[key] = out
        return self._traj_cache[key]

    def _label_of(self, fid):
        return self.labels.winners[fid]

    def dataset_from_trajectories(self, trajs) -> Dataset:
        x = np.vstack([t.values for t in trajs])
        if self.config.normalize_trajectories:
            scale = np.abs(x).max(axis=1, keepdims=True)
            x = x / np.where(scale > 0, scale, 1.0)
        origins = [t.origin for t in trajs]
        return Dataset(
            x=x,
            y=[self._label_of(o[0]) for o in origins],
            groups=np.array([o[1] for o in origins], dtype=np.int64),
            feature_names=tuple(f"v{i}" for i in range(x.shape[1])),
            origins=origins,
        )

    def trajectory_dataset(self, kind, mode, generations) -> Dataset:
        key = ("raw", kind, mode, generations)
        if key not in self._ds_cache:
            self._ds_cache[key] = self.dataset_from_trajectories(
                self.trajectories(kind, mode, generations)
            )
        return self._ds_cache[key]

    def ts_dataset(self, kind, mode, generations) -> Dataset:
        key = ("tsfeat", kind, mode, generations)
        if key not in self._ds_cache:
            trajs = self.trajectories(kind, mode, generations)
            x = np.vstack([extract(t).values for t in trajs])
            origins = [t.origin for t in trajs]
            self._ds_cache[key] = Dataset(
                x=x,
                y=[self._label_of(o[0]) for o in origins],
                groups=np.array([o[1] for o in origins], dtype=np.int64),
                feature_names=TS_FEATURE_NAMES,
                origins=origins,
            )
        return self._ds_cache[key]

    def ela_dataset(self, budget) -> Dataset:
        key = ("ela", budget)
        if key not in self._ds_cache:
            cfg = self.config
            rows = []
            origins = []
            for fid, iid, run in self.identities():
                inst = bbob.make_instance(fid, iid, cfg.dimension)
                seed = derive_seed("ela", cfg.base_seed, budget, fid, iid, run)
                sample = ela.sobol_sample(inst, budget, seed)
                rows.append(ela.compute_ela(sample).values)
                origins.append((fid, iid, run))
            self._ds_cache[key] = Dataset(
                x=np.vstack(rows),
                y=[self._label_of(o[0]) for o in origins],
                groups=np.array([o[1] for o in origins], dtype=np.int64),
                feature_names=ela.ELA_FEATURE_NAMES,
                origins=origins,
            )
        return self._ds_cache[key]


# ---------------------------------------------------------------------------
# Selector evaluation
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class InputSpec:
    source: str  # raw | tsfeat | tsfeat_sel | ela
    kind: str = None
    mode: str = None
    generations: int = None
    budget: int = None

    @property
    def name(self) -> str:
        if self.source == "ela":
            return f"ela:{self.budget}"
        return f"{self.source}:{self.kind}:{self.mode}:g{self.generations}"


def parse_input_kind(text: str) -> InputSpec:
    """Parse cell names like raw:ALL:current:g7 or ela:300."""
    parts = text.split(":")
    if parts[0] == "ela":
        if len(parts) != 2:
            raise InvalidArgumentError(f"bad input kind {text!r}")
        return InputSpec(source="ela", budget=int(parts[1]))
    if parts[0] in ("raw", "tsfeat", "tsfeat_sel"):
        if len(parts) != 4 or not parts[3].startswith("g"):
            raise InvalidArgumentError(f"bad input kind {text!r}")
        return InputSpec(
            source=parts[0],
            kind=parts[1],
            mode=parts[2],
            generations=int(parts[3][1:]),
        )
    raise InvalidArgumentError(f"bad input kind {text!r}")


def _dataset_for(spec: InputSpec, data: PipelineData) -> Dataset:
    if spec.source == "ela":
        return data.ela_dataset(spec.budget)
    if spec.source == "raw":
        return data.trajectory_dataset(spec.kind, spec.mode, spec.generations)
    return data.ts_dataset(spec.kind, spec.mode, spec.generations)


def run_loio(dataset: Dataset, config: ExperimentConfig, cell_name: str, raw_series: bool,
             select_features: bool = False):
    """LOIO cross-validation of one selector cell.

    Raw series go to the rotation forest, feature vectors to the random
    forest; optional Boruta selection runs inside each training fold.
    """
    accuracies = []
    predictions = []
    y_arr = np.array(dataset.y)
    for iid, train, val in loio_folds(dataset):
        seed = derive_seed("fold", config.base_seed, cell_name, iid)
        x_train, y_train = dataset.x[train], y_arr[train]
        x_val = dataset.x[val]
        if select_features:
            mask = boruta_select(
                x_train,
                y_train,
                feature_names=list(dataset.feature_names),
                max_iter=config.boruta_max_iter,
                alpha=config.boruta_alpha,
                seed=seed,
                n_trees=config.boruta_trees,
            )
            cols = [i for i, n in enumerate(dataset.feature_names) if mask.kept[n]]
            x_train = x_train[:, cols]
            x_val = x_val[:, cols]
        if raw_series:
            model = fit_rotation_forest(
                x_train,
                y_train,
                n_trees=config.rotf_trees,
                n_groups=config.rotf_groups,
                seed=seed,
            )
        else:
            model = fit_random_forest(x_train, y_train, n_trees=config.rf_trees, seed=seed)
        preds = predict(model, x_val)
        accuracies.append(float(np.mean(np.array(preds) == y_arr[val])))
        for row, pred in zip(val, preds):
            fid, inst_id, run = dataset.origins[row]
            predictions.append(
                {
                    "fold": int(iid),
                    "function_id": int(fid),
                    "instance_id": int(inst_id),
                    "run": int(run),
                    "true": dataset.y[row],
                    "pred": pred,
                }
            )
    return accuracies, predictions


def _cell(name, accuracies, predictions, extra=None):
    cell = {
        "name": name,
        "fold_accuracies": [float(a) for a in accuracies],
        "median": float(np.median(accuracies)),
        "min": float(np.min(accuracies)),
        "max": float(np.max(accuracies)),
        "predictions": predictions,
    }
    if extra:
        cell.update(extra)
    return cell


def evaluate_selector(input_kind, config: ExperimentConfig, data: PipelineData) -> ExperimentReport:
    """LOIO accuracy of one selector, identified by its input-kind string."""
    spec = parse_input_kind(input_kind) if isinstance(input_kind, str) else input_kind
    dataset = _dataset_for(spec, data)
    accs, preds = run_loio(
        dataset,
        config,
        spec.name,
        raw_series=spec.source == "raw",
        select_features=spec.source == "tsfeat_sel",
    )
    report = ExperimentReport(experiment=f"selector[{spec.name}]", config_hash=config.config_hash())
    report.cells.append(_cell(spec.name, accs, preds))
    report.notes["label_counts"] = data.labels.class_counts()
    report.notes["label_ties"] = list(data.labels.ties)
    return report


def accuracy_study(config: ExperimentConfig, data: PipelineData) -> ExperimentReport:
    """All configured input kinds and representations vs the ELA baselines."""
    report = ExperimentReport(experiment="accuracy", config_hash=config.config_hash())
    for g in config.generations:
        for mode in config.modes:
            for kind in config.kinds:
                for source in ("raw", "tsfeat", "tsfeat_sel"):
                    spec = InputSpec(source=source, kind=kind, mode=mode, generations=g)
                    accs, preds = run_loio(
                        _dataset_for(spec, data),
                        config,
                        spec.name,
                        raw_series=source == "raw",
                        select_features=source == "tsfeat_sel",
                    )
                    report.cells.append(_cell(spec.name, accs, preds))
    for budget in config.ela_budgets:
        spec = InputSpec(source="ela", budget=budget)
        accs, preds = run_loio(_dataset_for(spec, data), config, spec.name, raw_series=False)
        report.cells.append(_cell(spec.name, accs, preds))
    report.notes["label_counts"] = data.labels.class_counts()
    report.notes["label_ties"] = list(data.labels.ties)
    return report


def shuffle_study(config: ExperimentConfig, data: PipelineData, kind="ALL",
                  generations=7, repetitions=5) -> ExperimentReport:
    """Within-generation shuffles of current-mode trajectories vs the original."""
    report = ExperimentReport(experiment="shuffle", config_hash=config.config_hash())
    base_trajs = data.trajectories(kind, trajectory.CURRENT, generations)
    base_name = f"raw:{kind}:current:g{generations}"
    base_accs, base_preds = run_loio(
        data.dataset_from_trajectories(base_trajs), config, base_name, raw_series=True
    )
    report.cells.append(_cell(base_name, base_accs, base_preds))
    for rep in range(repetitions):
        seed = derive_seed("shuffle-study", config.base_seed, rep)
        shuffled = [trajectory.shuffle_within_generations(t, seed) for t in base_trajs]
        name = f"{base_name}:shuffle{rep}"
        accs, preds = run_loio(
            data.dataset_from_trajectories(shuffled), config, name, raw_series=True
        )
        report.cells.append(_cell(name, accs, preds))
        d, p = ks_two_sample(base_accs, accs)
        report.ks_results.append({"cell": name, "vs": base_name, "statistic": d, "p_value": p})
    return report


def order_study(config: ExperimentConfig, data: PipelineData, generations=7) -> ExperimentReport:
    """All six orderings of the three-part concatenation vs the baseline order."""
    report = ExperimentReport(experiment="order", config_hash=config.config_hash())
    base_trajs = data.trajectories("ALL", trajectory.CURRENT, generations)
    alg_short = {"cmaes": "C", "pso": "P", "de": "D"}
    base_accs = None
    for perm in itertools.permutations(range(3)):
        trajs = [trajectory.reorder_parts(t, perm) for t in base_trajs]
        order_name = "-".join(alg_short[base_trajs[0].parts[i][0]] for i in perm)
        name = f"raw:ALL[{order_name}]:current:g{generations}"
        accs, preds = run_loio(
            data.dataset_from_trajectories(trajs), config, name, raw_series=True
        )
        report.cells.append(_cell(name, accs, preds, extra={"order": order_name}))
        if perm == (0, 1, 2):
            base_accs = accs
            base_name = name
        else:
            d, p = ks_two_sample(base_accs, accs)
            report.ks_results.append({"cell": name, "vs": base_name, "statistic": d, "p_value": p})
    return report


def generation_sweep(config: ExperimentConfig, data: PipelineData, kind="ALL",
                     generation_range=(2, 3, 4, 5, 6, 7)) -> ExperimentReport:
    """Best vs current accuracy across probing lengths (crossover analysis)."""
    report = ExperimentReport(experiment="sweep", config_hash=config.config_hash())
    for g in generation_range:
        for mode in (trajectory.BEST, trajectory.CURRENT):
            spec = InputSpec(source="raw", kind=kind, mode=mode, generations=g)
            accs, preds = run_loio(
                _dataset_for(spec, data), config, spec.name, raw_series=True
            )
            report.cells.append(
                _cell(spec.name, accs, preds, extra={"generations": g, "mode": mode})
            )
    return report


def project(config: ExperimentConfig, data: PipelineData, kind="ALL",
            generations=7) -> ExperimentReport:
    """2-D principal-component coordinates of the current-mode trajectories."""
    report = ExperimentReport(experiment="project", config_hash=config.config_hash())
    dataset = data.trajectory_dataset(kind, trajectory.CURRENT, generations)
    _, explained, coords = pca(dataset.x, 2)
    for row, (fid, iid, run) in enumerate(dataset.origins):
        report.projection.append(
            {
                "x": float(coords[row, 0]),
                "y": float(coords[row, 1]),
                "function_id": int(fid),
                "instance_id": int(iid),
                "run": int(run),
                "winner": dataset.y[row],
            }
        )
    report.notes["explained_variance"] = [float(v) for v in explained]
    return report
