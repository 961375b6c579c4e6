"""Command-line pipeline: generate -> extract -> study -> report.

Stages are cached on disk under the config's output directory; every artifact
embeds the config hash, and a directory produced under a different config is
rejected unless --force is given.  All randomness flows from the config's base
seed, so reruns produce byte-identical reports.

Exit codes: 0 success, 1 runtime failure, 2 usage or config error.
"""

import argparse
import concurrent.futures
import csv
import dataclasses
import json
import os
import sys
from pathlib import Path

from . import bbob, solvers
from .config import ExperimentConfig, load_config
from .experiments import (
    PipelineData,
    accuracy_study,
    generation_sweep,
    order_study,
    project,
    shuffle_study,
)
from .plots import svg_boxplot
from .ts_features import boruta_select, mask_to_json
from .util import IncompleteDataError, InvalidArgumentError, StaleCacheError

ENV_OUTPUT_ROOT = "PROBESEL_OUTPUT_ROOT"


def output_dir(config: ExperimentConfig) -> Path:
    root = os.environ.get(ENV_OUTPUT_ROOT)
    return (Path(root) / config.output_dir) if root else Path(config.output_dir)


def _check_manifest(out: Path, config: ExperimentConfig, force: bool):
    manifest = out / "manifest.json"
    if manifest.exists():
        doc = json.loads(manifest.read_text())
        if doc.get("config_hash") != config.config_hash():
            if not force:
                raise StaleCacheError(
                    f"{out} was produced under config hash {doc.get('config_hash')}, "
                    f"current is {config.config_hash()}; rerun with --force to overwrite"
                )
        else:
            return
    out.mkdir(parents=True, exist_ok=True)
    manifest.write_text(
        json.dumps(
            {
                "v": 1,
                "config_hash": config.config_hash(),
                "config": dataclasses.asdict(config),
            },
            sort_keys=True,
            indent=1,
        )
    )


def _cell_paths(out: Path, alg: str, fid: int):
    return out / "runs" / f"{alg}_f{fid:02d}.csv", out / "runs" / f"{alg}_f{fid:02d}.json"


def _generate_cell(args):
    config_doc, alg, fid, csv_path, json_path = args
    config = ExperimentConfig(**config_doc)
    logs = []
    for iid in range(1, config.instances_per_function + 1):
        inst = bbob.make_instance(fid, iid, config.dimension)
        for run_idx in range(config.runs_per_instance):
            cfg = solvers.SolverConfig(
                algorithm=alg,
                seed=solvers.portfolio_seed(config.base_seed, alg, fid, iid, run_idx),
                budget_evals=config.labeling_budget,
                checkpoint_cap=max(config.checkpoint_cap, max(config.generations)),
            )
            logs.append(solvers.run(inst, cfg, run_index=run_idx))
    solvers.write_runs(csv_path, json_path, logs, config_hash=config.config_hash())
    return alg, fid


def cmd_generate(config: ExperimentConfig, jobs: int = 1, force: bool = False) -> int:
    """Produce run-log CSVs + checkpoints for every (algorithm, function) cell."""
    out = output_dir(config)
    _check_manifest(out, config, force)
    (out / "runs").mkdir(parents=True, exist_ok=True)
    tasks = []
    cached = 0
    for alg in solvers.ALGORITHMS:
        for fid in range(1, bbob.N_FUNCTIONS + 1):
            csv_path, json_path = _cell_paths(out, alg, fid)
            if csv_path.exists() and json_path.exists() and not force:
                cached += 1
                continue
            tasks.append((dataclasses.asdict(config), alg, fid, csv_path, json_path))
    if jobs > 1 and tasks:
        with concurrent.futures.ProcessPoolExecutor(max_workers=jobs) as pool:
            list(pool.map(_generate_cell, tasks))
    else:
        for task in tasks:
            _generate_cell(task)
    print(f"generate: {len(tasks)} cells computed, {cached} cached -> {out / 'runs'}")
    return 0


def load_runs(config: ExperimentConfig) -> PipelineData:
    out = output_dir(config)
    logs = []
    for alg in solvers.ALGORITHMS:
        for fid in range(1, bbob.N_FUNCTIONS + 1):
            csv_path, json_path = _cell_paths(out, alg, fid)
            if not csv_path.exists():
                raise IncompleteDataError(
                    f"missing generate output {csv_path}; run `probesel generate` first"
                )
            with open(json_path) as fh:
                if json.load(fh).get("config_hash") != config.config_hash():
                    raise StaleCacheError(f"{json_path} has a stale config hash")
            logs.extend(solvers.read_runs(csv_path, json_path))
    return PipelineData(config, logs)


def _write_dataset_csv(path: Path, dataset, config_hash: str):
    with open(path, "w", newline="") as fh:
        fh.write(f"# config_hash={config_hash}\n")
        writer = csv.writer(fh)
        writer.writerow(("function_id", "instance_id", "run", "label") + tuple(dataset.feature_names))
        for row, (fid, iid, run) in enumerate(dataset.origins):
            writer.writerow(
                [fid, iid, run, dataset.y[row]] + [repr(float(v)) for v in dataset.x[row]]
            )


def cmd_extract(config: ExperimentConfig, force: bool = False, masks: bool = False) -> int:
    """Derive trajectory / time-series-feature / landscape-feature datasets."""
    out = output_dir(config)
    _check_manifest(out, config, force)
    data = load_runs(config)
    ds_dir = out / "datasets"
    ds_dir.mkdir(parents=True, exist_ok=True)
    chash = config.config_hash()
    written = 0
    for g in config.generations:
        for mode in config.modes:
            for kind in config.kinds:
                raw = data.trajectory_dataset(kind, mode, g)
                _write_dataset_csv(ds_dir / f"raw_{kind}_{mode}_g{g}.csv", raw, chash)
                ts = data.ts_dataset(kind, mode, g)
                _write_dataset_csv(ds_dir / f"tsfeat_{kind}_{mode}_g{g}.csv", ts, chash)
                written += 2
                if masks:
                    mask = boruta_select(
                        ts.x,
                        ts.y,
                        feature_names=list(ts.feature_names),
                        max_iter=config.boruta_max_iter,
                        alpha=config.boruta_alpha,
                        seed=config.base_seed,
                        n_trees=config.boruta_trees,
                    )
                    (ds_dir / f"mask_{kind}_{mode}_g{g}.json").write_text(mask_to_json(mask))
                    written += 1
    for budget in config.ela_budgets:
        _write_dataset_csv(ds_dir / f"ela_{budget}.csv", data.ela_dataset(budget), chash)
        written += 1
    print(f"extract: {written} dataset files -> {ds_dir}")
    return 0


STUDIES = ("accuracy", "shuffle", "order", "sweep", "project")


def _require_extract(config: ExperimentConfig):
    ds_dir = output_dir(config) / "datasets"
    if not ds_dir.exists() or not any(ds_dir.iterdir()):
        raise IncompleteDataError(
            f"missing extract outputs in {ds_dir}; run `probesel extract` first"
        )


def _write_report(out: Path, report, config: ExperimentConfig):
    rep_dir = out / "reports"
    rep_dir.mkdir(parents=True, exist_ok=True)
    stem = f"{report.experiment.split('[')[0]}_{config.config_hash()}"
    (rep_dir / f"{stem}.json").write_text(report.to_json())
    if report.cells:
        with open(rep_dir / f"{stem}_folds.csv", "w", newline="") as fh:
            fh.write(f"# config_hash={config.config_hash()}\n")
            writer = csv.writer(fh)
            writer.writerow(("cell", "fold", "accuracy"))
            for cell in report.cells:
                for i, acc in enumerate(cell["fold_accuracies"]):
                    writer.writerow((cell["name"], i, repr(acc)))
        with open(rep_dir / f"{stem}_predictions.csv", "w", newline="") as fh:
            fh.write(f"# config_hash={config.config_hash()}\n")
            writer = csv.writer(fh)
            writer.writerow(("cell", "fold", "function_id", "instance_id", "run", "true", "pred"))
            for cell in report.cells:
                for p in cell["predictions"]:
                    writer.writerow(
                        (cell["name"], p["fold"], p["function_id"], p["instance_id"], p["run"], p["true"], p["pred"])
                    )
        svg = svg_boxplot(
            [(c["name"], c["fold_accuracies"]) for c in report.cells],
            title=f"{report.experiment}: LOIO accuracy",
        )
        (rep_dir / f"{stem}.svg").write_text(svg)
    if report.projection:
        with open(rep_dir / f"{stem}_projection.csv", "w", newline="") as fh:
            fh.write(f"# config_hash={config.config_hash()}\n")
            writer = csv.writer(fh)
            writer.writerow(("x", "y", "function_id", "instance_id", "run", "winner"))
            for p in report.projection:
                writer.writerow(
                    (repr(p["x"]), repr(p["y"]), p["function_id"], p["instance_id"], p["run"], p["winner"])
                )
    return rep_dir / f"{stem}.json"


def _print_cells(report):
    width = max((len(c["name"]) for c in report.cells), default=10)
    print(f"{'cell':<{width}}  median    min    max  folds")
    for cell in report.cells:
        accs = " ".join(f"{a:.3f}" for a in cell["fold_accuracies"])
        print(f"{cell['name']:<{width}}  {cell['median']:.3f}  {cell['min']:.3f}  {cell['max']:.3f}  [{accs}]")
    for ks in report.ks_results:
        print(f"KS {ks['cell']} vs {ks['vs']}: D={ks['statistic']:.3f} p={ks['p_value']:.4f}")


def cmd_run_study(config: ExperimentConfig, study: str) -> int:
    _require_extract(config)
    data = load_runs(config)
    if study == "accuracy":
        report = accuracy_study(config, data)
    elif study == "shuffle":
        report = shuffle_study(config, data, generations=max(config.generations))
    elif study == "order":
        report = order_study(config, data, generations=max(config.generations))
    elif study == "sweep":
        lo, hi = min(config.generations), max(config.generations)
        report = generation_sweep(config, data, generation_range=tuple(range(lo, hi + 1)))
    elif study == "project":
        report = project(config, data, generations=max(config.generations))
    else:
        raise InvalidArgumentError(f"unknown study {study!r}")
    path = _write_report(output_dir(config), report, config)
    _print_cells(report)
    if report.projection:
        print(f"projection rows: {len(report.projection)}")
    print(f"report -> {path}")
    return 0


def cmd_report(config: ExperimentConfig) -> int:
    """Summarize all reports found in the output directory."""
    rep_dir = output_dir(config) / "reports"
    if not rep_dir.exists():
        raise IncompleteDataError(f"no reports directory at {rep_dir}")
    found = sorted(rep_dir.glob("*.json"))
    if not found:
        raise IncompleteDataError(f"no reports in {rep_dir}")
    for path in found:
        doc = json.loads(path.read_text())
        print(f"== {doc['experiment']} ({path.name}), config {doc['config_hash']}")
        for cell in doc["cells"]:
            print(f"   {cell['name']}: median={cell['median']:.3f} folds={[round(a, 3) for a in cell['fold_accuracies']]}")
        for ks in doc["ks_results"]:
            print(f"   KS {ks['cell']}: D={ks['statistic']:.3f} p={ks['p_value']:.4f}")
        if doc["projection"]:
            print(f"   projection rows: {len(doc['projection'])}")
    return 0


def build_parser():
    parser = argparse.ArgumentParser(prog="probesel", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("--config", required=True, help="experiment INI file")
        p.add_argument("--seed", type=int, default=None, help="override base seed")

    p_gen = sub.add_parser("generate", help="run the solver portfolio, cache run logs")
    common(p_gen)
    p_gen.add_argument("--jobs", type=int, default=1)
    p_gen.add_argument("--force", action="store_true")

    p_ext = sub.add_parser("extract", help="derive datasets from cached run logs")
    common(p_ext)
    p_ext.add_argument("--force", action="store_true")
    p_ext.add_argument("--masks", action="store_true", help="also export Boruta masks")

    p_study = sub.add_parser("study", help="run one of the evaluation studies")
    p_study.add_argument("study", choices=STUDIES)
    common(p_study)

    p_rep = sub.add_parser("report", help="print summaries of existing reports")
    common(p_rep)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        config = load_config(args.config)
        if args.seed is not None:
            config = dataclasses.replace(config, base_seed=args.seed).validate()
    except InvalidArgumentError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    try:
        if args.command == "generate":
            return cmd_generate(config, jobs=args.jobs, force=args.force)
        if args.command == "extract":
            return cmd_extract(config, force=args.force, masks=args.masks)
        if args.command == "study":
            return cmd_run_study(config, args.study)
        if args.command == "report":
            return cmd_report(config)
        parser.error(f"unknown command {args.command!r}")
    except (StaleCacheError, IncompleteDataError, OSError, InvalidArgumentError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
