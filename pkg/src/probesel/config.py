"""Experiment configuration: one INI file of record per experiment.

The config hash covers every experiment-relevant field (not the output
location), is stable under key reordering, and is embedded in every produced
artifact so stale caches are detected.
"""

import configparser
import hashlib
from dataclasses import asdict, dataclass

from .util import InvalidArgumentError

KINDS_ALL = ("C", "D", "P", "C-P", "C-D", "D-P", "ALL")
MODES_ALL = ("current", "best")


@dataclass(frozen=True)
class ExperimentConfig:
    dimension: int = 10
    instances_per_function: int = 5
    runs_per_instance: int = 5
    labeling_budget: int = 10000
    base_seed: int = 2024
    checkpoint_cap: int = 8
    generations: tuple = (2, 7)
    modes: tuple = MODES_ALL
    kinds: tuple = KINDS_ALL
    normalize_trajectories: bool = False
    ela_budgets: tuple = (300, 500)
    rf_trees: int = 100
    rotf_trees: int = 10
    rotf_groups: int = 3
    boruta_max_iter: int = 50
    boruta_alpha: float = 0.05
    boruta_trees: int = 25
    output_dir: str = "out"

    def validate(self):
        if self.dimension < 2:
            raise InvalidArgumentError("dimension must be >= 2")
        if self.instances_per_function < 2:
            raise InvalidArgumentError("need >= 2 instances per function for LOIO")
        if self.runs_per_instance < 1:
            raise InvalidArgumentError("runs_per_instance must be >= 1")
        for g in self.generations:
            if g < 1:
                raise InvalidArgumentError("generations must be >= 1")
        # probing prefixes must exist inside the labeling runs (largest pop is PSO's 40)
        need = max(self.generations) * 40
        if self.labeling_budget < need:
            raise InvalidArgumentError(
                f"labeling_budget {self.labeling_budget} below probing need {need}"
            )
        for m in self.modes:
            if m not in MODES_ALL:
                raise InvalidArgumentError(f"unknown mode {m!r}")
        if not self.kinds:
            raise InvalidArgumentError("kinds must not be empty")
        for k in self.kinds:
            if k not in KINDS_ALL:
                raise InvalidArgumentError(f"unknown input kind {k!r}")
        for b in self.ela_budgets:
            if b < 4 * (self.dimension + 1):
                raise InvalidArgumentError(f"ELA budget {b} below 4(d+1)")
        return self

    def config_hash(self) -> str:
        doc = asdict(self)
        doc.pop("output_dir")  # a location, not an experiment parameter
        lines = sorted(f"{k}={v!r}" for k, v in doc.items())
        return hashlib.sha256("\n".join(lines).encode()).hexdigest()[:16]


_SCHEMA = {
    # section -> key -> (field, parser)
    "suite": {
        "dimension": ("dimension", int),
        "instances_per_function": ("instances_per_function", int),
        "runs_per_instance": ("runs_per_instance", int),
    },
    "solvers": {
        "labeling_budget": ("labeling_budget", int),
        "base_seed": ("base_seed", int),
        "checkpoint_cap": ("checkpoint_cap", int),
    },
    "probing": {
        "generations": ("generations", lambda s: tuple(int(v) for v in s.split(","))),
        "modes": ("modes", lambda s: tuple(v.strip() for v in s.split(","))),
        "kinds": ("kinds", lambda s: tuple(v.strip() for v in s.split(","))),
        "normalize": ("normalize_trajectories", lambda s: s.strip().lower() in ("1", "true", "yes")),
    },
    "ela": {
        "budgets": ("ela_budgets", lambda s: tuple(int(v) for v in s.split(","))),
    },
    "classifiers": {
        "rf_trees": ("rf_trees", int),
        "rotf_trees": ("rotf_trees", int),
        "rotf_groups": ("rotf_groups", int),
        "boruta_max_iter": ("boruta_max_iter", int),
        "boruta_alpha": ("boruta_alpha", float),
        "boruta_trees": ("boruta_trees", int),
    },
    "output": {
        "directory": ("output_dir", str),
    },
}


def load_config(path) -> ExperimentConfig:
    parser = configparser.ConfigParser()
    read = parser.read(path)
    if not read:
        raise InvalidArgumentError(f"config file not found: {path}")
    overrides = {}
    for section in parser.sections():
        if section not in _SCHEMA:
            raise InvalidArgumentError(f"unknown config section [{section}]")
        for key, raw in parser[section].items():
            if key not in _SCHEMA[section]:
                raise InvalidArgumentError(f"unknown config key {key!r} in [{section}]")
            name, parse = _SCHEMA[section][key]
            try:
                overrides[name] = parse(raw)
            except ValueError as exc:
                raise InvalidArgumentError(f"bad value for {section}.{key}: {raw!r}") from exc
    return ExperimentConfig(**overrides).validate()
