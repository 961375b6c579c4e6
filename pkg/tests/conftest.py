import pytest

from probesel import experiments as ex
from probesel.config import ExperimentConfig


def tiny_config(**overrides) -> ExperimentConfig:
    base = dict(
        dimension=2,
        instances_per_function=2,
        runs_per_instance=2,
        labeling_budget=300,
        generations=(2, 7),
        modes=("current", "best"),
        kinds=("C", "P", "ALL"),
        ela_budgets=(60,),
        rf_trees=15,
        rotf_trees=4,
        boruta_max_iter=20,
        boruta_trees=10,
        base_seed=11,
    )
    base.update(overrides)
    return ExperimentConfig(**base).validate()


@pytest.fixture(scope="session")
def tiny_data():
    """One shared tiny pipeline for the experiment-level tests."""
    config = tiny_config()
    return ex.PipelineData.generate(config)
