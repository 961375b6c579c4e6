"""From-scratch tree ensembles (random forest, rotation forest) and PCA."""

from ._kernel import COMPILED, best_split
from .forest import (
    RANDOM_FOREST,
    ROTATION_FOREST,
    TrainedModel,
    fit_random_forest,
    fit_rotation_forest,
    importances,
    model_from_json,
    model_to_json,
    predict,
)
from .pca import full_basis, pca
from .tree import CartTree, grow_tree

__all__ = [
    "COMPILED",
    "best_split",
    "RANDOM_FOREST",
    "ROTATION_FOREST",
    "TrainedModel",
    "fit_random_forest",
    "fit_rotation_forest",
    "importances",
    "model_from_json",
    "model_to_json",
    "predict",
    "pca",
    "full_basis",
    "CartTree",
    "grow_tree",
]
