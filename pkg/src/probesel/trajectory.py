"""Probing trajectories: fitness prefixes of solver runs, plus the
concatenation / shuffling / reordering transforms used by the invariance
studies.

A "current" trajectory is the raw fitness of each evaluated point in
evaluation order; a "best" trajectory is its running minimum.  Values are kept
raw (no normalization).
"""

from dataclasses import dataclass, replace

import numpy as np

from .solvers import RunLog
from .util import IncompatibleError, InsufficientDataError, InvalidArgumentError, make_rng

CURRENT = "current"
BEST = "best"
MODES = (CURRENT, BEST)


@dataclass(frozen=True)
class Trajectory:
    values: np.ndarray
    mode: str
    parts: tuple  # ordered (algorithm, generations, population_size) triples
    origin: tuple  # (function_id, instance_id, run_index)
    label: str = None

    def __len__(self):
        return len(self.values)


def probe(log: RunLog, generations: int, mode: str) -> Trajectory:
    """Fitness prefix of the first `generations` generations of a run."""
    if mode not in MODES:
        raise InvalidArgumentError(f"mode must be one of {MODES}, got {mode!r}")
    if generations < 1:
        raise InvalidArgumentError("generations must be >= 1")
    pop = log.config.population_size
    if log.complete_generations < generations:
        raise InsufficientDataError(
            f"run has {log.complete_generations} complete generations, need {generations}"
        )
    values = log.fitness[: generations * pop].copy()
    if mode == BEST:
        values = np.minimum.accumulate(values)
    values.setflags(write=False)
    return Trajectory(
        values=values,
        mode=mode,
        parts=((log.config.algorithm, generations, pop),),
        origin=(log.instance["function_id"], log.instance["instance_id"], log.run_index),
    )


def concat(parts) -> Trajectory:
    """Join trajectories from several algorithms on the same run identity."""
    parts = list(parts)
    if not parts:
        raise InvalidArgumentError("nothing to concatenate")
    first = parts[0]
    for t in parts[1:]:
        if t.origin != first.origin:
            raise IncompatibleError(f"mixed origins: {t.origin} vs {first.origin}")
        if t.mode != first.mode:
            raise IncompatibleError(f"mixed modes: {t.mode} vs {first.mode}")
    values = np.concatenate([t.values for t in parts])
    values.setflags(write=False)
    meta = tuple(p for t in parts for p in t.parts)
    return Trajectory(values=values, mode=first.mode, parts=meta, origin=first.origin,
                      label=first.label)


def _blocks(traj: Trajectory):
    """Yield (start, stop, part_index, generation) for each generation block."""
    pos = 0
    for pi, (_, gens, pop) in enumerate(traj.parts):
        for g in range(gens):
            yield pos, pos + pop, pi, g
            pos += pop


def shuffle_within_generations(traj: Trajectory, seed: int, pop_sizes_by_part=None) -> Trajectory:
    """Permute values inside each generation block, independently per block.

    Only defined for "current" mode ("best" is order-dependent; rebuild it
    from a shuffled current trajectory instead).
    """
    if traj.mode != CURRENT:
        raise InvalidArgumentError("shuffle is only defined for current-mode trajectories")
    if pop_sizes_by_part is not None:
        declared = tuple(p[2] for p in traj.parts)
        if tuple(pop_sizes_by_part) != declared:
            raise InvalidArgumentError(
                f"pop_sizes_by_part {tuple(pop_sizes_by_part)} != trajectory's {declared}"
            )
    rng = make_rng("shuffle", seed, *traj.origin)
    values = traj.values.copy()
    for start, stop, _, _ in _blocks(traj):
        values[start:stop] = values[start:stop][rng.permutation(stop - start)]
    values.setflags(write=False)
    return replace(traj, values=values)


def reorder_parts(traj: Trajectory, order) -> Trajectory:
    """Rearrange the concatenated parts (and their value blocks) by `order`."""
    order = list(order)
    if sorted(order) != list(range(len(traj.parts))):
        raise InvalidArgumentError(f"{order} is not a permutation of the part indices")
    spans = []
    pos = 0
    for _, gens, pop in traj.parts:
        spans.append((pos, pos + gens * pop))
        pos += gens * pop
    values = np.concatenate([traj.values[spans[i][0] : spans[i][1]] for i in order])
    values.setflags(write=False)
    return replace(traj, values=values, parts=tuple(traj.parts[i] for i in order))


def rebuild_best(traj: Trajectory) -> Trajectory:
    """Running minimum of a current-mode trajectory."""
    if traj.mode != CURRENT:
        raise InvalidArgumentError("rebuild_best expects a current-mode trajectory")
    values = np.minimum.accumulate(traj.values)
    values.setflags(write=False)
    return replace(traj, values=values, mode=BEST)
