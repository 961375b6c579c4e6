"""Shared helpers: portable seeding, errors, and float-exact (de)serialization."""

import hashlib
import json

import numpy as np


class InvalidArgumentError(ValueError):
    """Argument outside its documented range or shape."""


class InsufficientDataError(ValueError):
    """Not enough samples / generations / rows for the requested operation."""


class IncompatibleError(ValueError):
    """Objects that must match (origin, mode, algorithm, ...) do not."""


class IncompleteDataError(RuntimeError):
    """A pipeline stage is missing upstream data."""


class StaleCacheError(RuntimeError):
    """On-disk artifacts were produced under a different configuration."""


def derive_seed(*parts) -> int:
    """Derive a 64-bit seed from a tuple of identifiers.

    Stable across platforms and processes: parts are rendered to text and
    hashed, so (base_seed, "pso", 3, 1, 0) always maps to the same integer.
    """
    text = "|".join(str(p) for p in parts)
    digest = hashlib.sha256(text.encode("utf-8")).digest()
    return int.from_bytes(digest[:8], "little")


def make_rng(*parts) -> np.random.Generator:
    """Seeded PCG64 generator derived from identifiers via `derive_seed`."""
    return np.random.Generator(np.random.PCG64(derive_seed(*parts)))


def json_dumps_stable(obj) -> str:
    """Deterministic JSON text: sorted keys, round-trip-exact floats."""
    return json.dumps(obj, sort_keys=True, separators=(",", ":"))


def to_jsonable(obj):
    """Recursively convert numpy scalars/arrays so json can serialize them.

    Floats go through Python's repr-based json encoding, which round-trips
    float64 bit-exactly.
    """
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    if isinstance(obj, (np.floating,)):
        return float(obj)
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, dict):
        return {k: to_jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [to_jsonable(v) for v in obj]
    return obj
