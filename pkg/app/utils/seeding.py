"""Deterministic random substreams.

Every random quantity in the laboratory is drawn from an explicit
``numpy.random.Generator``. Parallel work never shares a generator: it is
handed a child stream spawned from a ``SeedSequence``, so the numbers a task
sees depend only on (master seed, task index) and never on the worker count.
"""
from typing import List

import numpy as np

_SEED_BOUND = 2**63


def make_rng(seed: int) -> np.random.Generator:
    """Generator for a 64-bit master seed."""
    return np.random.default_rng(np.random.SeedSequence(int(seed) % 2**64))


def spawn_seed_sequences(rng: np.random.Generator, count: int) -> List[np.random.SeedSequence]:
    # One draw from the parent, so child i is the same whatever `count` is.
    root = np.random.SeedSequence(int(rng.integers(_SEED_BOUND)))
    return root.spawn(count)


def spawn_generators(rng: np.random.Generator, count: int) -> List[np.random.Generator]:
    return [np.random.default_rng(ss) for ss in spawn_seed_sequences(rng, count)]


def row_generator(master_seed: int, row_index: int) -> np.random.Generator:
    """Stream for row `row_index` of a scan run under `master_seed`."""
    ss = np.random.SeedSequence(entropy=int(master_seed) % 2**64, spawn_key=(int(row_index),))
    return np.random.default_rng(ss)
