"""
Seeded random streams.

Every random quantity in the package is drawn from a stream identified by a
root seed and a tuple of non-negative integer ids.  The derivation rule is

    (seed, ids) -> Generator(PCG64(SeedSequence(seed, spawn_key=ids)))

so a stream depends only on its identifiers, never on the order in which
streams are created or on which worker consumes them.  Stream id prefixes
used by the package:

    (0, rep)               simulated series of Monte Carlo repetition ``rep``
    (1, rep, scheme)       bootstrap draws of repetition ``rep``
    (2, series)            pre-asymptotic oracle series
    (3, replicate)         stand-alone bootstrap replicates
"""
from __future__ import annotations

import numpy as np
from numpy.random import Generator, PCG64, SeedSequence

__all__ = ["stream", "as_generator"]

SERIES = 0
BOOTSTRAP = 1
ORACLE = 2
REPLICATE = 3


def stream(seed: int, *ids: int) -> Generator:
    """Return the generator for stream ``ids`` under root ``seed``."""
    return Generator(PCG64(SeedSequence(int(seed), spawn_key=tuple(int(i) for i in ids))))


def as_generator(rng: Generator | int | None) -> Generator:
    if isinstance(rng, Generator):
        return rng
    return np.random.default_rng(rng)
