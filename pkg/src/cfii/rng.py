"""Deterministic, splittable random streams.

All stochastic routines draw from a counter-based Philox generator keyed by
the user seed plus an explicit integer path, so every context, replication,
or optimizer restart gets its own independent stream.  Results are therefore
identical whether tasks run serially or in parallel, and repeated runs with
the same seed are bit-identical.

Path conventions used inside the package (first path element):

    1  binary-outcome sampling
    2  classifier training/evaluation draws
    3  maximum-likelihood RMSE replications
    4  witness Monte Carlo contexts
    5  adversary restarts
"""

from __future__ import annotations

import numpy as np


def derive_rng(seed: int, *path: int) -> np.random.Generator:
    """Return a Philox generator for the stream `(seed, *path)`.

    Distinct paths give statistically independent streams; the same
    `(seed, path)` always reproduces the same sequence.
    """
    ss = np.random.SeedSequence(entropy=int(seed),
                                spawn_key=tuple(int(p) for p in path))
    key = ss.generate_state(2, np.uint64)
    return np.random.Generator(np.random.Philox(key=key))
