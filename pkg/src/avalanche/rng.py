"""Reproducible counter-based random streams for parallel Monte Carlo.

Every replicate draws from its own Philox stream keyed by
``(master_seed, replicate_index)``, so estimates are bit-identical no
matter how replicates are scheduled across workers.
"""

import numpy as np

_MASK64 = (1 << 64) - 1


def replicate_rng(master_seed: int, replicate_index: int) -> np.random.Generator:
    """Return the generator for one replicate of an experiment.

    The Philox key is the pair (master_seed, replicate_index), both
    reduced mod 2**64.  Streams for distinct pairs are independent.
    """
    key = np.array([master_seed & _MASK64, replicate_index & _MASK64],
                   dtype=np.uint64)
    return np.random.Generator(np.random.Philox(key=key))


def stream_rng(master_seed: int, label: int) -> np.random.Generator:
    """Named non-replicate stream (e.g. for a one-off auxiliary draw).

    Labels live in a different half of the key space than replicate
    indices so they can never collide with ``replicate_rng`` streams.
    """
    return replicate_rng(~master_seed & _MASK64, label)
