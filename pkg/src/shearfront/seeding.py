"""Deterministic seed derivation for ensembles and sweeps.

Every random object in this package is reproducible from a single 64-bit
master seed.  Child seeds are derived through a splittable counter
construction (SeedSequence over the tuple (master, stream, index)), so
ensemble results do not depend on worker scheduling.
"""

import numpy as np

# stream tags keep path seeds, sweep-point seeds and per-term seeds
# structurally disjoint
PATH_STREAM = 0
SWEEP_STREAM = 1
TERM_STREAM = 2


def derive_seed(master: int, *key: int) -> int:
    """Derive a 64-bit child seed from a master seed and an integer key path."""
    entropy = (int(master),) + tuple(int(k) for k in key)
    return int(np.random.SeedSequence(entropy=entropy).generate_state(1, np.uint64)[0])
