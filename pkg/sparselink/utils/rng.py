"""Keyed random streams.

Every unit of Monte Carlo work (channel draw, SNR point, trial) gets its
own counter-based Philox generator keyed by the campaign seed and the
unit's integer coordinates, so results do not depend on execution order.
"""

import numpy as np


def stream(seed: int, *keys: int) -> np.random.Generator:
    """Create the random stream for one unit of work.

    Args:
        seed: The campaign seed (any non-negative integer up to 64 bits).
        *keys: Non-negative integer coordinates of the work unit.

    Returns:
        A Generator backed by a Philox bit generator.
    """
    if seed < 0 or any(k < 0 for k in keys):
        raise ValueError("Seed and stream keys must be non-negative")
    entropy = np.random.SeedSequence([int(seed), len(keys), *(int(k) for k in keys)])
    key = entropy.generate_state(2, dtype=np.uint64)
    return np.random.Generator(np.random.Philox(key=key))
