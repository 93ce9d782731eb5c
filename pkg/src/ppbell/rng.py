"""Counter-based random streams keyed by (seed, block, stage).

Events are generated in fixed-size blocks. Each block and each simulation
stage gets its own Philox stream, so any event range can be regenerated
independently and the output does not depend on how blocks are spread over
workers.
"""

import numpy as np

BLOCK_SIZE = 4096

# stage identifiers; never renumber, files depend on them
STAGE_CHANNEL = 0
STAGE_KINEMATICS = 1
STAGE_HIDDEN = 2
STAGE_SCATTER = 3
STAGE_TIMING = 4


def stream(seed: int, block: int = 0, stage: int = 0) -> np.random.Generator:
    if seed is None or int(seed) < 0:
        raise ValueError("seed must be a non-negative integer")
    ss = np.random.SeedSequence(int(seed), spawn_key=(int(block), int(stage)))
    return np.random.Generator(np.random.Philox(ss))


def blocks_for_range(start: int, stop: int, block_size: int = BLOCK_SIZE):
    """Block indices covering event ids [start, stop)."""
    if stop <= start:
        return range(0)
    return range(start // block_size, (stop - 1) // block_size + 1)
