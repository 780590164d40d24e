"""Portable random streams.

Every generator is NumPy's Philox-4x64 counter-based bit generator, keyed
through a SeedSequence so (seed, scene index, stream) always maps to the
same sequence on every platform.
"""

import numpy as np

STREAM_SCENE = 0
STREAM_SEMANTIC = 1
STREAM_INSTANCES = 2

MAX_SEED = 2**64 - 1


def make_rng(seed: int, index: int, stream: int) -> np.random.Generator:
    sequence = np.random.SeedSequence(int(seed), spawn_key=(int(index), int(stream)))
    return np.random.Generator(np.random.Philox(sequence))
