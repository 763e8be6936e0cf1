import zlib

import numpy as np


def substream(seed, name, *keys):
    """Named random substream derived from the run seed.

    Every consumer of randomness (data, init, sampling, gp-eps, ...) asks for
    its own stream so that adding draws in one place never shifts another.
    """
    entropy = [int(seed) & 0xFFFFFFFF, zlib.crc32(name.encode("utf-8"))]
    entropy.extend(int(k) & 0xFFFFFFFF for k in keys)
    return np.random.default_rng(np.random.SeedSequence(entropy))


def derive_seed(seed, name, *keys):
    return int(substream(seed, name, *keys).integers(0, 2**31 - 1))
