"""Seeded, splittable random streams.

Every stochastic run owns one stream identified by ``(seed, stream_id)``;
replicate ``r`` of an ensemble uses ``stream_id = r``.  Streams are
Philox4x32-10 counter-based generators keyed through numpy's SeedSequence,
so the variate sequence depends only on the pair and not on the platform
or on how replicates are scheduled.

Only ``Generator.random`` (raw doubles) is used by the simulators.  Its
output for a given bit generator state is fixed, whereas numpy reserves
the right to change the algorithms behind ``integers``/``permutation``.
"""
import numpy as np

RNG_ALGORITHM = "numpy-Philox4x32-10/SeedSequence(seed,spawn_key=(stream,))/doubles-v1"

_MASK64 = (1 << 64) - 1


class RngStream:
    def __init__(self, seed: int, stream_id: int = 0):
        if seed < 0 or stream_id < 0:
            raise ValueError("seed and stream id must be non-negative")
        self.seed = int(seed) & _MASK64
        self.stream_id = int(stream_id)
        ss = np.random.SeedSequence(self.seed, spawn_key=(self.stream_id,))
        self.generator = np.random.Generator(np.random.Philox(ss))

    def random(self, size=None):
        """Uniform doubles on [0, 1)."""
        return self.generator.random(size)

    def permutation(self, m: int) -> np.ndarray:
        """Uniformly random ordering of ``range(m)``, built from raw doubles."""
        return np.argsort(self.generator.random(m), kind="stable")

    def __repr__(self):
        return f"RngStream(seed={self.seed}, stream_id={self.stream_id})"
