"""Independent replicate runs with a deterministic merge."""
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from functools import partial

import numpy as np

from .rng import RngStream


def _run_one(worker, seed, stream_id):
    return worker(RngStream(seed, stream_id))


def run_replicates(worker, replicates: int, seed: int, jobs: int = 1):
    """Call ``worker(RngStream(seed, r))`` for ``r`` in ``range(replicates)``.

    ``worker`` must be picklable when ``jobs > 1``.  Results come back in
    replicate order whatever the level of parallelism.
    """
    if replicates < 1:
        raise ValueError("need at least one replicate")
    call = partial(_run_one, worker, seed)
    if jobs <= 1 or replicates == 1:
        return [call(r) for r in range(replicates)]
    with ProcessPoolExecutor(max_workers=min(jobs, replicates)) as pool:
        return list(pool.map(call, range(replicates)))


@dataclass
class EnsembleResult:
    runs: np.ndarray  # (R, T + 1, n)

    @property
    def mean(self) -> np.ndarray:
        return self.runs.mean(axis=0)

    @property
    def std(self) -> np.ndarray:
        if self.runs.shape[0] < 2:
            return np.zeros(self.runs.shape[1:])
        return self.runs.std(axis=0, ddof=1)
