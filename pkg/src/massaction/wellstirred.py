"""Individual well-stirred stochastic dynamics.

One step visits every particle once.  Particles are drawn in random
order; each drawn particle tosses an ``alpha``-coin and either follows
its solitary rule, or pulls the next undrawn particle as its encounter
partner, after which both apply their binary rules independently.  A
particle left with no partner falls back to its solitary rule.
"""
from dataclasses import dataclass
from functools import partial

import numpy as np

from .automaton import ParticleAutomaton
from .replicates import EnsembleResult, run_replicates
from .rng import RngStream


@dataclass
class MicroState:
    ids: np.ndarray
    states: np.ndarray

    def __post_init__(self):
        self.ids = np.asarray(self.ids, dtype=np.int64)
        self.states = np.asarray(self.states, dtype=np.intp)
        if self.ids.shape != self.states.shape:
            raise ValueError("ids and states must have the same length")

    def __len__(self):
        return len(self.ids)

    def as_pairs(self):
        return list(zip(self.ids.tolist(), self.states.tolist()))


def microstate_from_counts(initial) -> MicroState:
    """Ids ``0..m-1`` assigned to species in count order."""
    initial = np.asarray(initial, dtype=np.int64)
    if np.any(initial < 0):
        raise ValueError("counts must be non-negative")
    states = np.repeat(np.arange(len(initial)), initial)
    return MicroState(np.arange(len(states)), states)


def counts(L: MicroState, n: int) -> np.ndarray:
    return np.bincount(L.states, minlength=n).astype(np.int64)


def pairing(coins: np.ndarray):
    """Resolve who initiates and who is consumed as a partner.

    ``coins[p]`` says whether the particle drawn at position ``p`` would go
    binary if it initiates.  Position 0 initiates; a position is a partner
    exactly when its predecessor initiated and went binary.  Inside a run of
    ``True`` coins the roles therefore alternate, which lets the sequential
    scan be done with a running maximum.

    Returns ``(solitary, leader)`` boolean masks: ``leader[p]`` marks an
    initiator paired with position ``p + 1``.
    """
    m = len(coins)
    idx = np.arange(m)
    last_false = np.maximum.accumulate(np.where(coins, -1, idx))
    prev_last_false = np.concatenate(([-1], last_false[:-1]))
    run = idx - 1 - prev_last_false  # consecutive True coins just before p
    initiator = run % 2 == 0
    has_next = idx < m - 1
    leader = initiator & coins & has_next
    solitary = initiator & ~leader
    return solitary, leader


def ssa_step(a: ParticleAutomaton, L: MicroState, alpha: float,
             rng: RngStream) -> MicroState:
    m = len(L)
    if m == 0:
        return MicroState(L.ids.copy(), L.states.copy())
    order = rng.permutation(m)
    coins = rng.random(m) < alpha
    u = rng.random(m)

    q = L.states[order]
    _, leader = pairing(coins)
    inp = np.full(m, a.n, dtype=np.intp)
    lead_pos = np.flatnonzero(leader)
    inp[lead_pos] = q[lead_pos + 1]
    inp[lead_pos + 1] = q[lead_pos]

    new = np.empty(m, dtype=np.intp)
    new[order] = a.sample(q, inp, u)
    return MicroState(L.ids.copy(), new)


def simulate_ssa(a: ParticleAutomaton, initial, alpha: float, T: int,
                 rng: RngStream) -> np.ndarray:
    """Counts after each of ``T`` steps, shape ``(T + 1, n)``."""
    if T < 0:
        raise ValueError("horizon must be non-negative")
    L = microstate_from_counts(initial)
    out = np.empty((T + 1, a.n), dtype=np.int64)
    out[0] = counts(L, a.n)
    for t in range(1, T + 1):
        L = ssa_step(a, L, alpha, rng)
        out[t] = counts(L, a.n)
    return out


def _ssa_worker(a, initial, alpha, T, rng):
    return simulate_ssa(a, initial, alpha, T, rng)


def ensemble(a: ParticleAutomaton, initial, alpha: float, T: int,
             replicates: int, seed: int, jobs: int = 1) -> EnsembleResult:
    """Run replicates on streams ``(seed, 0..R-1)``; see :class:`EnsembleResult`."""
    worker = partial(_ssa_worker, a, np.asarray(initial, dtype=np.int64), alpha, T)
    runs = run_replicates(worker, replicates, seed, jobs)
    return EnsembleResult(np.stack(runs))
