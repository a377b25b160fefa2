"""Execute a scenario with whichever model it selects."""
from dataclasses import dataclass
from functools import partial
from typing import Optional

import numpy as np

from .meanfield import simulate_mean
from .replicates import EnsembleResult, run_replicates
from .scenario import ScenarioConfig, init_spatial
from .spatial import simulate_spatial
from .wellstirred import ensemble


@dataclass
class RunResult:
    config: ScenarioConfig
    alpha: Optional[float]
    trajectory: Optional[np.ndarray] = None  # mean model, concentrations
    ensemble: Optional[EnsembleResult] = None  # ssa / spatial, counts
    frames: Optional[list] = None  # [(t, ids, states, pos)] of replicate 0


def _spatial_worker(cfg, frame_every, rng):
    frames = [] if (frame_every and rng.stream_id == 0) else None

    def keep(t, state):
        frames.append((t, state.ids.copy(), state.states.copy(), state.pos.copy()))

    start = init_spatial(cfg, rng)
    counts = simulate_spatial(cfg.automaton, start, cfg.arena, cfg.T, rng,
                              frame_every=frame_every if frames is not None else None,
                              on_frame=keep)
    return counts, frames


def spatial_ensemble(cfg: ScenarioConfig, jobs: int = 1, frame_every=None):
    out = run_replicates(partial(_spatial_worker, cfg, frame_every),
                         cfg.replicates, cfg.seed, jobs)
    return EnsembleResult(np.stack([c for c, _ in out])), out[0][1]


def run_scenario(cfg: ScenarioConfig, jobs: int = 1, frame_every=None) -> RunResult:
    if cfg.model == "mean":
        alpha = cfg.resolved_alpha()
        x0 = cfg.counts / cfg.m
        traj = simulate_mean(cfg.automaton, x0, alpha, cfg.T, cfg.c_bin)
        return RunResult(cfg, alpha, trajectory=traj)
    if cfg.model == "ssa":
        alpha = cfg.resolved_alpha()
        ens = ensemble(cfg.automaton, cfg.counts, alpha, cfg.T, cfg.replicates,
                       cfg.seed, jobs)
        return RunResult(cfg, alpha, ensemble=ens)
    alpha = cfg.resolved_alpha() if cfg.alpha is not None else None
    ens, frames = spatial_ensemble(cfg, jobs, frame_every)
    return RunResult(cfg, alpha, ensemble=ens, frames=frames)
