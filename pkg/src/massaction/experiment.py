"""The five-species spatial vs. well-stirred comparison.

For one placement variant this runs the spatial model, the well-stirred
SSA at the geometry-bridged density, and two mean-field trajectories at
that density: one with the configured binary weight and one with the
parameters matched to the SSA pairing scheme.
"""
from dataclasses import dataclass, replace

import numpy as np

from .meanfield import simulate_mean, ssa_matched_parameters
from .runner import spatial_ensemble
from .scenario import five_species_scenario
from .wellstirred import ensemble

E = 4


@dataclass
class ExperimentResult:
    variant: str
    alpha: float
    c_bin: float
    spatial: np.ndarray  # (R, T + 1, 5) counts
    ssa: np.ndarray  # (R, T + 1, 5) counts
    mean: np.ndarray  # (T + 1, 5) expected counts, configured c_bin
    mean_matched: np.ndarray  # (T + 1, 5) expected counts, SSA-matched
    frames: list = None


def half_time(series) -> float:
    """First step at which ``series`` reaches half its final value.

    NaN when the final value is zero (nothing to reach).
    """
    series = np.asarray(series)
    final = series[-1]
    if final <= 0:
        return float("nan")
    return float(np.argmax(series >= final / 2.0))


def checkpoints(T: int):
    return [T // 4, T // 2, (3 * T) // 4]


def run_experiment(variant: str, seed: int = 0, replicates: int = 20, T=None,
                   jobs: int = 1, frame_every=None) -> ExperimentResult:
    cfg, automaton = five_species_scenario(variant)
    cfg = replace(cfg, seed=seed, replicates=replicates, T=cfg.T if T is None else T)
    alpha = cfg.resolved_alpha()
    m = cfg.m
    x0 = cfg.counts / m

    spatial, frames = spatial_ensemble(cfg, jobs, frame_every)
    ssa = ensemble(automaton, cfg.counts, alpha, cfg.T, replicates, seed, jobs)
    mean = simulate_mean(automaton, x0, alpha, cfg.T, cfg.c_bin) * m
    alpha_eff, c_eff = ssa_matched_parameters(alpha)
    matched = simulate_mean(automaton, x0, alpha_eff, cfg.T, c_eff) * m
    return ExperimentResult(variant, alpha, cfg.c_bin, spatial.runs, ssa.runs,
                            mean, matched, frames)


def summarize(res: ExperimentResult) -> dict:
    """Median statistics of the E curve used for the qualitative comparison."""
    T = res.spatial.shape[1] - 1
    cps = checkpoints(T)
    spatial_e = res.spatial[:, :, E]
    ssa_e = res.ssa[:, :, E]
    halves = np.array([half_time(run) for run in spatial_e])
    finite = halves[~np.isnan(halves)]
    return {
        "variant": res.variant,
        "alpha": res.alpha,
        "c_bin": res.c_bin,
        "replicates": int(res.spatial.shape[0]),
        "T": T,
        "spatial_final_C_max": int(res.spatial[:, -1, 2].max()),
        "spatial_final_E_max": int(spatial_e[:, -1].max()),
        "spatial_final_E_median": float(np.median(spatial_e[:, -1])),
        "ssa_final_E_median": float(np.median(ssa_e[:, -1])),
        "spatial_E_half_time_median": float(np.median(finite)) if finite.size else None,
        "spatial_E_half_time_defined": int(finite.size),
        "checkpoints": cps,
        "spatial_E_median_at_checkpoints": [float(np.median(spatial_e[:, t])) for t in cps],
        "ssa_E_median_at_checkpoints": [float(np.median(ssa_e[:, t])) for t in cps],
        "mean_E_at_checkpoints": [float(res.mean[t, E]) for t in cps],
        "mean_matched_E_at_checkpoints": [float(res.mean_matched[t, E]) for t in cps],
    }
