"""Mass-action dynamics of probabilistic-automaton particles.

Three aggregate models share one automaton description: deterministic
mean-field iteration (:mod:`massaction.meanfield`), well-stirred
stochastic simulation (:mod:`massaction.wellstirred`) and spatial
reaction-diffusion on a torus (:mod:`massaction.spatial`).
"""
from .automaton import (ParticleAutomaton, check_causal_product, parse_automaton,
                        sample_transition, serialize_automaton, validate)
from .meanfield import (delta1, delta2, derive_polynomial, fixpoint, simulate_mean,
                        step)
from .rng import RngStream
from .spatial import Arena, SpatialState, alpha_from_geometry, simulate_spatial
from .wellstirred import MicroState, counts, ensemble, simulate_ssa, ssa_step

__version__ = "0.1.0"
