"""Individual spatial dynamics on a periodic rectangle.

Each step has two phases.  Diffusion moves every particle by a random
vector of length ``h ~ U[0, s]`` and direction ``theta ~ U[0, 2 pi)``,
wrapping around the torus.  Reaction then updates every particle against
a snapshot of the post-diffusion configuration: a particle with no
neighbor closer than ``r`` follows its solitary rule; otherwise each
neighbor ``q'`` yields one outcome of ``delta(q, q', .)`` and the new state
is drawn uniformly from that multiset of outcomes.
"""
import math
from dataclasses import dataclass

import numpy as np

from .automaton import ParticleAutomaton
from .errors import InvalidGeometry
from .rng import RngStream

BRUTE_FORCE_MAX = 64


@dataclass(frozen=True)
class Arena:
    width: float
    height: float
    r: float
    s: float

    def __post_init__(self):
        if not (self.width > 0 and self.height > 0):
            raise InvalidGeometry("arena dimensions must be positive")
        if not self.r > 0:
            raise InvalidGeometry("interaction radius must be positive")
        if not self.s >= 0:
            raise InvalidGeometry("step bound must be non-negative")
        if not self.r < min(self.width, self.height) / 2:
            raise InvalidGeometry(
                f"interaction radius {self.r} must be below half the "
                f"shorter side ({min(self.width, self.height) / 2})")

    @property
    def area(self) -> float:
        return self.width * self.height

    @property
    def size(self) -> np.ndarray:
        return np.array([self.width, self.height])


@dataclass
class SpatialState:
    ids: np.ndarray
    states: np.ndarray
    pos: np.ndarray  # (m, 2)

    def __post_init__(self):
        self.ids = np.asarray(self.ids, dtype=np.int64)
        self.states = np.asarray(self.states, dtype=np.intp)
        self.pos = np.asarray(self.pos, dtype=float).reshape(-1, 2)
        if not (len(self.ids) == len(self.states) == len(self.pos)):
            raise ValueError("ids, states and positions must have equal length")

    def __len__(self):
        return len(self.ids)


def _axis_gap(d, extent):
    d = np.abs(d)
    return np.minimum(d, extent - d)


def torus_distance(y1, y2, arena: Arena):
    """Euclidean distance with each axis measured the short way round."""
    delta = np.asarray(y1, dtype=float) - np.asarray(y2, dtype=float)
    dx = _axis_gap(delta[..., 0], arena.width)
    dy = _axis_gap(delta[..., 1], arena.height)
    return np.sqrt(dx * dx + dy * dy)


def wrap(pos, arena: Arena) -> np.ndarray:
    out = np.mod(pos, arena.size)
    # mod of a tiny negative number rounds up to the extent itself
    out[out >= arena.size] = 0.0
    return out


def diffuse(state: SpatialState, arena: Arena, rng: RngStream) -> SpatialState:
    m = len(state)
    h = arena.s * rng.random(m)
    theta = 2.0 * math.pi * rng.random(m)
    step = np.column_stack((h * np.cos(theta), h * np.sin(theta)))
    return SpatialState(state.ids, state.states, wrap(state.pos + step, arena))


# -- neighbor search -----------------------------------------------------

def _pairs_brute(pos, arena):
    m = len(pos)
    d = torus_distance(pos[:, None, :], pos[None, :, :], arena)
    close = d < arena.r
    close[np.arange(m), np.arange(m)] = False
    i, j = np.nonzero(close)
    return i, j


_STENCIL_X = np.repeat([-1, 0, 1], 3)
_STENCIL_Y = np.tile([-1, 0, 1], 3)


def _pairs_grid(pos, arena):
    m = len(pos)
    nx = int(arena.width // arena.r)
    ny = int(arena.height // arena.r)
    cx = np.minimum((pos[:, 0] / (arena.width / nx)).astype(np.intp), nx - 1)
    cy = np.minimum((pos[:, 1] / (arena.height / ny)).astype(np.intp), ny - 1)
    cell = cx * ny + cy
    order = np.argsort(cell, kind="stable")
    population = np.bincount(cell, minlength=nx * ny)
    start = np.cumsum(population) - population

    tx = (cx[:, None] + _STENCIL_X) % nx
    ty = (cy[:, None] + _STENCIL_Y) % ny
    target = (tx * ny + ty).ravel()  # particle-major: 9 candidate cells each
    cnt = population[target]
    first = np.cumsum(cnt) - cnt
    offset = np.arange(first[-1] + cnt[-1]) - np.repeat(first, cnt)
    i = np.repeat(np.arange(m), cnt.reshape(m, 9).sum(axis=1))
    j = order[np.repeat(start[target], cnt) + offset]
    keep = (torus_distance(pos[i], pos[j], arena) < arena.r) & (i != j)
    i, j = i[keep], j[keep]
    srt = np.argsort(i * m + j, kind="stable")
    return i[srt], j[srt]


def neighbor_pairs(pos, arena: Arena):
    """Directed neighbor pairs ``(i, j)``, sorted by ``i`` then ``j``.

    Uses a uniform bucket grid with cells at least ``r`` wide, so every
    neighbor lies in the wrapped 3x3 block around a particle's own cell.
    Small populations, and arenas too narrow for three cells per axis, are
    searched exhaustively.
    """
    pos = np.asarray(pos, dtype=float).reshape(-1, 2)
    if len(pos) == 0:
        empty = np.zeros(0, dtype=np.intp)
        return empty, empty
    if (len(pos) <= BRUTE_FORCE_MAX or arena.width // arena.r < 3
            or arena.height // arena.r < 3):
        return _pairs_brute(pos, arena)
    return _pairs_grid(pos, arena)


def neighbors_grid(state: SpatialState, arena: Arena) -> dict:
    """Map each particle id to the ids of particles within ``r``."""
    i, j = neighbor_pairs(state.pos, arena)
    out = {int(g): [] for g in state.ids}
    for a, b in zip(state.ids[i].tolist(), state.ids[j].tolist()):
        out[a].append(b)
    return out


# -- reaction ------------------------------------------------------------

def react_particle(a: ParticleAutomaton, q: int, neighbor_states,
                   u_solitary: float, u_pairs, v: float) -> int:
    """Reaction outcome for one particle given its own pre-drawn variates.

    Reference form of the reaction phase: ``u_pairs[k]`` drives the
    encounter with the ``k``-th neighbor and ``v`` picks one element of
    the outcome multiset.
    """
    if len(neighbor_states) == 0:
        return int(a.sample(q, a.n, u_solitary))
    outcomes = [int(a.sample(q, qn, u)) for qn, u in zip(neighbor_states, u_pairs)]
    return outcomes[min(int(v * len(outcomes)), len(outcomes) - 1)]


def react(a: ParticleAutomaton, states, i, j, u_solitary, u_pairs, v) -> np.ndarray:
    """Synchronous reaction phase over all particles.

    ``(i, j)`` are the directed neighbor pairs grouped by ``i``; all
    states are read from ``states`` (the snapshot), never from partially
    updated values.
    """
    m = len(states)
    degree = np.bincount(i, minlength=m)
    new = a.sample(states, np.full(m, a.n), u_solitary)
    if len(i):
        outcome = a.sample(states[i], states[j], u_pairs)
        first = np.cumsum(degree) - degree
        busy = np.flatnonzero(degree)
        pick = np.minimum((v[busy] * degree[busy]).astype(np.intp), degree[busy] - 1)
        new[busy] = outcome[first[busy] + pick]
    return new


def spatial_step(a: ParticleAutomaton, state: SpatialState, arena: Arena,
                 rng: RngStream) -> SpatialState:
    moved = diffuse(state, arena, rng)
    i, j = neighbor_pairs(moved.pos, arena)
    m = len(moved)
    u_solitary = rng.random(m)
    u_pairs = rng.random(len(i))
    v = rng.random(m)
    new = react(a, moved.states, i, j, u_solitary, u_pairs, v)
    return SpatialState(moved.ids, new, moved.pos)


def alpha_from_geometry(r: float, area: float, m: int) -> float:
    """Probability that a particle has at least one of ``m - 1`` others within ``r``.

    Each other particle sits inside the interaction disc with probability
    ``pi r^2 / area``, giving ``1 - (1 - pi r^2 / area) ** (m - 1)``.
    """
    if m < 1:
        raise InvalidGeometry("population must be at least 1")
    if r < 0 or area <= 0:
        raise InvalidGeometry("radius must be non-negative and area positive")
    ratio = math.pi * r * r / area
    if ratio > 1.0 + 1e-12:
        raise InvalidGeometry(f"interaction disc (pi r^2 = {math.pi * r * r:g}) "
                              f"exceeds the arena area {area:g}")
    if m == 1:
        return 0.0
    if ratio >= 1.0:
        return 1.0
    return -math.expm1((m - 1) * math.log1p(-ratio))


def simulate_spatial(a: ParticleAutomaton, initial: SpatialState, arena: Arena,
                     T: int, rng: RngStream, frame_every=None, on_frame=None):
    """Counts after each of ``T`` steps, shape ``(T + 1, n)``.

    With ``frame_every`` set, ``on_frame(t, state)`` is called for every
    ``t`` divisible by it, including ``t = 0``.
    """
    if T < 0:
        raise ValueError("horizon must be non-negative")
    state = initial
    out = np.empty((T + 1, a.n), dtype=np.int64)
    out[0] = np.bincount(state.states, minlength=a.n)
    if frame_every and on_frame is not None:
        on_frame(0, state)
    for t in range(1, T + 1):
        state = spatial_step(a, state, arena, rng)
        out[t] = np.bincount(state.states, minlength=a.n)
        if frame_every and on_frame is not None and t % frame_every == 0:
            on_frame(t, state)
    return out
