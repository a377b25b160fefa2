import math

import mpmath
import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import automata, random_automaton
from massaction.errors import InvalidGeometry
from massaction.rng import RngStream
from massaction.spatial import (Arena, SpatialState, alpha_from_geometry,
                                diffuse, neighbor_pairs, neighbors_grid, react,
                                react_particle, simulate_spatial, spatial_step,
                                torus_distance, wrap)


def brute_neighbors(pos, width, height, r):
    """All ordered pairs closer than r, by explicit double loop."""
    out = set()
    m = len(pos)
    for i in range(m):
        for j in range(m):
            if i == j:
                continue
            dx = abs(pos[i][0] - pos[j][0])
            dy = abs(pos[i][1] - pos[j][1])
            dx = min(dx, width - dx)
            dy = min(dy, height - dy)
            if math.sqrt(dx * dx + dy * dy) < r:
                out.add((i, j))
    return out


def as_set(i, j):
    return set(zip(i.tolist(), j.tolist()))


class TestArena:
    def test_valid(self):
        arena = Arena(20, 10, 0.3, 0.3)
        assert arena.area == 200
        assert arena.size.tolist() == [20, 10]

    @pytest.mark.parametrize("args", [(0, 10, 1, 1), (10, -1, 1, 1), (10, 10, 0, 1),
                                      (10, 10, 1, -0.1), (10, 10, 5, 1), (10, 4, 2.5, 1)])
    def test_invalid(self, args):
        with pytest.raises(InvalidGeometry):
            Arena(*args)


class TestGeometry:
    def test_torus_distance_wraps(self):
        arena = Arena(10, 10, 1, 1)
        assert torus_distance([0.5, 5], [9.5, 5], arena) == pytest.approx(1.0)
        assert torus_distance([0.5, 0.5], [9.5, 9.5], arena) == pytest.approx(math.sqrt(2))
        assert torus_distance([2, 3], [2, 3], arena) == 0

    @given(st.floats(0, 10, exclude_max=True), st.floats(0, 10, exclude_max=True),
           st.floats(0, 10, exclude_max=True), st.floats(0, 10, exclude_max=True))
    def test_torus_distance_bounds(self, x1, y1, x2, y2):
        arena = Arena(10, 10, 1, 1)
        d = torus_distance([x1, y1], [x2, y2], arena)
        assert 0 <= d <= math.hypot(5, 5) + 1e-12
        assert d == torus_distance([x2, y2], [x1, y1], arena)

    def test_wrap_stays_inside(self):
        arena = Arena(10, 5, 1, 1)
        pos = np.array([[-1e-17, 5.0], [10.0, -3.0], [23.5, 7.25], [-0.5, 4.999]])
        out = wrap(pos, arena)
        assert np.all(out >= 0)
        assert np.all(out < arena.size)
        assert out[2].tolist() == [3.5, 2.25]
        assert out[3].tolist() == pytest.approx([9.5, 4.999])


class TestNeighbors:
    @settings(max_examples=40, deadline=None)
    @given(st.integers(0, 300), st.floats(0.05, 2.0), st.integers(0, 2**32 - 1))
    def test_matches_double_loop(self, m, r, seed):
        arena = Arena(12.0, 9.0, r, 0.1)
        pos = np.random.default_rng(seed).random((m, 2)) * arena.size
        i, j = neighbor_pairs(pos, arena)
        assert as_set(i, j) == brute_neighbors(pos.tolist(), 12.0, 9.0, r)
        assert np.all(np.diff(i * max(m, 1) + j) > 0)  # sorted, no repeats

    def test_exact_radius_excluded_on_both_paths(self):
        # spacing 0.5 is exact in binary, so these distances are exactly r
        for filler in (0, 100):
            arena = Arena(20, 20, 0.5, 0.1)
            base = [[1.0, 1.0], [1.5, 1.0], [19.75, 10.0], [0.25, 10.0],
                    [5.0, 5.0], [5.0, 5.4999]]
            rng = np.random.default_rng(0)
            far = np.column_stack((rng.uniform(8, 18, filler), rng.uniform(12, 18, filler)))
            pos = np.vstack((base, far))
            pairs = as_set(*neighbor_pairs(pos, arena))
            assert (0, 1) not in pairs and (1, 0) not in pairs
            assert (2, 3) not in pairs and (3, 2) not in pairs
            assert (4, 5) in pairs and (5, 4) in pairs
            assert pairs == brute_neighbors(pos.tolist(), 20, 20, 0.5)

    def test_narrow_arena_falls_back(self):
        arena = Arena(2.0, 50.0, 0.9, 0.1)  # fewer than three cells across
        pos = np.random.default_rng(1).random((200, 2)) * arena.size
        assert as_set(*neighbor_pairs(pos, arena)) == brute_neighbors(pos.tolist(), 2.0, 50.0, 0.9)

    def test_neighbors_grid_by_id(self):
        arena = Arena(10, 10, 1, 0.1)
        state = SpatialState([7, 8, 9], [0, 0, 0], [[1, 1], [1.5, 1], [6, 6]])
        assert neighbors_grid(state, arena) == {7: [8], 8: [7], 9: []}

    def test_empty(self):
        i, j = neighbor_pairs(np.zeros((0, 2)), Arena(10, 10, 1, 1))
        assert len(i) == len(j) == 0


class TestDiffusion:
    def test_mean_square_displacement(self):
        m, s = 200_000, 0.3
        arena = Arena(100, 100, 1, s)
        start = np.full((m, 2), 50.0)
        moved = diffuse(SpatialState(np.arange(m), np.zeros(m), start), arena, RngStream(3))
        d2 = ((moved.pos - start) ** 2).sum(axis=1)
        assert d2.mean() == pytest.approx(s * s / 3, rel=0.02)
        assert d2.max() <= s * s
        angle = np.arctan2(*(moved.pos - start).T[::-1])
        assert abs(np.mean(np.cos(angle))) < 0.01 and abs(np.mean(np.sin(angle))) < 0.01

    def test_zero_step_bound_stands_still(self):
        arena = Arena(10, 10, 1, 0)
        state = SpatialState([0, 1], [0, 1], [[1, 2], [3, 4]])
        assert np.array_equal(diffuse(state, arena, RngStream(0)).pos, state.pos)

    def test_wraps_at_edges(self):
        arena = Arena(10, 10, 1, 0.5)
        state = SpatialState(np.arange(1000), np.zeros(1000), np.full((1000, 2), 0.01))
        pos = diffuse(state, arena, RngStream(4)).pos
        assert np.all((pos >= 0) & (pos < 10))
        assert np.any(pos > 9)


class TestReaction:
    @settings(max_examples=40, deadline=None)
    @given(automata(), st.integers(1, 80), st.integers(0, 2**32 - 1))
    def test_vectorized_matches_per_particle(self, a, m, seed):
        rng = np.random.default_rng(seed)
        arena = Arena(4, 4, 0.6, 0.1)
        pos = rng.random((m, 2)) * arena.size
        states = rng.integers(0, a.n, m)
        i, j = neighbor_pairs(pos, arena)
        us, up, v = rng.random(m), rng.random(len(i)), rng.random(m)
        got = react(a, states, i, j, us, up, v)
        for p in range(m):
            mine = np.flatnonzero(i == p)
            ref = react_particle(a, int(states[p]), states[j[mine]], us[p], up[mine], v[p])
            assert got[p] == ref

    def test_update_is_synchronous(self):
        # a particle reading already-updated neighbors would give a different
        # answer once the visiting order is changed
        rng = np.random.default_rng(2)
        a = random_automaton(rng, 3, sparsity=0.0)
        arena = Arena(3, 3, 0.8, 0.1)
        m = 40
        pos = rng.random((m, 2)) * arena.size
        states = rng.integers(0, 3, m)
        i, j = neighbor_pairs(pos, arena)
        us, up, v = rng.random(m), rng.random(len(i)), rng.random(m)
        once = react(a, states, i, j, us, up, v)
        for visit in (np.arange(m)[::-1], rng.permutation(m)):
            snapshot = states.copy()
            current = states.copy()
            for p in visit:
                mine = np.flatnonzero(i == p)
                current[p] = react_particle(a, int(snapshot[p]), snapshot[j[mine]],
                                            us[p], up[mine], v[p])
            assert np.array_equal(current, once)

    def test_multiset_choice(self, table1):
        # q1 with neighbors q2, q2, q3 under deterministic draws
        outcomes = [table1.sample(0, q, 0.0) for q in (1, 1, 2)]
        for k, v in enumerate((0.1, 0.5, 0.9)):
            got = react_particle(table1, 0, [1, 1, 2], 0.5, [0.0, 0.0, 0.0], v)
            assert got == outcomes[k]

    def test_lonely_particle_uses_solitary_rule(self, table1):
        assert react_particle(table1, 0, [], 0.95, [], 0.3) == 1
        assert react(table1, np.array([0]), np.zeros(0, int), np.zeros(0, int),
                     np.array([0.95]), np.zeros(0), np.array([0.3])).tolist() == [1]


class TestSimulation:
    def test_step_preserves_ids_and_population(self, table1):
        arena = Arena(5, 5, 0.5, 0.2)
        rng = np.random.default_rng(0)
        state = SpatialState(np.arange(100), rng.integers(0, 3, 100), rng.random((100, 2)) * 5)
        nxt = spatial_step(table1, state, arena, RngStream(0))
        assert np.array_equal(nxt.ids, state.ids)
        assert len(nxt.states) == 100

    def test_draw_order(self, table1):
        arena = Arena(5, 5, 0.5, 0.2)
        rng = np.random.default_rng(0)
        state = SpatialState(np.arange(100), rng.integers(0, 3, 100), rng.random((100, 2)) * 5)
        got = spatial_step(table1, state, arena, RngStream(6))
        stream = RngStream(6)
        h = 0.2 * stream.random(100)
        theta = 2 * math.pi * stream.random(100)
        pos = wrap(state.pos + np.column_stack((h * np.cos(theta), h * np.sin(theta))), arena)
        i, j = neighbor_pairs(pos, arena)
        us, up, v = stream.random(100), stream.random(len(i)), stream.random(100)
        assert np.array_equal(got.pos, pos)
        assert np.array_equal(got.states, react(table1, state.states, i, j, us, up, v))

    def test_frames_and_counts(self, table1):
        arena = Arena(5, 5, 0.5, 0.2)
        state = SpatialState(np.arange(30), np.zeros(30), np.full((30, 2), 2.5))
        frames = []
        out = simulate_spatial(table1, state, arena, 7, RngStream(1), frame_every=3,
                               on_frame=lambda t, s: frames.append(t))
        assert out.shape == (8, 3)
        assert out[0].tolist() == [30, 0, 0]
        assert np.all(out.sum(axis=1) == 30)
        assert frames == [0, 3, 6]


class TestDensityBridge:
    def test_single_particle(self):
        assert alpha_from_geometry(0.3, 400, 1) == 0.0

    def test_disc_fills_arena(self):
        r = math.sqrt(400 / math.pi)
        assert alpha_from_geometry(r, math.pi * r * r, 2) == 1.0
        assert alpha_from_geometry(r, math.pi * r * r, 50) == 1.0

    def test_oversized_disc(self):
        with pytest.raises(InvalidGeometry):
            alpha_from_geometry(20, 400, 10)
        with pytest.raises(InvalidGeometry):
            alpha_from_geometry(1, 400, 0)

    def test_matches_high_precision(self):
        for r, area, m in [(0.3, 400, 1100), (0.3, 400, 2), (1e-4, 1, 10**6), (5, 400, 30)]:
            with mpmath.workdps(50):
                exact = 1 - (1 - mpmath.pi * mpmath.mpf(r) ** 2 / area) ** (m - 1)
            assert alpha_from_geometry(r, area, m) == pytest.approx(float(exact), rel=1e-13)
        assert round(alpha_from_geometry(0.3, 400, 1100), 4) == 0.5403

    def test_monotone(self):
        rs = np.linspace(0.01, 5, 40)
        ms = [1, 2, 3, 10, 100, 1000, 10000]
        grid = np.array([[alpha_from_geometry(r, 400, m) for m in ms] for r in rs])
        assert np.all(np.diff(grid, axis=0) >= 0)
        assert np.all(np.diff(grid, axis=1) >= 0)
        assert np.all((grid >= 0) & (grid <= 1))
