import numpy as np
import pytest
from hypothesis import strategies as st

from massaction.automaton import ParticleAutomaton, identity_automaton


def table1_tables():
    """The three-species example, typed in column block by column block."""
    solitary = [[0.9, 0.1, 0.0],
                [0.1, 0.8, 0.1],
                [0.0, 0.0, 1.0]]
    binary = np.zeros((3, 3, 3))
    binary[:, 0, :] = [[1.0, 0.0, 0.0], [0.0, 0.6, 0.4], [0.7, 0.0, 0.3]]
    binary[:, 1, :] = [[0.7, 0.2, 0.1], [0.0, 1.0, 0.0], [0.3, 0.4, 0.3]]
    binary[:, 2, :] = [[0.7, 0.0, 0.3], [0.1, 0.9, 0.0], [0.0, 0.0, 1.0]]
    return ["q1", "q2", "q3"], solitary, binary


@pytest.fixture
def table1():
    return ParticleAutomaton(*table1_tables())


@pytest.fixture
def identity3():
    return identity_automaton(["a", "b", "c"])


def random_automaton(rng, n, sparsity=0.3):
    """Random valid automaton; some entries zeroed to exercise empty intervals."""
    def rows(shape):
        w = rng.random(shape) * (rng.random(shape) > sparsity)
        w[..., 0] += (w.sum(axis=-1) == 0)
        return w / w.sum(axis=-1, keepdims=True)
    names = [f"s{i}" for i in range(n)]
    return ParticleAutomaton(names, rows((n, n)), rows((n, n, n)))


def random_simplex(rng, n):
    return rng.dirichlet(np.ones(n))


@st.composite
def automata(draw, max_species=5):
    n = draw(st.integers(1, max_species))
    seed = draw(st.integers(0, 2**32 - 1))
    return random_automaton(np.random.default_rng(seed), n)
