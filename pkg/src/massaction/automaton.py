"""Particle automata: finite-state particles with stochastic transitions.

A particle in state ``q`` either acts alone, drawing its next state from
the *solitary* row ``delta(q, ⊥, .)``, or meets a particle in state
``q'`` and draws from the *binary* row ``delta(q, q', .)``.

Tables are stored as numpy arrays::

    solitary[i, k]   = delta(q_i, ⊥,   q_k)
    binary[i, j, k]  = delta(q_i, q_j, q_k)

Input symbols are passed around as species indices, with ``None``
standing for the non-encounter symbol ⊥.
"""
import math
import re
from collections.abc import Mapping
from typing import NamedTuple, Optional, Sequence

import numpy as np

from .errors import (DimensionMismatch, DuplicateSpecies, EmptySpecies,
                     NegativeEntry, NonStochasticJoint, NonStochasticRow,
                     ParseError, UnknownSpecies)

ROW_TOLERANCE = 1e-9
# rows this close to one are left untouched (a few ulps of 1.0)
EXACT_SLACK = 4 * 2.0**-52

#: the non-encounter input symbol
SOLITARY = None


def _normalize_row(row, label):
    if not np.all(np.isfinite(row)):
        raise NonStochasticRow(label, float("nan"))
    for value in row:
        if value < 0.0:
            raise NegativeEntry(label, float(value))
    total = math.fsum(row)
    if abs(total - 1.0) > ROW_TOLERANCE:
        raise NonStochasticRow(label, total)
    if abs(total - 1.0) <= EXACT_SLACK:
        return row
    row = row / total
    # division alone can leave the exact sum an ulp away from 1; fold the
    # residue into the largest entry so that renormalizing is idempotent
    big = int(np.argmax(row))
    rest = math.fsum(np.delete(row, big))
    row[big] = 1.0 - rest
    return row


class ParticleAutomaton:
    """Immutable particle automaton over ``n`` named species.

    Construction validates every row (non-negative, sums to one within
    ``1e-9``) and renormalizes rows that are off by rounding only.
    """

    def __init__(self, species: Sequence[str], solitary, binary):
        species = tuple(species)
        if not species:
            raise EmptySpecies("an automaton needs at least one species")
        seen = set()
        for name in species:
            if not isinstance(name, str) or not name.strip():
                raise EmptySpecies(f"empty species name in {species!r}")
            if name in seen:
                raise DuplicateSpecies(name)
            seen.add(name)
        n = len(species)

        solitary = np.array(solitary, dtype=float)
        binary = np.array(binary, dtype=float)
        if solitary.shape != (n, n):
            raise DimensionMismatch(
                f"solitary table has shape {solitary.shape}, expected {(n, n)}")
        if binary.shape != (n, n, n):
            raise DimensionMismatch(
                f"binary table has shape {binary.shape}, expected {(n, n, n)}")
        for i in range(n):
            solitary[i] = _normalize_row(solitary[i], f"{species[i]}/⊥")
            for j in range(n):
                binary[i, j] = _normalize_row(
                    binary[i, j], f"{species[i]}/{species[j]}")

        solitary.setflags(write=False)
        binary.setflags(write=False)
        self.species = species
        self.solitary = solitary
        self.binary = binary

        # rows indexed [q, input, :] with input == n meaning ⊥
        rows = np.concatenate([binary, solitary[:, None, :]], axis=1)
        cum = np.cumsum(rows, axis=2)
        nonzero = rows > 0.0
        last = n - 1 - np.argmax(nonzero[:, :, ::-1], axis=2)
        cum.setflags(write=False)
        last.setflags(write=False)
        self._cum = cum
        self._last = last

    @property
    def n(self) -> int:
        return len(self.species)

    def index(self, name: str) -> int:
        try:
            return self.species.index(name)
        except ValueError:
            raise UnknownSpecies(name) from None

    def row(self, q: int, inp: Optional[int] = SOLITARY) -> np.ndarray:
        if inp is None:
            return self.solitary[q]
        return self.binary[q, inp]

    def sample(self, q, inp, u):
        """Vectorized :func:`sample_transition`.

        ``q`` and ``inp`` are integer arrays, with ``inp == n`` encoding ⊥.
        """
        q = np.asarray(q, dtype=np.intp)
        inp = np.asarray(inp, dtype=np.intp)
        u = np.asarray(u, dtype=float)
        cum = self._cum[q, inp]
        k = np.sum(cum[..., :-1] <= u[..., None], axis=-1)
        return np.minimum(k, self._last[q, inp])

    def __eq__(self, other):
        if not isinstance(other, ParticleAutomaton):
            return NotImplemented
        return (self.species == other.species
                and np.array_equal(self.solitary, other.solitary)
                and np.array_equal(self.binary, other.binary))

    def __hash__(self):
        return hash((self.species, self.solitary.tobytes(),
                     self.binary.tobytes()))

    def __repr__(self):
        return f"ParticleAutomaton(species={list(self.species)!r})"


def validate(species, solitary, binary) -> ParticleAutomaton:
    return ParticleAutomaton(species, solitary, binary)


def identity_automaton(species) -> ParticleAutomaton:
    n = len(species)
    eye = np.eye(n)
    return ParticleAutomaton(species, eye, np.broadcast_to(eye[:, None, :], (n, n, n)))


def sample_transition(a: ParticleAutomaton, q: int, inp: Optional[int],
                      u: float) -> int:
    """Draw the successor of state ``q`` under input ``inp`` (None for ⊥).

    ``u`` is a uniform variate in [0, 1).  The row's cumulative sums cut
    [0, 1) into half-open intervals, one per successor; rounding slack at
    the top end goes to the last successor with non-zero probability.
    """
    row = a.row(q, inp)
    acc = 0.0
    last = max(k for k in range(len(row)) if row[k] > 0.0)
    for k in range(last):
        acc += row[k]
        if u < acc:
            return k
    return last


class CausalCheck(NamedTuple):
    ok: bool
    diagnostic: str


def check_causal_product(joint, tol: float = ROW_TOLERANCE) -> CausalCheck:
    """Test whether a joint encounter rule factors into independent parts.

    ``joint`` is either a 2-D table ``p[a_outcome, b_outcome]`` or a
    mapping ``{(a_outcome, b_outcome): p}`` as in ``A+B -> A_i+B_i (p_i)``.
    The rule is causal when each participant's outcome is independent of
    the other's, i.e. the table is the outer product of its marginals.
    """
    if isinstance(joint, Mapping):
        a_labels, b_labels = [], []
        for a_out, b_out in joint:
            if a_out not in a_labels:
                a_labels.append(a_out)
            if b_out not in b_labels:
                b_labels.append(b_out)
        table = np.zeros((len(a_labels), len(b_labels)))
        for (a_out, b_out), p in joint.items():
            table[a_labels.index(a_out), b_labels.index(b_out)] += p
    else:
        table = np.array(joint, dtype=float)
        if table.ndim != 2:
            raise ValueError("joint table must be two-dimensional")
        a_labels = list(range(table.shape[0]))
        b_labels = list(range(table.shape[1]))

    if np.any(table < 0.0):
        raise NonStochasticJoint(float(table.sum()))
    total = math.fsum(table.ravel())
    if abs(total - 1.0) > tol:
        raise NonStochasticJoint(total)

    pa = table.sum(axis=1)
    pb = table.sum(axis=0)
    residual = np.abs(table - np.outer(pa, pb))
    worst = np.unravel_index(np.argmax(residual), residual.shape)
    if residual[worst] <= tol:
        return CausalCheck(True, "joint table factors into independent outcomes")
    a_out, b_out = a_labels[worst[0]], b_labels[worst[1]]
    return CausalCheck(
        False,
        f"outcome pair ({a_out}, {b_out}) has probability {table[worst]:.6g} "
        f"but the marginals give {pa[worst[0]] * pb[worst[1]]:.6g}")


# -- text format ---------------------------------------------------------

_NAME = re.compile(r"^[^\s#:]+$")


def _fmt(value: float) -> str:
    return repr(float(value))


def serialize_automaton(a: ParticleAutomaton) -> str:
    lines = ["species: " + " ".join(a.species), "solitary:"]
    for row in a.solitary:
        lines.append("  " + " ".join(_fmt(v) for v in row))
    for j, name in enumerate(a.species):
        lines.append(f"binary {name}:")
        for i in range(a.n):
            lines.append("  " + " ".join(_fmt(v) for v in a.binary[i, j]))
    return "\n".join(lines) + "\n"


def parse_automaton(text: str) -> ParticleAutomaton:
    species = None
    solitary = []
    binary = {}
    block = None  # list currently receiving rows
    block_name = None

    def close_block(lineno):
        if block is not None and len(block) != len(species):
            raise ParseError(
                f"dimension mismatch: block {block_name!r} has {len(block)} "
                f"rows, expected {len(species)}", lineno)

    lineno = 0
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if line.startswith("species:"):
            if species is not None:
                raise ParseError("duplicate species line", lineno)
            species = line[len("species:"):].split()
            if not species:
                raise ParseError("species line lists no names", lineno)
            for name in species:
                if not _NAME.match(name):
                    raise ParseError(f"bad species name {name!r}", lineno)
            continue
        if species is None:
            raise ParseError("expected 'species:' line first", lineno)
        if line == "solitary:":
            close_block(lineno)
            if solitary:
                raise ParseError("duplicate solitary block", lineno)
            block, block_name = solitary, "solitary"
            continue
        header = re.fullmatch(r"binary\s+(\S+)\s*:", line)
        if header:
            close_block(lineno)
            name = header.group(1)
            if name not in species:
                raise ParseError(f"binary block for unknown species {name!r}", lineno)
            if name in binary:
                raise ParseError(f"duplicate binary block {name!r}", lineno)
            block = binary[name] = []
            block_name = f"binary {name}"
            continue
        if block is None:
            raise ParseError(f"unexpected line {line!r}", lineno)
        try:
            values = [float(tok) for tok in line.split()]
        except ValueError:
            raise ParseError(f"non-numeric entry in {line!r}", lineno) from None
        if len(values) != len(species):
            raise ParseError(
                f"dimension mismatch: row has {len(values)} entries, "
                f"expected {len(species)}", lineno)
        if len(block) == len(species):
            raise ParseError(
                f"dimension mismatch: block {block_name!r} has more than "
                f"{len(species)} rows", lineno)
        block.append(values)

    if species is None:
        raise ParseError("empty automaton file", lineno or None)
    close_block(lineno)
    if not solitary:
        raise ParseError("missing solitary block", lineno)
    missing = [name for name in species if name not in binary]
    if missing:
        raise ParseError(f"missing binary block(s) for {', '.join(missing)}", lineno)

    n = len(species)
    table = np.empty((n, n, n))
    for j, name in enumerate(species):
        table[:, j, :] = binary[name]
    return ParticleAutomaton(species, solitary, table)
