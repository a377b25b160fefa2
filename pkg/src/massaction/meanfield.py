"""Deterministic mean-field dynamics of well-stirred particle populations.

Relative concentrations ``x`` (a point on the simplex) evolve in discrete
time as::

    x' = x + (1 - alpha) * delta1(x) + c_bin * alpha * delta2(x)

where ``delta1`` collects the expected change due to solitary transitions
and ``delta2`` the expected change due to pairwise encounters.  ``c_bin``
weights the binary term; ``c_bin = 2`` reproduces the reference
polynomial systems of the three-species example automaton.
"""
from dataclasses import dataclass
from decimal import ROUND_HALF_EVEN, Decimal

import numpy as np
from scipy.optimize import minimize_scalar

from .automaton import ParticleAutomaton
from .errors import DimensionMismatch, NegativeConcentration, NoConvergence

DEFAULT_C_BIN = 2.0
NEGATIVE_CLAMP = 1e-12


def _check(a: ParticleAutomaton, x) -> np.ndarray:
    x = np.asarray(x, dtype=float)
    if x.shape != (a.n,):
        raise DimensionMismatch(
            f"concentration has shape {x.shape}, automaton has {a.n} species")
    return x


def delta1(a: ParticleAutomaton, x) -> np.ndarray:
    """Expected solitary change: inflow into k minus outflow out of k."""
    x = _check(a, x)
    inflow = x @ a.solitary
    outflow = x * a.solitary.sum(axis=1)
    return inflow - outflow


def delta2(a: ParticleAutomaton, x) -> np.ndarray:
    """Expected binary change over all ordered encounter pairs (i, j)."""
    x = _check(a, x)
    inflow = np.einsum("i,j,ijk->k", x, x, a.binary)
    outflow = x * np.einsum("i,kij->k", x, a.binary)
    return inflow - outflow


def step(a: ParticleAutomaton, x, alpha: float, c_bin: float = DEFAULT_C_BIN,
         *, t=None) -> np.ndarray:
    """One mean-field update.

    Components that dip below zero by no more than ``1e-12`` are treated as
    rounding noise and clamped; anything lower raises
    :class:`NegativeConcentration` (``t`` is reported as the step index).
    """
    x = _check(a, x)
    nxt = x + (1.0 - alpha) * delta1(a, x) + c_bin * alpha * delta2(a, x)
    low = np.flatnonzero(nxt < 0.0)
    if low.size:
        worst = low[np.argmin(nxt[low])]
        if nxt[worst] < -NEGATIVE_CLAMP:
            raise NegativeConcentration(int(worst), float(nxt[worst]), t)
        nxt[low] = 0.0
    return nxt


def simulate_mean(a: ParticleAutomaton, x0, alpha: float, T: int,
                  c_bin: float = DEFAULT_C_BIN) -> np.ndarray:
    """Trajectory of ``T`` mean-field steps; row ``t`` is the state after ``t`` steps."""
    if T < 0:
        raise ValueError("horizon must be non-negative")
    x = _check(a, x0).copy()
    out = np.empty((T + 1, a.n))
    out[0] = x
    for t in range(1, T + 1):
        x = step(a, x, alpha, c_bin, t=t)
        out[t] = x
    return out


def fixpoint(a: ParticleAutomaton, x0, alpha: float, tol: float = 1e-9,
             max_iter: int = 100_000, c_bin: float = DEFAULT_C_BIN):
    """Iterate until the update moves no component by ``tol`` or more.

    Returns ``(x, iterations)`` where ``x`` is the first iterate whose step
    residual (infinity norm) is below ``tol``.
    """
    if tol <= 0:
        raise ValueError("tol must be positive")
    x = _check(a, x0).copy()
    residual = np.inf
    for it in range(max_iter + 1):
        nxt = step(a, x, alpha, c_bin, t=it + 1)
        residual = float(np.max(np.abs(nxt - x)))
        if residual < tol:
            return x, it
        x = nxt
    raise NoConvergence(max_iter, residual)


def ssa_matched_parameters(alpha: float):
    """Mean-field ``(alpha, c_bin)`` that matches the well-stirred SSA.

    In the stochastic pairing scheme an initiating particle consumes a
    partner with probability ``alpha``, so on average a fraction
    ``(1 - alpha) / (1 + alpha)`` of the population acts alone and
    ``2 alpha / (1 + alpha)`` takes part in an encounter.  That is the
    mean-field update with density ``2 alpha / (1 + alpha)`` and unit
    binary weight.
    """
    return 2.0 * alpha / (1.0 + alpha), 1.0


def fit_c_bin(a: ParticleAutomaton, x0, alpha: float, checkpoints, target,
              bounds=(0.5, 4.0)):
    """Binary weight that best reproduces ``target`` at ``checkpoints``.

    ``target[i]`` is a concentration vector observed at time
    ``checkpoints[i]``; the fit minimizes the largest absolute deviation.
    Returns ``(c_bin, max_deviation)``.
    """
    checkpoints = np.asarray(checkpoints, dtype=int)
    target = np.asarray(target, dtype=float)
    horizon = int(checkpoints.max())

    def loss(c):
        try:
            traj = simulate_mean(a, x0, alpha, horizon, c)
        except NegativeConcentration:
            return np.inf
        return float(np.max(np.abs(traj[checkpoints] - target)))

    res = minimize_scalar(loss, bounds=bounds, method="bounded",
                          options={"xatol": 1e-5})
    return float(res.x), float(res.fun)


@dataclass(frozen=True, eq=False)
class PolynomialSystem:
    """``x'_k = x_k + sum_i linear[k,i] x_i + sum_{i<=j} bilinear[k,i,j] x_i x_j``."""

    species: tuple
    linear: np.ndarray
    bilinear: np.ndarray

    def evaluate(self, x) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        return x + self.linear @ x + np.einsum("kij,i,j->k", self.bilinear, x, x)

    def terms(self, k: int):
        """Non-carry terms of species ``k`` as ``((i,), coef)`` / ``((i, j), coef)``."""
        n = len(self.species)
        out = [((i,), float(self.linear[k, i])) for i in range(n)]
        out += [((i, j), float(self.bilinear[k, i, j]))
                for i in range(n) for j in range(i, n)]
        return out

    def rounded(self, precision: int = 2):
        """Per species, the terms whose coefficient survives rounding.

        Rounding is half-to-even on the shortest decimal representation of
        each coefficient.
        """
        quantum = Decimal(1).scaleb(-precision)
        out = []
        for k in range(len(self.species)):
            kept = []
            for key, coef in self.terms(k):
                value = Decimal(repr(coef)).quantize(quantum, rounding=ROUND_HALF_EVEN)
                if value != 0:
                    kept.append((key, value))
            out.append(kept)
        return out

    def format(self, precision: int = 2) -> str:
        lines = []
        for k, kept in enumerate(self.rounded(precision)):
            text = f"x'_{k + 1} = x_{k + 1}"
            for key, value in kept:
                if len(key) == 1:
                    mono = f"x_{key[0] + 1}"
                elif key[0] == key[1]:
                    mono = f"x_{key[0] + 1}^2"
                else:
                    mono = f"x_{key[0] + 1} x_{key[1] + 1}"
                sign = "-" if value < 0 else "+"
                text += f" {sign} {abs(value)} {mono}"
            lines.append(text)
        return "\n".join(lines)


def derive_polynomial(a: ParticleAutomaton, alpha: float,
                      c_bin: float = DEFAULT_C_BIN) -> PolynomialSystem:
    n = a.n
    eye = np.eye(n)
    # delta1: x_i S[i,k] - [i == k] x_k sum_j S[k,j]
    lin = a.solitary.T - eye * a.solitary.sum(axis=1)[:, None]
    # delta2: x_i x_j B[i,j,k] - [i == k] x_k x_j sum_l B[k,j,l]
    full = np.transpose(a.binary, (2, 0, 1)).copy()
    full -= eye[:, :, None] * a.binary.sum(axis=2)[:, None, :]
    merged = np.triu(full + np.transpose(full, (0, 2, 1)))
    idx = np.arange(n)
    merged[:, idx, idx] = full[:, idx, idx]
    return PolynomialSystem(
        species=a.species,
        linear=(1.0 - alpha) * lin,
        bilinear=c_bin * alpha * merged,
    )
