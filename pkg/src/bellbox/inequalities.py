"""Bell and quantum-boundary functionals on correlator tables.

Every functional consumes a k x k table E with E[x][y] the expectation value
of the product of Alice's setting-x and Bob's setting-y outcomes.  Setting
indices are 0-based throughout.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import optimize as _sciopt

from . import quantum


@dataclass(frozen=True)
class CHSH:
    """Two-setting correlator inequality, classical bound 2, quantum max 2*sqrt(2)."""

    settings = 2


@dataclass(frozen=True)
class Chained:
    """k-setting chained inequality (half-normalized form), classical bound k-1."""

    k: int

    def __post_init__(self) -> None:
        if self.k < 2:
            raise ValueError(f"chained inequality needs k >= 2, got {self.k}")

    @property
    def settings(self) -> int:
        return self.k


@dataclass(frozen=True)
class Tilted:
    """CHSH with a marginal term beta <A_0>, classical bound 2*alpha + beta."""

    alpha: float = 1.0
    beta: float = 0.0
    settings = 2

    def __post_init__(self) -> None:
        if self.alpha < 1.0:
            raise ValueError(f"tilted inequality needs alpha >= 1, got {self.alpha}")
        if self.beta < 0.0:
            raise ValueError(f"tilted inequality needs beta >= 0, got {self.beta}")


@dataclass(frozen=True)
class TLM:
    """Arcsine boundary of the quantum set in the two-setting scenario, bound pi."""

    settings = 2


InequalitySpec = CHSH | Chained | Tilted | TLM


def _check_table(e: np.ndarray, k: int) -> np.ndarray:
    e = np.asarray(e, dtype=float)
    if e.shape != (k, k):
        raise ValueError(f"expected a {k}x{k} correlator table, got shape {e.shape}")
    return e


def chsh_value(e: np.ndarray) -> float:
    """S = E00 + E01 + E10 - E11."""
    e = _check_table(e, 2)
    return float(e[0, 0] + e[0, 1] + e[1, 0] - e[1, 1])


def chained_value(e: np.ndarray, k: int) -> float:
    """Sum over i of |(E[i-1][i-1] + E[i][i-1]) / 2| with the wrap A^k = -A^0.

    Only the 2k correlators on the (y, y) and (y+1, y) diagonals are read;
    other table entries are ignored.
    """
    e = _check_table(e, k)
    total = 0.0
    for i in range(1, k + 1):
        y = i - 1
        if i < k:
            term = e[i - 1, y] + e[i, y]
        else:
            term = e[k - 1, y] - e[0, y]
        total += abs(0.5 * term)
    return float(total)


def tilted_value(e: np.ndarray, marginal_a0: float, alpha: float, beta: float) -> float:
    """beta <A0> + alpha E00 + alpha E01 + E10 - E11."""
    Tilted(alpha, beta)  # parameter range check
    e = _check_table(e, 2)
    return float(beta * marginal_a0 + alpha * (e[0, 0] + e[0, 1]) + e[1, 0] - e[1, 1])


def tlm_value(e: np.ndarray) -> float:
    """-asin(E00) + asin(E01) + asin(E10) + asin(E11).

    Inputs are clamped to [-1, 1]; the minus sign sits on E00 so the singlet's
    optimal correlators score +pi.
    """
    e = np.clip(_check_table(e, 2), -1.0, 1.0)
    return float(-math.asin(e[0, 0]) + math.asin(e[0, 1]) + math.asin(e[1, 0]) + math.asin(e[1, 1]))


def evaluate(spec: InequalitySpec, table) -> float:
    """Evaluate a functional on a BehaviorTable-like object (correlators + marginals)."""
    if isinstance(spec, CHSH):
        return chsh_value(table.correlators)
    if isinstance(spec, Chained):
        return chained_value(table.correlators, spec.k)
    if isinstance(spec, Tilted):
        if table.marginals_a is None:
            raise ValueError("tilted inequality needs Alice marginals in the table")
        return tilted_value(table.correlators, float(table.marginals_a[0]), spec.alpha, spec.beta)
    if isinstance(spec, TLM):
        return tlm_value(table.correlators)
    raise TypeError(f"unknown inequality spec {spec!r}")


def classical_bound(spec: InequalitySpec) -> float:
    """Local-realistic bound L of the inequality."""
    if isinstance(spec, CHSH):
        return 2.0
    if isinstance(spec, Chained):
        return float(spec.k - 1)
    if isinstance(spec, Tilted):
        return 2.0 * spec.alpha + spec.beta
    if isinstance(spec, TLM):
        raise ValueError("TLM is a quantum inequality: it has no classical bound distinct from pi")
    raise TypeError(f"unknown inequality spec {spec!r}")


def quantum_max(spec: InequalitySpec, rho: np.ndarray | None = None, *,
                restarts: int = 24, seed: int = 0) -> float:
    """Maximal quantum value of the functional.

    Without a state this is the known scenario-wide maximum.  With a state it
    is the best value achievable by projective measurements on rho: CHSH uses
    the closed-form criterion, the others run a numerical maximization over
    measurement angles (multi-restart local refinement on exact correlators).
    """
    if rho is None:
        if isinstance(spec, CHSH):
            return quantum.TSIRELSON
        if isinstance(spec, Chained):
            return spec.k * math.cos(math.pi / (2 * spec.k))
        if isinstance(spec, Tilted):
            return 2.0 * math.sqrt((1.0 + spec.alpha**2) * (1.0 + spec.beta**2 / 4.0))
        if isinstance(spec, TLM):
            return math.pi
        raise TypeError(f"unknown inequality spec {spec!r}")
    if isinstance(spec, CHSH):
        return quantum.horodecki_chsh_max(rho)
    return _numeric_state_max(spec, rho, restarts=restarts, seed=seed)


def _directions_from_angles(angles: np.ndarray, k: int) -> tuple[np.ndarray, np.ndarray]:
    """Split a flat (theta, phi) angle vector into per-party direction matrices."""
    half = angles[: 2 * k], angles[2 * k :]
    out = []
    for block in half:
        thetas, phis = block[0::2], block[1::2]
        sin_t = np.sin(thetas)
        out.append(np.column_stack([sin_t * np.cos(phis), sin_t * np.sin(phis), np.cos(thetas)]))
    return out[0], out[1]


def _numeric_state_max(spec: InequalitySpec, rho: np.ndarray, *, restarts: int, seed: int) -> float:
    k = spec.settings
    t_matrix = quantum.correlation_matrix(rho)
    s_a, _ = quantum.bloch_marginals(rho)
    rng = np.random.default_rng(seed)

    def value(angles: np.ndarray) -> float:
        dirs_a, dirs_b = _directions_from_angles(angles, k)
        e = dirs_a @ t_matrix @ dirs_b.T
        if isinstance(spec, Chained):
            return chained_value(e, k)
        if isinstance(spec, Tilted):
            return tilted_value(e, float(dirs_a[0] @ s_a), spec.alpha, spec.beta)
        if isinstance(spec, TLM):
            return tlm_value(e)
        return chsh_value(e)

    starts = [rng.uniform(0.0, 2.0 * math.pi, size=4 * k) for _ in range(restarts)]
    # planar starts (phi = 0) cover the optimum of every state with a diagonal
    # correlation tensor; fan angles evenly with a random offset for chained
    for _ in range(restarts):
        angles = np.zeros(4 * k)
        angles[0::2] = rng.uniform(0.0, math.pi, size=2 * k)
        starts.append(angles)
    if isinstance(spec, Chained) and k > 2:
        for _ in range(restarts):
            offset_a, offset_b = rng.uniform(0.0, math.pi, size=2)
            angles = np.zeros(4 * k)
            angles[0 : 2 * k : 2] = offset_a + np.arange(k) * math.pi / k
            angles[2 * k :: 2] = offset_b + (np.arange(k) + 0.5) * math.pi / k
            starts.append(angles)

    best = -math.inf
    for x0 in starts:
        res = _sciopt.minimize(
            lambda x: -value(x), x0, method="Nelder-Mead",
            options={"maxiter": 8000, "xatol": 1e-10, "fatol": 1e-12},
        )
        best = max(best, -float(res.fun))
    return best
