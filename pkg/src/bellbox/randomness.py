"""Device-independent randomness bounds from observed CHSH statistics.

The guessing probability of an adversary compatible with a CHSH value S is
bounded by the closed-form curve 1/2 + 1/2 sqrt(2 - S^2/4) for S in
[2, 2 sqrt(2)]; below the local bound no randomness is certified.  Any other
S -> p_guess map (e.g. an SDP backend) can be plugged into the optimization
entry point.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np

from . import inequalities
from .optimize import RunTrace, SNMConfig, snm_minimize
from .quantum import TSIRELSON


@dataclass(frozen=True)
class GuessingBound:
    """Upper bound on the adversary's guessing probability for one input pair."""

    p_guess: float
    min_entropy_bits: float


def p_guess_from_chsh(s: float) -> GuessingBound:
    """Guessing-probability bound implied by a CHSH value.

    The bound depends on |S| only (flipping outcome labels flips the sign of
    S); values at or below the local bound 2 certify nothing (p_guess = 1) and
    the maximal violation 2 sqrt(2) pins p_guess = 1/2.
    """
    s = abs(float(s))
    if s > TSIRELSON + 1e-9:
        raise ValueError(f"CHSH value {s} exceeds the quantum maximum 2*sqrt(2)")
    s = min(s, TSIRELSON)
    p = min(1.0, 0.5 + 0.5 * math.sqrt(max(0.0, 2.0 - s * s / 4.0)))
    return GuessingBound(p_guess=p, min_entropy_bits=-math.log2(p))


def guessing_cost(s: float) -> float:
    """Optimization surrogate for the guessing probability.

    The physical bound is flat (= 1) on the whole non-violating region, which
    gives a simplex search nothing to compare; this surrogate is the same
    analytic curve without the clamp at 1, strictly decreasing in |S| over
    [0, 2 sqrt(2)], so its minimizer coincides with the bound's.
    """
    s = min(abs(float(s)), TSIRELSON)
    return 0.5 + 0.5 * math.sqrt(max(0.0, 2.0 - s * s / 4.0))


def optimize_randomness(
    evaluate: Callable[[np.ndarray], "object"],
    box,
    cfg: SNMConfig,
    bound_fn: Callable[[float], float] = guessing_cost,
) -> RunTrace:
    """Minimize the guessing probability over the knobs of a CHSH oracle.

    `evaluate` maps knobs to a BehaviorTable; the cost fed to the optimizer is
    bound_fn(chsh_value).  The returned trace's best costs are the surrogate
    values; clamp at 1 (`p_guess_series`) for the physical bound.
    """
    def cost(knobs: np.ndarray) -> float:
        return bound_fn(inequalities.chsh_value(evaluate(knobs).correlators))

    return snm_minimize(cost, box, cfg)


def p_guess_series(trace: RunTrace) -> np.ndarray:
    """Physical guessing-probability bound per iteration from a randomness trace."""
    return np.minimum(trace.best_costs, 1.0)
