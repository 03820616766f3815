"""Derivative-free minimizers driving an opaque cost oracle.

The main routine is a stochastic Nelder-Mead direct search: Latin Hypercube
initialization, reflect / expand / contract moves on a simplex of dim + 1
points, and an adaptive random search fallback around the incumbent when a
contraction is rejected.  Grid and uniform random search baselines share the
same trace format.

This module knows nothing about what the cost function measures; it only ever
calls `oracle(knobs) -> cost` and keeps every candidate inside the knob box.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

CostFn = Callable[[np.ndarray], float]


@dataclass
class SNMConfig:
    """Control parameters of the stochastic Nelder-Mead search.

    delta / eta / gamma_exp are the reflection, contraction and expansion
    coefficients; epsilon is the adaptive-random-search neighborhood as a
    fraction of each coordinate's box width.  max_evaluations optionally caps
    the total number of oracle calls (for budget-matched comparisons).
    """

    max_iterations: int = 500
    delta: float = 1.0
    eta: float = 0.5
    gamma_exp: float = 2.0
    epsilon: float = 0.10
    ars_max_tries: int = 10
    rng_seed: int = 0
    max_evaluations: int | None = None

    def __post_init__(self) -> None:
        if self.delta <= 0:
            raise ValueError("delta must be > 0")
        if not 0.0 <= self.eta <= 1.0:
            raise ValueError("eta must be in [0, 1]")
        if self.gamma_exp <= 1.0:
            raise ValueError("gamma_exp must be > 1")
        if self.epsilon <= 0:
            raise ValueError("epsilon must be > 0")
        if self.ars_max_tries < 1:
            raise ValueError("ars_max_tries must be >= 1")


@dataclass
class Simplex:
    """Multiset of (knobs, cost) pairs evolved by the search."""

    points: list[np.ndarray]
    costs: list[float]
    capacity: int

    def __len__(self) -> int:
        return len(self.points)

    def append(self, point: np.ndarray, cost: float) -> None:
        self.points.append(point)
        self.costs.append(cost)

    def trim_worst(self) -> None:
        """Drop the highest-cost member while the simplex is over capacity."""
        while len(self.points) > self.capacity:
            i = int(np.argsort(np.asarray(self.costs), kind="stable")[-1])
            del self.points[i]
            del self.costs[i]


@dataclass
class RunTrace:
    """Per-iteration record of one optimization run.

    best_cost follows the best cost recorded among simplex members (or among
    all sampled points, for the baselines); it is non-increasing.
    """

    iterations: np.ndarray = field(default_factory=lambda: np.empty(0, dtype=int))
    best_costs: np.ndarray = field(default_factory=lambda: np.empty(0))
    evaluations: np.ndarray = field(default_factory=lambda: np.empty(0, dtype=int))
    best_knobs: np.ndarray = field(default_factory=lambda: np.empty((0, 0)))

    def __len__(self) -> int:
        return len(self.iterations)

    @property
    def best_cost(self) -> float:
        return float(self.best_costs[-1]) if len(self) else math.nan

    @property
    def final_knobs(self) -> np.ndarray:
        return self.best_knobs[-1] if len(self) else np.empty(0)

    @property
    def total_evaluations(self) -> int:
        return int(self.evaluations[-1]) if len(self) else 0

    def to_dict(self) -> dict:
        return {
            "iterations": self.iterations.tolist(),
            "best_costs": self.best_costs.tolist(),
            "evaluations": self.evaluations.tolist(),
            "best_knobs": self.best_knobs.tolist(),
            "summary": {
                "best_cost": None if math.isnan(self.best_cost) else self.best_cost,
                "best_knobs": self.final_knobs.tolist(),
                "total_evaluations": self.total_evaluations,
            },
        }

    @classmethod
    def from_dict(cls, doc: dict) -> "RunTrace":
        return cls(
            iterations=np.asarray(doc["iterations"], dtype=int),
            best_costs=np.asarray(doc["best_costs"], dtype=float),
            evaluations=np.asarray(doc["evaluations"], dtype=int),
            best_knobs=np.asarray(doc["best_knobs"], dtype=float),
        )


class _TraceBuilder:
    def __init__(self) -> None:
        self._iters: list[int] = []
        self._costs: list[float] = []
        self._evals: list[int] = []
        self._knobs: list[np.ndarray] = []

    def record(self, iteration: int, cost: float, evals: int, knobs: np.ndarray) -> None:
        self._iters.append(iteration)
        self._costs.append(cost)
        self._evals.append(evals)
        self._knobs.append(np.array(knobs, dtype=float))

    def build(self, dim: int) -> RunTrace:
        knobs = np.stack(self._knobs) if self._knobs else np.empty((0, dim))
        return RunTrace(
            iterations=np.asarray(self._iters, dtype=int),
            best_costs=np.asarray(self._costs, dtype=float),
            evaluations=np.asarray(self._evals, dtype=int),
            best_knobs=knobs,
        )


def _as_box(box) -> np.ndarray:
    box = np.asarray(box, dtype=float)
    if box.ndim != 2 or box.shape[1] != 2:
        raise ValueError(f"box must have shape (dim, 2), got {box.shape}")
    if np.any(box[:, 1] <= box[:, 0]):
        raise ValueError("degenerate box: every interval needs positive width")
    return box


def latin_hypercube_init(dim: int, n_points: int, box, rng: np.random.Generator) -> np.ndarray:
    """Latin Hypercube sample: one point per stratum in every coordinate.

    Each coordinate's interval is split into n_points equal strata; every
    stratum receives exactly one sample and the assignment of strata to points
    is an independent random permutation per coordinate.
    """
    if n_points < dim + 1:
        raise ValueError(f"need at least dim + 1 = {dim + 1} points, got {n_points}")
    box = _as_box(box)
    if box.shape[0] != dim:
        raise ValueError(f"box has {box.shape[0]} coordinates, expected {dim}")
    lo, width = box[:, 0], box[:, 1] - box[:, 0]
    samples = np.empty((n_points, dim))
    for j in range(dim):
        strata = (rng.permutation(n_points) + rng.uniform(size=n_points)) / n_points
        samples[:, j] = lo[j] + strata * width[j]
    return samples


class _BudgetExhausted(Exception):
    pass


class _CountingOracle:
    def __init__(self, fn: CostFn, max_evaluations: int | None):
        self.fn = fn
        self.max_evaluations = max_evaluations
        self.count = 0

    def __call__(self, point: np.ndarray) -> float:
        if self.max_evaluations is not None and self.count >= self.max_evaluations:
            raise _BudgetExhausted
        self.count += 1
        return float(self.fn(point))


def ars_step(
    simplex: Simplex,
    box,
    epsilon: float,
    tries: int,
    rng: np.random.Generator,
    oracle: CostFn,
) -> tuple[np.ndarray, float, bool, int]:
    """Adaptive random search around the incumbent after a rejected contraction.

    Samples up to `tries` points uniformly in the epsilon-neighborhood of the
    best point (clipped to the box).  The first sample beating the worst cost
    replaces the worst member; if none does, the best sample replaces it
    anyway so the simplex always changes.  Size is conserved.

    Returns (point, cost, accepted, evaluations_used).
    """
    box = _as_box(box)
    order = np.argsort(np.asarray(simplex.costs), kind="stable")
    i_min, i_max = int(order[0]), int(order[-1])
    width = box[:, 1] - box[:, 0]
    lo = np.maximum(box[:, 0], simplex.points[i_min] - epsilon * width)
    hi = np.minimum(box[:, 1], simplex.points[i_min] + epsilon * width)
    worst = simplex.costs[i_max]
    best_point, best_cost = None, math.inf
    used = 0
    accepted = False
    for _ in range(tries):
        candidate = rng.uniform(lo, hi)
        cost = float(oracle(candidate))
        used += 1
        if cost < worst:
            best_point, best_cost, accepted = candidate, cost, True
            break
        if cost < best_cost:
            best_point, best_cost = candidate, cost
    simplex.points[i_max] = best_point
    simplex.costs[i_max] = best_cost
    return best_point, best_cost, accepted, used


def snm_minimize(
    oracle: CostFn,
    box,
    cfg: SNMConfig,
    callback: Callable[[int, Simplex], None] | None = None,
) -> RunTrace:
    """Stochastic Nelder-Mead minimization of a (possibly noisy) cost.

    Every candidate is clipped to the box coordinatewise.  A point's cost is
    the value observed when it entered the simplex; no re-averaging is done
    under noise, and the trace reports the running best recorded cost.
    """
    box = _as_box(box)
    dim = box.shape[0]
    capacity = dim + 1
    rng = np.random.default_rng(cfg.rng_seed)
    counted = _CountingOracle(oracle, cfg.max_evaluations)
    clip = lambda p: np.clip(p, box[:, 0], box[:, 1])

    trace = _TraceBuilder()
    try:
        points = latin_hypercube_init(dim, capacity, box, rng)
        simplex = Simplex([], [], capacity)
        for p in points:
            simplex.append(p, counted(p))
    except _BudgetExhausted:
        return trace.build(dim)

    i_best = int(np.argmin(simplex.costs))
    best_cost = simplex.costs[i_best]
    best_knobs = simplex.points[i_best].copy()

    def note_new_member(point: np.ndarray, cost: float) -> None:
        nonlocal best_cost, best_knobs
        if cost < best_cost:
            best_cost = cost
            best_knobs = point.copy()

    trace.record(0, best_cost, counted.count, best_knobs)
    for iteration in range(1, cfg.max_iterations + 1):
        try:
            order = np.argsort(np.asarray(simplex.costs), kind="stable")
            i_min, i_2nd, i_max = int(order[0]), int(order[-2]), int(order[-1])
            c_min, c_2nd, c_max = (simplex.costs[i] for i in (i_min, i_2nd, i_max))

            others = [p for i, p in enumerate(simplex.points) if i != i_max]
            bar = np.mean(others, axis=0)
            ref = clip((1.0 + cfg.delta) * bar - cfg.delta * simplex.points[i_max])
            c_ref = counted(ref)

            if c_min <= c_ref < c_2nd:
                simplex.append(ref, c_ref)
                note_new_member(ref, c_ref)
            elif c_ref < c_min:
                exp = clip(cfg.gamma_exp * ref + (1.0 - cfg.gamma_exp) * bar)
                c_exp = counted(exp)
                if c_exp < c_ref:
                    simplex.append(exp, c_exp)
                    note_new_member(exp, c_exp)
                else:
                    simplex.append(ref, c_ref)
                    note_new_member(ref, c_ref)
            else:
                if c_ref < c_max:  # external contraction
                    cont = clip(cfg.eta * ref + (1.0 - cfg.eta) * bar)
                    threshold = c_ref
                else:  # internal contraction
                    cont = clip(cfg.eta * simplex.points[i_max] + (1.0 - cfg.eta) * bar)
                    threshold = c_max
                c_cont = counted(cont)
                if c_cont <= threshold:
                    simplex.append(cont, c_cont)
                    note_new_member(cont, c_cont)
                else:
                    point, cost, _, _ = ars_step(
                        simplex, box, cfg.epsilon, cfg.ars_max_tries, rng, counted
                    )
                    note_new_member(point, cost)
            simplex.trim_worst()
        except _BudgetExhausted:
            break
        trace.record(iteration, best_cost, counted.count, best_knobs)
        if callback is not None:
            callback(iteration, simplex)
    return trace.build(dim)


def grid_search(
    oracle: CostFn,
    box,
    samples_per_dim: int,
    rng: np.random.Generator | int = 0,
    *,
    budget_limit: int = 2_000_000,
) -> RunTrace:
    """Exhaustive search on an equally spaced grid with a random cell offset.

    Evaluates samples_per_dim ** dim points; the grid origin is uniformly
    offset within one cell so repeated runs probe different alignments.
    """
    if samples_per_dim < 2:
        raise ValueError("need at least 2 samples per dimension")
    box = _as_box(box)
    dim = box.shape[0]
    n_points = samples_per_dim**dim
    if n_points > budget_limit:
        raise ValueError(f"grid of {n_points} points exceeds the budget limit {budget_limit}")
    rng = np.random.default_rng(rng)
    cell = (box[:, 1] - box[:, 0]) / samples_per_dim
    offset = rng.uniform(0.0, cell)

    trace = _TraceBuilder()
    best_cost, best_knobs = math.inf, None
    evals = 0
    for index in np.ndindex(*(samples_per_dim,) * dim):
        point = box[:, 0] + offset + np.asarray(index) * cell
        cost = float(oracle(point))
        evals += 1
        if cost < best_cost:
            best_cost, best_knobs = cost, point
        trace.record(evals, best_cost, evals, best_knobs)
    return trace.build(dim)


def random_search(
    oracle: CostFn,
    box,
    budget: int,
    rng: np.random.Generator | int = 0,
) -> RunTrace:
    """Independent uniform sampling of the box; the simplest baseline."""
    if budget < 0:
        raise ValueError("budget must be >= 0")
    box = _as_box(box)
    rng = np.random.default_rng(rng)
    trace = _TraceBuilder()
    best_cost, best_knobs = math.inf, None
    for i in range(1, budget + 1):
        point = rng.uniform(box[:, 0], box[:, 1])
        cost = float(oracle(point))
        if cost < best_cost:
            best_cost, best_knobs = cost, point
        trace.record(i, best_cost, i, best_knobs)
    return trace.build(box.shape[0])
