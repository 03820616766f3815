"""The simulated experiment as the optimizer sees it: knobs in, statistics out.

Knob vectors pass through a response function (unknown to the optimizer),
become Bloch measurement directions for each setting of each party, and the
resulting correlators are returned either exactly or with simulated Poissonian
counting statistics, optionally with additive Gaussian noise.

Knob layout, pinned by tests:
  * full mode: [theta, phi] per setting, Alice's settings first, then Bob's
    (2 parties x k settings x 2 angles knobs in total),
  * theta-only mode: one theta knob per setting, phi fixed at 0
    (2 x k knobs in total).
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from . import quantum

RESPONSES: dict[str, Callable[[np.ndarray], np.ndarray]] = {
    "identity": lambda a: np.asarray(a, dtype=float),
    "osc": lambda a: 5.0 * np.exp(-np.abs(a)) * np.sin(200.0 * np.asarray(a, dtype=float)),
    "logi": lambda a: np.pi / (np.exp(np.asarray(a, dtype=float)) + 1.0),
    "sinh": lambda a: np.sinh(np.asarray(a, dtype=float)),
}

# knob intervals whose response image covers (essentially) the full direction
# sphere after angle reduction
_RESPONSE_BOXES = {
    "identity": None,  # theta in [0, pi], phi in [0, 2 pi]
    "osc": (-1.0, 1.0),
    "logi": (-6.0, 6.0),
    "sinh": (-2.5, 2.5),
}

NOISE_MODELS = ("exact", "poisson", "poisson_gaussian")


def apply_response(knob: float, response: str) -> float:
    """Map a single knob value through the named response function."""
    return float(RESPONSES[response](np.asarray(knob, dtype=float)))


def default_knob_box(response: str, settings_per_party: int, theta_only: bool = False) -> np.ndarray:
    """Per-coordinate closed intervals of the knob box, shape (dim, 2)."""
    if response not in RESPONSES:
        raise ValueError(f"unknown response function {response!r}")
    k = settings_per_party
    per_party = k if theta_only else 2 * k
    dim = 2 * per_party
    box = np.empty((dim, 2))
    interval = _RESPONSE_BOXES[response]
    if interval is None:
        if theta_only:
            box[:] = (0.0, np.pi)
        else:
            box[0::2] = (0.0, np.pi)       # theta knobs
            box[1::2] = (0.0, 2.0 * np.pi)  # phi knobs
    else:
        box[:] = interval
    return box


@dataclass(frozen=True)
class OracleConfig:
    """Configuration of one simulated experiment.

    noise is one of "exact", "poisson" (events = mean Poisson events per
    measured setting pair) or "poisson_gaussian" (additionally adds N(0, sigma)
    to every emitted correlator).  measure restricts which setting pairs are
    measured: "all" or "chained" (only the 2k pairs a chained inequality reads).
    """

    state: np.ndarray
    settings_per_party: int = 2
    response: str = "identity"
    noise: str = "exact"
    events: float | None = None
    sigma: float = 0.0
    rng_seed: int = 0
    theta_only: bool = False
    measure: str = "all"

    def __post_init__(self) -> None:
        quantum.validate_density_matrix(self.state)
        if self.settings_per_party < 2:
            raise ValueError("need at least two settings per party")
        if self.response not in RESPONSES:
            raise ValueError(f"unknown response function {self.response!r}")
        if self.noise not in NOISE_MODELS:
            raise ValueError(f"unknown noise model {self.noise!r}")
        if self.noise != "exact":
            if self.events is None or self.events < 1:
                raise ValueError("poisson noise needs events >= 1")
        if self.sigma < 0:
            raise ValueError("sigma must be >= 0")
        if self.measure not in ("all", "chained"):
            raise ValueError(f"unknown measure selection {self.measure!r}")

    @property
    def knob_dim(self) -> int:
        per_setting = 1 if self.theta_only else 2
        return 2 * self.settings_per_party * per_setting


@dataclass
class BehaviorTable:
    """Correlators (and optional marginals / raw counts) of one oracle call."""

    correlators: np.ndarray
    marginals_a: np.ndarray | None = None
    marginals_b: np.ndarray | None = None
    counts: np.ndarray | None = None  # (n_pairs, 4) events per measured pair
    pairs: list[tuple[int, int]] | None = None


def measured_pairs(cfg: OracleConfig) -> list[tuple[int, int]]:
    """Setting pairs (x, y) the oracle measures for one evaluation."""
    k = cfg.settings_per_party
    if cfg.measure == "all":
        return [(x, y) for x in range(k) for y in range(k)]
    pairs = []
    for y in range(k):
        pairs.append((y, y))
        pairs.append(((y + 1) % k, y))
    return pairs


def knobs_to_directions(t: np.ndarray, cfg: OracleConfig) -> tuple[np.ndarray, np.ndarray]:
    """Map a knob vector to per-setting Bloch angles (theta, phi) for each party.

    The response function is applied coordinatewise, then theta is reduced
    mod pi and phi mod 2 pi (antipodal directions differ only by an outcome
    relabeling, so the reduction keeps the cost well defined for unbounded
    response images).  Returns two (k, 2) angle arrays.
    """
    t = np.asarray(t, dtype=float)
    if t.shape != (cfg.knob_dim,):
        raise ValueError(f"expected {cfg.knob_dim} knobs, got shape {t.shape}")
    raw = RESPONSES[cfg.response](t)
    k = cfg.settings_per_party
    angles = np.zeros((2 * k, 2))
    if cfg.theta_only:
        angles[:, 0] = np.mod(raw, np.pi)
    else:
        angles[:, 0] = np.mod(raw[0::2], np.pi)
        angles[:, 1] = np.mod(raw[1::2], 2.0 * np.pi)
    return angles[:k], angles[k:]


def _unit_vectors(angles: np.ndarray) -> np.ndarray:
    thetas, phis = angles[:, 0], angles[:, 1]
    sin_t = np.sin(thetas)
    return np.column_stack([sin_t * np.cos(phis), sin_t * np.sin(phis), np.cos(thetas)])


class BlackBoxOracle:
    """One simulated experiment instance.

    Owns its RNG stream; independent instances may run in parallel but a
    single instance must not be called concurrently.  Re-creating an oracle
    from the same config replays the identical output sequence.
    """

    def __init__(self, cfg: OracleConfig):
        self.cfg = cfg
        self._t_matrix = quantum.correlation_matrix(cfg.state)
        self._s_a, self._s_b = quantum.bloch_marginals(cfg.state)
        self._pairs = measured_pairs(cfg)
        self._ix = np.array([p[0] for p in self._pairs])
        self._iy = np.array([p[1] for p in self._pairs])
        self._rng = np.random.default_rng(cfg.rng_seed)

    @property
    def knob_dim(self) -> int:
        return self.cfg.knob_dim

    def default_box(self) -> np.ndarray:
        return default_knob_box(self.cfg.response, self.cfg.settings_per_party, self.cfg.theta_only)

    def _exact_statistics(self, t: np.ndarray) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        angles_a, angles_b = knobs_to_directions(t, self.cfg)
        dirs_a, dirs_b = _unit_vectors(angles_a), _unit_vectors(angles_b)
        e = dirs_a @ self._t_matrix @ dirs_b.T
        return e, dirs_a @ self._s_a, dirs_b @ self._s_b

    def evaluate_exact(self, t: np.ndarray) -> BehaviorTable:
        """Noise-free correlators; deterministic."""
        e, marg_a, marg_b = self._exact_statistics(t)
        k = self.cfg.settings_per_party
        table = np.zeros((k, k))
        table[self._ix, self._iy] = e[self._ix, self._iy]
        return BehaviorTable(table, marg_a, marg_b, pairs=self._pairs)

    def evaluate_noisy(self, t: np.ndarray) -> BehaviorTable:
        """Poissonian counting statistics, optionally with added Gaussian noise.

        For every measured pair the four outcome counts are independent
        Poisson draws with means events * p(a, b); pairs with zero total
        events report E = 0.
        """
        e, marg_a, marg_b = self._exact_statistics(t)
        k = self.cfg.settings_per_party
        ma, mb, exy = marg_a[self._ix], marg_b[self._iy], e[self._ix, self._iy]
        probs = 0.25 * np.column_stack([
            1.0 + ma + mb + exy,
            1.0 + ma - mb - exy,
            1.0 - ma + mb - exy,
            1.0 - ma - mb + exy,
        ])
        counts = self._rng.poisson(self.cfg.events * np.clip(probs, 0.0, None))
        totals = counts.sum(axis=1)
        safe = np.where(totals > 0, totals, 1)
        e_noisy = np.where(
            totals > 0,
            (counts[:, 0] - counts[:, 1] - counts[:, 2] + counts[:, 3]) / safe,
            0.0,
        )
        gaussian = self.cfg.noise == "poisson_gaussian"
        if gaussian:
            e_noisy = e_noisy + self._rng.normal(0.0, self.cfg.sigma, size=e_noisy.shape)
        e_noisy = np.clip(e_noisy, -1.0, 1.0)

        table = np.zeros((k, k))
        table[self._ix, self._iy] = e_noisy
        # per-setting marginals pool the counts of every pair sharing that setting
        num_a = np.zeros(k)
        den_a = np.zeros(k)
        np.add.at(num_a, self._ix, counts[:, 0] + counts[:, 1] - counts[:, 2] - counts[:, 3])
        np.add.at(den_a, self._ix, totals)
        num_b = np.zeros(k)
        den_b = np.zeros(k)
        np.add.at(num_b, self._iy, counts[:, 0] - counts[:, 1] + counts[:, 2] - counts[:, 3])
        np.add.at(den_b, self._iy, totals)
        marg_a_noisy = np.clip(np.where(den_a > 0, num_a / np.where(den_a > 0, den_a, 1), 0.0), -1.0, 1.0)
        marg_b_noisy = np.clip(np.where(den_b > 0, num_b / np.where(den_b > 0, den_b, 1), 0.0), -1.0, 1.0)
        return BehaviorTable(
            table,
            marg_a_noisy,
            marg_b_noisy,
            counts=None if gaussian else counts,
            pairs=self._pairs,
        )

    def evaluate(self, t: np.ndarray) -> BehaviorTable:
        """Dispatch on the configured noise model."""
        if self.cfg.noise == "exact":
            return self.evaluate_exact(t)
        return self.evaluate_noisy(t)
