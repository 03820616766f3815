"""Black-box maximization of Bell inequality violations at desk scale.

A simulated two-qubit photonic experiment is exposed only as a knob-in /
statistics-out oracle, and a stochastic Nelder-Mead optimizer drives the
knobs toward the optimal violation without any model of the state or the
measurements.
"""

from .inequalities import (
    CHSH,
    TLM,
    Chained,
    Tilted,
    chained_value,
    chsh_value,
    classical_bound,
    quantum_max,
    tilted_value,
    tlm_value,
)
from .optimize import (
    RunTrace,
    Simplex,
    SNMConfig,
    grid_search,
    latin_hypercube_init,
    random_search,
    snm_minimize,
)
from .oracle import BehaviorTable, BlackBoxOracle, OracleConfig, default_knob_box
from .quantum import (
    TSIRELSON,
    correlator,
    horodecki_chsh_max,
    joint_probability,
    make_noisy_state,
    make_pure_state,
    projector_pm,
)
from .randomness import GuessingBound, optimize_randomness, p_guess_from_chsh
from .campaign import (
    CampaignResult,
    ConfigError,
    compare_optimizers,
    run_campaign,
    run_sweep,
)

__version__ = "0.1.0"

__all__ = [
    "CHSH",
    "TLM",
    "Chained",
    "Tilted",
    "chained_value",
    "chsh_value",
    "classical_bound",
    "quantum_max",
    "tilted_value",
    "tlm_value",
    "RunTrace",
    "Simplex",
    "SNMConfig",
    "grid_search",
    "latin_hypercube_init",
    "random_search",
    "snm_minimize",
    "BehaviorTable",
    "BlackBoxOracle",
    "OracleConfig",
    "default_knob_box",
    "TSIRELSON",
    "correlator",
    "horodecki_chsh_max",
    "joint_probability",
    "make_noisy_state",
    "make_pure_state",
    "projector_pm",
    "GuessingBound",
    "optimize_randomness",
    "p_guess_from_chsh",
    "CampaignResult",
    "ConfigError",
    "compare_optimizers",
    "run_campaign",
    "run_sweep",
]
