"""Reproducible experiment driver: seeded optimizer-vs-oracle campaigns.

A campaign is described by a plain JSON-compatible dict (state, inequality,
oracle, optimizer, repetitions, seed).  Running it executes independently
seeded repetitions, computes the reference value of the target functional for
the campaign's state, and aggregates the per-iteration figure of merit

    Delta(i) = |S_ref - S_best(i)|

across repetitions, where S_best(i) is the exact (noise-free) value of the
functional at the best knobs recorded up to iteration i.  Raw traces keep the
recorded (noisy) costs as well, so either view can be reconstructed.
"""

from __future__ import annotations

import copy
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Callable

import numpy as np

from . import inequalities, quantum, randomness, traces
from .inequalities import CHSH, TLM, Chained, InequalitySpec, Tilted
from .optimize import RunTrace, SNMConfig, grid_search, random_search, snm_minimize
from .oracle import NOISE_MODELS, RESPONSES, BlackBoxOracle, OracleConfig, default_knob_box


class ConfigError(ValueError):
    """Invalid campaign configuration; the message names the offending field path."""


# ---------------------------------------------------------------------------
# configuration validation
# ---------------------------------------------------------------------------

_DEFAULTS = {
    "state": {"kind": "pure", "gamma": math.pi / 4, "phi": 0.0},
    "inequality": {"kind": "chsh"},
    "oracle": {
        "response": "identity",
        "noise": "exact",
        "events": None,
        "sigma": 0.0,
        "theta_only": False,
        "measure": "all",
    },
    "optimizer": {"kind": "snm"},
    "repetitions": 1,
    "seed": 0,
    "knob_box": None,
    "s_ref": None,
}

_SNM_KEYS = {
    "kind", "max_iterations", "delta", "eta", "gamma_exp", "epsilon",
    "ars_max_tries", "max_evaluations",
}


def _require(condition: bool, path: str, message: str) -> None:
    if not condition:
        raise ConfigError(f"{path}: {message}")


def _check_keys(section: dict, allowed: set, path: str) -> None:
    unknown = set(section) - allowed
    _require(not unknown, f"{path}.{sorted(unknown)[0]}" if unknown else path, "unknown field")


def _number(section: dict, key: str, path: str, default=None):
    value = section.get(key, default)
    _require(isinstance(value, (int, float)) and not isinstance(value, bool),
             f"{path}.{key}", f"expected a number, got {value!r}")
    return float(value)


def validate_config(raw: dict) -> dict:
    """Fill defaults and check every field, reporting errors with field paths."""
    _require(isinstance(raw, dict), "config", "must be a JSON object")
    _check_keys(raw, set(_DEFAULTS), "config")
    resolved = copy.deepcopy(_DEFAULTS)
    for key in ("state", "inequality", "oracle", "optimizer"):
        section = raw.get(key, {})
        _require(isinstance(section, dict), key, "must be an object")
        resolved[key].update(section)
    for key in ("repetitions", "seed", "knob_box", "s_ref"):
        if key in raw:
            resolved[key] = raw[key]

    state = resolved["state"]
    _require(state.get("kind") in ("pure", "noisy"), "state.kind", "must be 'pure' or 'noisy'")
    if state["kind"] == "pure":
        _check_keys(state, {"kind", "gamma", "phi"}, "state")
        state.setdefault("gamma", math.pi / 4)
        state.setdefault("phi", 0.0)
        _number(state, "gamma", "state")
        _number(state, "phi", "state")
    else:
        _check_keys(state, {"kind", "p", "lambda", "gamma"}, "state")
        state.setdefault("gamma", math.pi / 4)
        for key in ("p", "lambda"):
            value = _number(state, key, "state")
            _require(0.0 <= value <= 1.0, f"state.{key}", "must be in [0, 1]")

    ineq = resolved["inequality"]
    kind = ineq.get("kind")
    _require(kind in ("chsh", "chained", "tilted", "tlm", "pguess"),
             "inequality.kind", f"unknown inequality {kind!r}")
    if kind == "chained":
        _check_keys(ineq, {"kind", "k"}, "inequality")
        _require(isinstance(ineq.get("k"), int) and ineq["k"] >= 2,
                 "inequality.k", "must be an integer >= 2")
    elif kind == "tilted":
        _check_keys(ineq, {"kind", "alpha", "beta"}, "inequality")
        ineq.setdefault("alpha", 1.0)
        ineq.setdefault("beta", 0.0)
        _require(_number(ineq, "alpha", "inequality") >= 1.0, "inequality.alpha", "must be >= 1")
        _require(_number(ineq, "beta", "inequality") >= 0.0, "inequality.beta", "must be >= 0")
    else:
        _check_keys(ineq, {"kind"}, "inequality")

    oracle_cfg = resolved["oracle"]
    _check_keys(oracle_cfg, {"response", "noise", "events", "sigma", "theta_only", "measure"}, "oracle")
    _require(oracle_cfg["response"] in RESPONSES, "oracle.response",
             f"unknown response {oracle_cfg['response']!r}")
    _require(oracle_cfg["noise"] in NOISE_MODELS, "oracle.noise",
             f"unknown noise model {oracle_cfg['noise']!r}")
    if oracle_cfg["noise"] != "exact":
        _require(oracle_cfg.get("events") is not None, "oracle.events",
                 "required for poisson noise")
        _require(_number(oracle_cfg, "events", "oracle") >= 1.0, "oracle.events", "must be >= 1")
    _require(_number(oracle_cfg, "sigma", "oracle", 0.0) >= 0.0, "oracle.sigma", "must be >= 0")
    _require(oracle_cfg["measure"] in ("all", "chained"), "oracle.measure",
             "must be 'all' or 'chained'")

    opt = resolved["optimizer"]
    okind = opt.get("kind")
    _require(okind in ("snm", "grid", "random"), "optimizer.kind", f"unknown optimizer {okind!r}")
    if okind == "snm":
        _check_keys(opt, _SNM_KEYS, "optimizer")
        opt.setdefault("max_iterations", 500)
        _require(isinstance(opt["max_iterations"], int) and opt["max_iterations"] >= 1,
                 "optimizer.max_iterations", "must be an integer >= 1")
    elif okind == "grid":
        _check_keys(opt, {"kind", "samples_per_dim"}, "optimizer")
        _require(isinstance(opt.get("samples_per_dim"), int) and opt["samples_per_dim"] >= 2,
                 "optimizer.samples_per_dim", "must be an integer >= 2")
    else:
        _check_keys(opt, {"kind", "budget"}, "optimizer")
        _require(isinstance(opt.get("budget"), int) and opt["budget"] >= 0,
                 "optimizer.budget", "must be an integer >= 0")

    _require(isinstance(resolved["repetitions"], int) and resolved["repetitions"] >= 1,
             "repetitions", "must be an integer >= 1")
    _require(isinstance(resolved["seed"], int), "seed", "must be an integer")
    if resolved["knob_box"] is not None:
        box = resolved["knob_box"]
        _require(isinstance(box, list) and all(len(b) == 2 for b in box),
                 "knob_box", "must be a list of [lo, hi] pairs")
    if resolved["s_ref"] is not None:
        _require(isinstance(resolved["s_ref"], (int, float)), "s_ref", "must be a number")
    return resolved


# ---------------------------------------------------------------------------
# campaign assembly
# ---------------------------------------------------------------------------

def _make_state(resolved: dict) -> np.ndarray:
    state = resolved["state"]
    if state["kind"] == "pure":
        return quantum.make_pure_state(state["gamma"], state.get("phi", 0.0))
    return quantum.make_noisy_state(state["p"], state["lambda"], state["gamma"])


def _make_spec(resolved: dict) -> InequalitySpec | None:
    ineq = resolved["inequality"]
    kind = ineq["kind"]
    if kind == "chsh":
        return CHSH()
    if kind == "chained":
        return Chained(ineq["k"])
    if kind == "tilted":
        return Tilted(ineq["alpha"], ineq["beta"])
    if kind == "tlm":
        return TLM()
    return None  # pguess: CHSH table fed into the guessing-probability curve


def _settings_per_party(resolved: dict) -> int:
    spec = _make_spec(resolved)
    return spec.settings if spec is not None else 2


def _knob_box(resolved: dict) -> np.ndarray:
    if resolved["knob_box"] is not None:
        return np.asarray(resolved["knob_box"], dtype=float)
    return default_knob_box(
        resolved["oracle"]["response"],
        _settings_per_party(resolved),
        resolved["oracle"]["theta_only"],
    )


def _table_value_fn(resolved: dict) -> Callable:
    """Functional value of one behavior table (the quantity being maximized)."""
    spec = _make_spec(resolved)
    if spec is None:
        return lambda table: -randomness.guessing_cost(
            inequalities.chsh_value(table.correlators)
        )
    return lambda table: inequalities.evaluate(spec, table)


def _oracle_config(resolved: dict, rho: np.ndarray, seed: int, noise: str | None = None) -> OracleConfig:
    ocfg = resolved["oracle"]
    noise = ocfg["noise"] if noise is None else noise
    return OracleConfig(
        state=rho,
        settings_per_party=_settings_per_party(resolved),
        response=ocfg["response"],
        noise=noise,
        events=ocfg["events"] if noise != "exact" else None,
        sigma=ocfg["sigma"],
        rng_seed=seed,
        theta_only=ocfg["theta_only"],
        measure=ocfg["measure"],
    )


def reference_value(resolved: dict, rho: np.ndarray) -> tuple[float, str]:
    """Reference S_ref of the campaign and the tag recording where it came from."""
    if resolved["s_ref"] is not None:
        return float(resolved["s_ref"]), "supplied"
    kind = resolved["inequality"]["kind"]
    if kind == "chsh":
        return quantum.horodecki_chsh_max(rho), "horodecki"
    if kind == "pguess":
        bound = randomness.p_guess_from_chsh(quantum.horodecki_chsh_max(rho))
        return bound.p_guess, "horodecki"
    spec = _make_spec(resolved)
    return inequalities.quantum_max(spec, rho, seed=resolved["seed"]), "numeric-max"


def series_length(resolved: dict) -> int:
    opt = resolved["optimizer"]
    if opt["kind"] == "snm":
        return opt["max_iterations"]
    if opt["kind"] == "grid":
        dim = _knob_box(resolved).shape[0]
        return opt["samples_per_dim"] ** dim
    return opt["budget"]


def optimizer_budget(resolved: dict) -> int | None:
    """Total oracle evaluations the configured optimizer is allowed."""
    opt = resolved["optimizer"]
    if opt["kind"] == "snm":
        return opt.get("max_evaluations")
    return series_length(resolved)


def _run_single(resolved: dict, rho: np.ndarray, box: np.ndarray,
                oracle_seed: int, optimizer_seed: int) -> RunTrace:
    oracle = BlackBoxOracle(_oracle_config(resolved, rho, oracle_seed))
    value_of = _table_value_fn(resolved)
    cost = lambda t: -value_of(oracle.evaluate(t))
    opt = resolved["optimizer"]
    if opt["kind"] == "snm":
        cfg = SNMConfig(
            max_iterations=opt["max_iterations"],
            delta=opt.get("delta", 1.0),
            eta=opt.get("eta", 0.5),
            gamma_exp=opt.get("gamma_exp", 2.0),
            epsilon=opt.get("epsilon", 0.10),
            ars_max_tries=opt.get("ars_max_tries", 10),
            max_evaluations=opt.get("max_evaluations"),
            rng_seed=optimizer_seed,
        )
        return snm_minimize(cost, box, cfg)
    if opt["kind"] == "grid":
        return grid_search(cost, box, opt["samples_per_dim"],
                           np.random.default_rng(optimizer_seed))
    return random_search(cost, box, opt["budget"], np.random.default_rng(optimizer_seed))


# ---------------------------------------------------------------------------
# results
# ---------------------------------------------------------------------------

@dataclass
class CampaignResult:
    config: dict            # as given (echoed verbatim into outputs)
    resolved: dict
    s_ref: float
    s_ref_source: str
    traces: list
    values: np.ndarray      # (reps, series_length) exact value of best knobs
    deltas: np.ndarray      # |s_ref - values|
    evals: np.ndarray       # (reps, series_length) cumulative oracle calls
    aggregate: traces.AggregateSeries

    @property
    def repetitions(self) -> int:
        return len(self.traces)

    @property
    def final_deltas(self) -> np.ndarray:
        return self.deltas[:, -1] if self.deltas.size else np.empty(0)

    @property
    def final_values(self) -> np.ndarray:
        return self.values[:, -1] if self.values.size else np.empty(0)


def _exact_values_for_trace(trace: RunTrace, value_exact: Callable[[np.ndarray], float]) -> np.ndarray:
    """Exact functional value of the best knobs at each trace record.

    Consecutive records usually repeat the same knobs; only changes are
    re-evaluated.
    """
    values = np.empty(len(trace))
    previous = None
    previous_value = math.nan
    for i, knobs in enumerate(trace.best_knobs):
        if previous is None or not np.array_equal(knobs, previous):
            previous_value = value_exact(knobs)
            previous = knobs
        values[i] = previous_value
    return values


def _align(trace: RunTrace, per_record: np.ndarray, length: int) -> tuple[np.ndarray, np.ndarray]:
    """Resample per-record values onto the iteration grid 1..length (step-hold)."""
    targets = np.arange(1, length + 1)
    idx = np.searchsorted(trace.iterations, targets, side="right") - 1
    idx = np.clip(idx, 0, len(trace) - 1)
    return per_record[idx], trace.evaluations[idx].astype(float)


def run_campaign(config: dict, quiet: bool = True) -> CampaignResult:
    """Execute every repetition of a campaign and aggregate the Delta series."""
    resolved = validate_config(config)
    rho = _make_state(resolved)
    box = _knob_box(resolved)
    s_ref, s_ref_source = reference_value(resolved, rho)
    length = series_length(resolved)
    value_of = _table_value_fn(resolved)
    exact_oracle = BlackBoxOracle(_oracle_config(resolved, rho, seed=0, noise="exact"))
    value_exact = lambda knobs: value_of(exact_oracle.evaluate_exact(knobs))

    reps = resolved["repetitions"]
    seq = np.random.SeedSequence(resolved["seed"])
    rep_seeds = [
        tuple(int(s) for s in child.generate_state(2, dtype=np.uint64))
        for child in seq.spawn(reps)
    ]

    run_traces = []
    values = np.full((reps, length), math.nan)
    evals = np.full((reps, length), math.nan)
    for rep, (oracle_seed, optimizer_seed) in enumerate(rep_seeds):
        trace = _run_single(resolved, rho, box, oracle_seed, optimizer_seed)
        run_traces.append(trace)
        if length and len(trace):
            per_record = _exact_values_for_trace(trace, value_exact)
            values[rep], evals[rep] = _align(trace, per_record, length)
        if not quiet:
            final = values[rep, -1] if length and len(trace) else math.nan
            print(f"  rep {rep + 1}/{reps}: best exact value {final:.6f}")

    deltas = np.abs(s_ref - values)
    aggregate = traces.AggregateSeries(
        iteration=np.arange(1, length + 1),
        mean_delta=deltas.mean(axis=0) if reps else np.empty(0),
        median_delta=np.median(deltas, axis=0) if reps else np.empty(0),
        std_delta=deltas.std(axis=0) if reps else np.empty(0),
        evals=evals.mean(axis=0) if reps else np.empty(0),
    )
    if length == 0:
        aggregate = traces.AggregateSeries()
    return CampaignResult(
        config=copy.deepcopy(config),
        resolved=resolved,
        s_ref=s_ref,
        s_ref_source=s_ref_source,
        traces=run_traces,
        values=values,
        deltas=deltas,
        evals=evals,
        aggregate=aggregate,
    )


def evals_to_tolerance(result: CampaignResult, tolerance: float) -> np.ndarray:
    """Per repetition, the evaluation count at which Delta first drops to tolerance.

    Returns nan for repetitions that never reach it.
    """
    out = np.full(result.repetitions, math.nan)
    for rep in range(result.repetitions):
        hits = np.nonzero(result.deltas[rep] <= tolerance)[0]
        if hits.size:
            out[rep] = result.evals[rep, hits[0]]
    return out


def campaign_document(result: CampaignResult) -> dict:
    """JSON document for one campaign: config echo, reference, raw traces."""
    return {
        "schema": "bellbox.campaign.v1",
        "config": result.config,
        "config_resolved": result.resolved,
        "s_ref": result.s_ref,
        "s_ref_source": result.s_ref_source,
        "series_length": series_length(result.resolved),
        "traces": [trace.to_dict() for trace in result.traces],
    }


def write_campaign_outputs(result: CampaignResult, out_dir: str | Path,
                           plot: bool = True) -> dict[str, Path]:
    """Write aggregate.csv and campaign.json (and a convergence figure) to out_dir."""
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    paths = {
        "csv": out_dir / "aggregate.csv",
        "json": out_dir / "campaign.json",
    }
    traces.emit_csv(result.aggregate, paths["csv"])
    traces.emit_json(campaign_document(result), paths["json"])
    if plot and len(result.aggregate):
        from . import plots

        paths["figure"] = out_dir / "convergence.png"
        plots.plot_convergence(result.aggregate, paths["figure"],
                               title=_campaign_title(result))
    return paths


def _campaign_title(result: CampaignResult) -> str:
    ineq = result.resolved["inequality"]
    noise = result.resolved["oracle"]["noise"]
    return f"{ineq['kind']} / {noise} / {result.repetitions} reps (ref {result.s_ref:.4f})"


# ---------------------------------------------------------------------------
# optimizer comparison
# ---------------------------------------------------------------------------

def _shared_oracle_key(resolved: dict) -> str:
    shared = {k: resolved[k] for k in ("state", "inequality", "oracle", "knob_box")}
    return traces.canonical_json(shared)


def _delta_at_evals(result: CampaignResult, grid: np.ndarray) -> np.ndarray:
    """Mean Delta across repetitions at each evaluation count in grid (step-hold)."""
    curves = np.empty((result.repetitions, len(grid)))
    for rep in range(result.repetitions):
        evals, deltas = result.evals[rep], result.deltas[rep]
        idx = np.clip(np.searchsorted(evals, grid, side="right") - 1, 0, len(evals) - 1)
        curves[rep] = deltas[idx]
    return curves.mean(axis=0)


def compare_optimizers(results: list[CampaignResult]) -> dict:
    """Rank optimizers sharing one oracle at one evaluation budget.

    Ranking is by median final Delta (ascending); exact ties share a rank and
    are reported explicitly.
    """
    if not results:
        raise ValueError("nothing to compare")
    keys = {_shared_oracle_key(r.resolved) for r in results}
    if len(keys) != 1:
        raise ValueError("campaigns must share the same state, inequality and oracle")
    budgets = [optimizer_budget(r.resolved) for r in results]
    if any(b is None for b in budgets) or len(set(budgets)) != 1:
        raise ValueError(f"mismatched evaluation budgets {budgets}")
    budget = budgets[0]

    labels = []
    for result in results:
        base = result.resolved["optimizer"]["kind"]
        label = base
        suffix = 2
        while label in labels:
            label = f"{base}#{suffix}"
            suffix += 1
        labels.append(label)

    medians = [float(np.median(r.final_deltas)) for r in results]
    order = np.argsort(medians, kind="stable")
    ranking = []
    for rank_pos, idx in enumerate(order):
        tie_with = [labels[j] for j in order if j != idx and medians[j] == medians[idx]]
        ranking.append({
            "optimizer": labels[idx],
            "median_final_delta": medians[idx],
            "mean_final_delta": float(np.mean(results[idx].final_deltas)),
            "final_deltas": results[idx].final_deltas.tolist(),
            "rank": rank_pos + 1,
            "tie": bool(tie_with),
            "tie_with": tie_with,
        })

    grid = np.unique(np.linspace(1, budget, min(budget, 512)).astype(int))
    curves = {
        labels[i]: {
            "evals": grid.tolist(),
            "mean_delta": _delta_at_evals(results[i], grid).tolist(),
        }
        for i in range(len(results))
    }
    return {"budget": budget, "ranking": ranking, "curves": curves}


def write_comparison_outputs(comparison: dict, out_dir: str | Path, plot: bool = True) -> dict[str, Path]:
    import csv as _csv

    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    paths = {"json": out_dir / "comparison.json", "curves": out_dir / "curves.csv"}
    traces.emit_json(comparison, paths["json"])
    with open(paths["curves"], "w", newline="") as handle:
        writer = _csv.writer(handle)
        writer.writerow(["optimizer", "evals", "mean_delta"])
        for label, curve in comparison["curves"].items():
            for e, d in zip(curve["evals"], curve["mean_delta"]):
                writer.writerow([label, e, repr(float(d))])
    if plot:
        from . import plots

        paths["figure"] = out_dir / "comparison.png"
        plots.plot_comparison(comparison["curves"], paths["figure"])
    return paths


# ---------------------------------------------------------------------------
# parameter sweeps
# ---------------------------------------------------------------------------

def _set_path(config: dict, dotted: str, value) -> None:
    parts = dotted.split(".")
    node = config
    for part in parts[:-1]:
        node = node.setdefault(part, {})
    node[parts[-1]] = value


def run_sweep(base_config: dict, path: str, values: list, quiet: bool = True) -> list[CampaignResult]:
    """Run one campaign per value of the swept parameter (dotted config path)."""
    results = []
    for i, value in enumerate(values):
        config = copy.deepcopy(base_config)
        _set_path(config, path, value)
        if not quiet:
            print(f"sweep {path} = {value}")
        results.append(run_campaign(config, quiet=quiet))
    return results


def write_sweep_outputs(results: list[CampaignResult], path: str, values: list,
                        out_dir: str | Path, plot: bool = True) -> dict[str, Path]:
    import csv as _csv

    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    paths = {"csv": out_dir / "sweep.csv"}
    with open(paths["csv"], "w", newline="") as handle:
        writer = _csv.writer(handle)
        writer.writerow(["value", "s_ref", "final_mean_delta", "final_median_delta", "final_std_delta"])
        for value, result in zip(values, results):
            finals = result.final_deltas
            writer.writerow([
                value,
                repr(result.s_ref),
                repr(float(np.mean(finals))),
                repr(float(np.median(finals))),
                repr(float(np.std(finals))),
            ])
    for value, result in zip(values, results):
        sub = out_dir / f"{path.replace('.', '_')}_{value}"
        write_campaign_outputs(result, sub, plot=plot)
    if plot:
        from . import plots

        paths["figure"] = out_dir / "sweep.png"
        plots.plot_sweep(
            [float(v) for v in values],
            [float(np.mean(r.final_deltas)) for r in results],
            path,
            paths["figure"],
        )
    return paths
