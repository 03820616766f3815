"""Command-line driver for optimization campaigns.

Subcommands:
  run      execute one campaign config and write aggregate CSV + trace JSON
  compare  run several optimizers against a shared oracle at one budget
  sweep    run a campaign per value of one swept config parameter
  show     pretty-print a previously written campaign JSON

Exit codes: 0 success, 1 configuration error, 2 runtime failure.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

import numpy as np

from . import campaign as _campaign
from . import traces as _traces
from .campaign import ConfigError


def _load_config(path: str) -> dict:
    try:
        with open(path) as handle:
            return json.load(handle)
    except FileNotFoundError as exc:
        raise ConfigError(f"config file not found: {path}") from exc
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config is not valid JSON: {exc}") from exc


def _apply_overrides(config: dict, args: argparse.Namespace) -> dict:
    if getattr(args, "seed", None) is not None:
        config["seed"] = args.seed
    if getattr(args, "reps", None) is not None:
        config["repetitions"] = args.reps
    return config


def _cmd_run(args: argparse.Namespace) -> int:
    config = _apply_overrides(_load_config(args.config), args)
    result = _campaign.run_campaign(config, quiet=args.quiet)
    out = Path(args.out or "campaign_out")
    paths = _campaign.write_campaign_outputs(result, out, plot=not args.no_plot)
    if not args.quiet:
        finals = result.final_deltas
        print(f"s_ref = {result.s_ref:.6f} ({result.s_ref_source})")
        if finals.size:
            print(f"final delta: mean {np.mean(finals):.3e}, median {np.median(finals):.3e}")
        for name, path in paths.items():
            print(f"wrote {name}: {path}")
    return 0


def _cmd_compare(args: argparse.Namespace) -> int:
    config = _apply_overrides(_load_config(args.config), args)
    if not isinstance(config.get("optimizers"), list) or not config["optimizers"]:
        raise ConfigError("optimizers: compare needs a non-empty list of optimizer configs")
    base = {k: v for k, v in config.items() if k not in ("optimizers", "budget")}
    budget = config.get("budget")
    results = []
    for optimizer in config["optimizers"]:
        entry = dict(base)
        entry["optimizer"] = dict(optimizer)
        if entry["optimizer"].get("kind") == "snm" and budget is not None:
            entry["optimizer"].setdefault("max_evaluations", budget)
            entry["optimizer"].setdefault("max_iterations", int(budget))
        results.append(_campaign.run_campaign(entry, quiet=args.quiet))
    comparison = _campaign.compare_optimizers(results)
    out = Path(args.out or "comparison_out")
    paths = _campaign.write_comparison_outputs(comparison, out, plot=not args.no_plot)
    if not args.quiet:
        print(f"shared budget: {comparison['budget']} evaluations")
        for entry in comparison["ranking"]:
            tie = f" (tie with {', '.join(entry['tie_with'])})" if entry["tie"] else ""
            print(f"  #{entry['rank']} {entry['optimizer']}: "
                  f"median final delta {entry['median_final_delta']:.3e}{tie}")
        for name, path in paths.items():
            print(f"wrote {name}: {path}")
    return 0


def _cmd_sweep(args: argparse.Namespace) -> int:
    config = _apply_overrides(_load_config(args.config), args)
    sweep = config.pop("sweep", None)
    if not isinstance(sweep, dict) or "path" not in sweep or "values" not in sweep:
        raise ConfigError("sweep: needs an object with 'path' and 'values'")
    values = sweep["values"]
    if not isinstance(values, list) or not values:
        raise ConfigError("sweep.values: must be a non-empty list")
    results = _campaign.run_sweep(config, sweep["path"], values, quiet=args.quiet)
    out = Path(args.out or "sweep_out")
    paths = _campaign.write_sweep_outputs(results, sweep["path"], values, out,
                                          plot=not args.no_plot)
    if not args.quiet:
        for value, result in zip(values, results):
            print(f"  {sweep['path']} = {value}: s_ref {result.s_ref:.4f}, "
                  f"final mean delta {np.mean(result.final_deltas):.3e}")
        for name, path in paths.items():
            print(f"wrote {name}: {path}")
    return 0


def _cmd_show(args: argparse.Namespace) -> int:
    doc = _traces.read_json(args.trace)
    config = doc.get("config_resolved", doc.get("config", {}))
    print(f"schema        : {doc.get('schema', '?')}")
    print(f"inequality    : {config.get('inequality')}")
    print(f"state         : {config.get('state')}")
    print(f"oracle        : {config.get('oracle')}")
    print(f"optimizer     : {config.get('optimizer')}")
    print(f"repetitions   : {config.get('repetitions')}")
    print(f"seed          : {config.get('seed')}")
    print(f"s_ref         : {doc.get('s_ref')} ({doc.get('s_ref_source')})")
    trace_docs = doc.get("traces", [])
    print(f"traces        : {len(trace_docs)}")
    for i, trace in enumerate(trace_docs[: args.limit]):
        summary = trace.get("summary", {})
        print(f"  rep {i}: best recorded cost {summary.get('best_cost')}, "
              f"evaluations {summary.get('total_evaluations')}")
    if len(trace_docs) > args.limit:
        print(f"  ... {len(trace_docs) - args.limit} more")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="bellbox",
        description="Black-box Bell-violation optimization campaigns",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p: argparse.ArgumentParser) -> None:
        p.add_argument("--config", required=True, help="campaign config (JSON)")
        p.add_argument("--seed", type=int, default=None, help="override master seed")
        p.add_argument("--out", default=None, help="output directory")
        p.add_argument("--reps", type=int, default=None, help="override repetitions")
        p.add_argument("--quiet", action="store_true", help="suppress progress output")
        p.add_argument("--no-plot", action="store_true", help="skip figure rendering")

    common(sub.add_parser("run", help="run one campaign"))
    common(sub.add_parser("compare", help="compare optimizers at a shared budget"))
    common(sub.add_parser("sweep", help="sweep one config parameter"))

    show = sub.add_parser("show", help="pretty-print a campaign JSON")
    show.add_argument("trace", help="path to campaign.json")
    show.add_argument("--limit", type=int, default=5, help="traces to list")
    return parser


_COMMANDS = {"run": _cmd_run, "compare": _cmd_compare, "sweep": _cmd_sweep, "show": _cmd_show}


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return _COMMANDS[args.command](args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 1
    except Exception as exc:  # noqa: BLE001 - CLI boundary
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
