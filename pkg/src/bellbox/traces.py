"""Machine-readable campaign outputs: aggregate CSV series and JSON trace files.

The CSV contract is the column set `iteration,mean_delta,median_delta,
std_delta,evals`; JSON trace documents echo the campaign configuration
verbatim (canonicalized key order) for provenance.  Both formats round-trip
through the readers in this module.
"""

from __future__ import annotations

import csv
import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

CSV_COLUMNS = ("iteration", "mean_delta", "median_delta", "std_delta", "evals")


@dataclass
class AggregateSeries:
    """Per-iteration statistics of Delta = |S_ref - S_best(i)| across repetitions."""

    iteration: np.ndarray = field(default_factory=lambda: np.empty(0, dtype=int))
    mean_delta: np.ndarray = field(default_factory=lambda: np.empty(0))
    median_delta: np.ndarray = field(default_factory=lambda: np.empty(0))
    std_delta: np.ndarray = field(default_factory=lambda: np.empty(0))
    evals: np.ndarray = field(default_factory=lambda: np.empty(0))

    def __len__(self) -> int:
        return len(self.iteration)

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, AggregateSeries):
            return NotImplemented
        return all(
            np.array_equal(getattr(self, col), getattr(other, col)) for col in CSV_COLUMNS
        )


def emit_csv(series: AggregateSeries, path: str | Path) -> None:
    """Write an aggregate series; the header row is present even when empty."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", newline="") as handle:
        writer = csv.writer(handle)
        writer.writerow(CSV_COLUMNS)
        for i in range(len(series)):
            writer.writerow(
                [
                    int(series.iteration[i]),
                    repr(float(series.mean_delta[i])),
                    repr(float(series.median_delta[i])),
                    repr(float(series.std_delta[i])),
                    repr(float(series.evals[i])),
                ]
            )


def read_csv(path: str | Path) -> AggregateSeries:
    """Parse a series written by emit_csv."""
    with open(path, newline="") as handle:
        reader = csv.reader(handle)
        header = next(reader)
        if tuple(header) != CSV_COLUMNS:
            raise ValueError(f"unexpected CSV header {header!r}")
        rows = [row for row in reader if row]
    return AggregateSeries(
        iteration=np.array([int(r[0]) for r in rows], dtype=int),
        mean_delta=np.array([float(r[1]) for r in rows]),
        median_delta=np.array([float(r[2]) for r in rows]),
        std_delta=np.array([float(r[3]) for r in rows]),
        evals=np.array([float(r[4]) for r in rows]),
    )


def canonical_json(obj) -> str:
    """Canonical serialization used to compare configuration echoes."""
    return json.dumps(obj, sort_keys=True, separators=(",", ":"), allow_nan=False)


def emit_json(document: dict, path: str | Path) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w") as handle:
        json.dump(document, handle, sort_keys=True, indent=1)
        handle.write("\n")


def read_json(path: str | Path) -> dict:
    with open(path) as handle:
        return json.load(handle)
