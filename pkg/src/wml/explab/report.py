"""CSV and JSON writers for experiment output."""

from __future__ import annotations

import csv
import json
from pathlib import Path

import numpy as np

from .moments import SupSamples

__all__ = ["SAMPLE_COLUMNS", "write_samples_csv", "dump_json", "to_jsonable"]

SAMPLE_COLUMNS = ("N", "sample", "x", "sup_lower", "sup_upper", "integrand_lower", "integrand_upper", "exhausted")


def to_jsonable(obj):
    """Plain JSON types: numpy scalars become Python numbers, tuples become lists."""
    if isinstance(obj, dict):
        return {str(k): to_jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [to_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return [to_jsonable(v) for v in obj.tolist()]
    if isinstance(obj, (np.bool_, bool)):
        return bool(obj)
    if isinstance(obj, np.integer):
        return int(obj)
    if isinstance(obj, (np.floating, float)):
        return float(obj)
    if isinstance(obj, complex):
        return [obj.real, obj.imag]
    return obj


def dump_json(obj, path=None) -> str:
    """Stable rendering: sorted keys, two-space indent, trailing newline."""
    text = json.dumps(to_jsonable(obj), sort_keys=True, indent=2, allow_nan=True) + "\n"
    if path is not None:
        Path(path).write_text(text)
    return text


def write_samples_csv(runs, rho, path) -> None:
    """One row per sample; ``x`` holds the base coordinates separated by spaces.

    ``runs`` is a sequence of ``SupSamples``; ``integrand_*`` are the sup
    brackets raised to ``rho``.
    """
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(SAMPLE_COLUMNS)
        for samp in runs:
            assert isinstance(samp, SupSamples)
            for i in range(len(samp)):
                x = " ".join(repr(float(c)) for c in samp.points[i])
                lo, up = float(samp.lower[i]), float(samp.upper[i])
                w.writerow(
                    [samp.N, i, x, repr(lo), repr(up), repr(lo**rho), repr(up**rho), int(samp.exhausted[i])]
                )
