"""Reproducible Monte Carlo sampling and order-stable parallel evaluation.

Sample ``i`` of a run keyed by ``seed`` always receives the same coordinates:
they come from Philox blocks ``i*B+1 .. i*B+B`` (``B = ceil(dim/4)``), so how
the index range is chunked, or how many threads run the chunks, cannot change
any drawn value.  Results are written back by sample index and every reduction
uses ``math.fsum``.
"""

from __future__ import annotations

import math
import os
from concurrent.futures import ThreadPoolExecutor
from typing import Callable, Optional

import numpy as np

__all__ = [
    "CHUNK",
    "uniform_points",
    "parallel_chunks",
    "default_threads",
    "fsum_mean",
    "mean_stderr",
    "binomial_stderr",
]

CHUNK = 128


def default_threads() -> int:
    """Thread count from ``WML_THREADS`` (default 1)."""
    raw = os.environ.get("WML_THREADS", "")
    try:
        value = int(raw)
    except ValueError:
        return 1
    return max(1, value)


def uniform_points(seed: int, start: int, stop: int, dim: int) -> np.ndarray:
    """Rows ``start..stop-1`` of the uniform sample on ``[0,1)^dim`` keyed by ``seed``."""
    if seed < 0:
        raise ValueError("seed must be non-negative")
    count = stop - start
    if count <= 0 or dim == 0:
        return np.zeros((max(count, 0), dim))
    blocks = -(-dim // 4)
    gen = np.random.Generator(np.random.Philox(key=int(seed), counter=start * blocks))
    return gen.random((count, 4 * blocks))[:, :dim]


def parallel_chunks(
    func: Callable[[int, int], object],
    total: int,
    threads: int = 1,
    chunk: int = CHUNK,
) -> list:
    """``[func(a, b) for each chunk [a, b) of range(total)]`` in chunk order."""
    bounds = [(a, min(a + chunk, total)) for a in range(0, total, chunk)]
    if threads <= 1 or len(bounds) <= 1:
        return [func(a, b) for a, b in bounds]
    with ThreadPoolExecutor(max_workers=threads) as pool:
        futures = [pool.submit(func, a, b) for a, b in bounds]
        return [f.result() for f in futures]


def fsum_mean(values: np.ndarray) -> float:
    values = np.asarray(values, dtype=np.float64)
    return math.fsum(values) / len(values) if len(values) else 0.0


def binomial_stderr(p: float, n: int) -> float:
    return math.sqrt(max(p * (1 - p), 0.0) / n) if n else 0.0


def mean_stderr(values: np.ndarray, mean: Optional[float] = None) -> float:
    """Standard error of the sample mean with the unbiased variance."""
    values = np.asarray(values, dtype=np.float64)
    n = len(values)
    if n < 2:
        return 0.0
    if mean is None:
        mean = fsum_mean(values)
    return math.sqrt(math.fsum((values - mean) ** 2) / (n - 1) / n)
