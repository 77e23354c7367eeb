"""Seeded, worker-count-deterministic Monte Carlo plumbing.

Every stochastic routine takes an explicit integer seed and an optional
worker count.  Work is split into one fixed chunk per worker; each chunk
draws from an independent substream spawned from (seed, worker index).
Results are combined in worker order, so output depends only on
(seed, workers), never on scheduling.
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from typing import Callable, Sequence

import numpy as np


def substreams(seed: int, workers: int) -> list[np.random.Generator]:
    """Independent generators for each worker, derived from the seed."""
    if workers < 1:
        raise ValueError(f"workers must be >= 1, got {workers}")
    children = np.random.SeedSequence(seed).spawn(workers)
    return [np.random.default_rng(c) for c in children]


def chunk_sizes(total: int, workers: int) -> list[int]:
    """Split ``total`` draws into ``workers`` near-equal fixed chunks."""
    base, extra = divmod(total, workers)
    return [base + (1 if w < extra else 0) for w in range(workers)]


def run_chunked(
    total: int,
    seed: int,
    workers: int,
    draw: Callable[[np.random.Generator, int], object],
) -> list[object]:
    """Run ``draw(rng, count)`` once per worker; return results in worker order."""
    rngs = substreams(seed, workers)
    sizes = chunk_sizes(total, workers)
    jobs = [(rng, m) for rng, m in zip(rngs, sizes) if m > 0]
    if workers == 1 or len(jobs) <= 1:
        return [draw(rng, m) for rng, m in jobs]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        futures = [pool.submit(draw, rng, m) for rng, m in jobs]
        return [f.result() for f in futures]


def mean_and_stderr(samples: np.ndarray) -> tuple[complex, float]:
    """Sample mean and its standard error (complex-valued samples allowed)."""
    samples = np.asarray(samples)
    n = samples.shape[0]
    mean = samples.mean(axis=0)
    if n < 2:
        return mean, float("inf")
    var = samples.real.var(axis=0, ddof=1) + samples.imag.var(axis=0, ddof=1)
    return mean, float(np.sqrt(np.max(var) / n))


def stack_results(parts: Sequence[np.ndarray]) -> np.ndarray:
    return np.concatenate([np.asarray(p) for p in parts], axis=0)
