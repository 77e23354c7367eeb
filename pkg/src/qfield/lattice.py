"""Index arithmetic and Fourier analysis on the lattice {0,..,q-1}^d.

Points of the lattice are plain integer vectors (length d, entries in
[0, q)).  A point x is identified with its little-endian rank
``sum_k x[k] * q**k``, so rank 0 is the origin and the first coordinate
is the fastest-varying digit.  Functions on the lattice are stored as
flat complex arrays of length q**d indexed by rank ("lattice arrays").

The discrete Fourier transform used throughout is the unitary one,

    forward:  c[r] = q^(-d/2) * sum_x f[x] * theta^(-x.r)
    inverse:  f[x] = q^(-d/2) * sum_r c[r] * theta^(x.r)

with theta = exp(2*pi*i/q), implemented as d successive length-q
transforms (one per axis).  A naive O(q^{2d}) double-sum path is kept
as a test oracle.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np


class ShapeError(ValueError):
    """Array length does not match q**d."""


class RangeError(ValueError):
    """Index or parameter outside its permitted range."""


def size(q: int, d: int) -> int:
    """Number of lattice points, q**d."""
    if q < 2 or d < 1:
        raise RangeError(f"need q >= 2 and d >= 1, got q={q}, d={d}")
    return q**d


def rank(entries, q: int) -> int:
    """Little-endian rank of a lattice point: sum_k entries[k] * q**k."""
    x = np.asarray(entries, dtype=np.int64)
    if x.ndim != 1 or np.any(x < 0) or np.any(x >= q):
        raise RangeError(f"entries must lie in [0, {q}): got {entries!r}")
    return int(np.dot(x, q ** np.arange(x.size, dtype=np.int64)))


def unrank(i: int, q: int, d: int) -> tuple[int, ...]:
    """Inverse of :func:`rank`.  Raises RangeError for i outside [0, q**d)."""
    n = size(q, d)
    if not 0 <= i < n:
        raise RangeError(f"rank {i} outside [0, {n})")
    out = []
    for _ in range(d):
        i, digit = divmod(i, q)
        out.append(digit)
    return tuple(out)


def all_states(q: int, d: int) -> np.ndarray:
    """(q**d, d) integer array whose row i is unrank(i, q, d)."""
    n = size(q, d)
    i = np.arange(n, dtype=np.int64)[:, None]
    return (i // q ** np.arange(d, dtype=np.int64)[None, :]) % q


@dataclass(frozen=True)
class RootTable:
    """Powers of the primitive q-th root of unity theta = exp(2*pi*i/q)."""

    q: int
    powers: np.ndarray = field(repr=False, default=None)

    def __post_init__(self):
        if self.q < 2:
            raise RangeError(f"need q >= 2, got {self.q}")
        if self.powers is None:
            p = np.exp(2j * np.pi * np.arange(self.q) / self.q)
            object.__setattr__(self, "powers", p)

    def power(self, k: int) -> complex:
        """theta ** k for any integer k (reduced mod q)."""
        return self.powers[k % self.q]


def roots(q: int) -> np.ndarray:
    """theta^j for j = 0..q-1."""
    return RootTable(q).powers


def axis_tensor(vectors: list[np.ndarray]) -> np.ndarray:
    """Little-endian tensor product: out[rank(r)] = prod_k vectors[k][r[k]]."""
    acc = np.ones(1, dtype=complex)
    for v in vectors:
        acc = np.kron(np.asarray(v, dtype=complex), acc)
    return acc


@lru_cache(maxsize=8)
def _axis_matrix(q: int, inverse: bool) -> np.ndarray:
    # read-only and cached: sweeps over many q reuse each matrix ~10x
    j = np.arange(q)
    sign = 1.0 if inverse else -1.0
    m = np.exp(sign * 2j * np.pi * np.outer(j, j) / q) / np.sqrt(q)
    m.flags.writeable = False
    return m


def dft(values, q: int, d: int, *, inverse: bool = False) -> np.ndarray:
    """Unitary DFT over the lattice, factored axis by axis.

    ``values`` may carry leading batch dimensions; the transform acts on
    the last axis, which must have length q**d.  Cost O(d * q^(d+1)) per
    batch element.
    """
    f = np.asarray(values, dtype=complex)
    n = size(q, d)
    if f.shape[-1] != n:
        raise ShapeError(f"last axis has length {f.shape[-1]}, expected {n}")
    batch = f.shape[:-1]
    work = f.reshape(batch + (q,) * d)
    m = _axis_matrix(q, inverse)
    for _ in range(d):
        # transform the last lattice axis, then rotate it to the front
        # of the lattice block so every axis gets one pass
        work = np.moveaxis(work @ m.T, -1, len(batch))
    return work.reshape(batch + (n,))


def dft_naive(values, q: int, d: int, *, inverse: bool = False) -> np.ndarray:
    """Reference double-sum DFT, O(q^{2d}).  Test oracle for :func:`dft`."""
    f = np.asarray(values, dtype=complex)
    n = size(q, d)
    if f.shape[-1] != n:
        raise ShapeError(f"last axis has length {f.shape[-1]}, expected {n}")
    states = all_states(q, d)
    cross = states @ states.T  # x . r as integers
    sign = 1.0 if inverse else -1.0
    w = np.exp(sign * 2j * np.pi * cross / q) / q ** (d / 2.0)
    return f @ w.T


def difference_rank_table(q: int, d: int) -> np.ndarray:
    """(N, N) table with entry [i, j] = rank((x_i - x_j) mod q).

    Backs the circulant expansion kernel[rank(x - y)] -> matrix.  Only
    sensible at desk scale; materialization callers enforce q**d limits.
    """
    digits = all_states(q, d).astype(np.int32)
    n = digits.shape[0]
    table = np.zeros((n, n), dtype=np.int64)
    stride = 1
    for k in range(d):
        col = digits[:, k]
        table += ((col[:, None] - col[None, :]) % q).astype(np.int64) * stride
        stride *= q
    return table


def circulant_from_kernel(kernel: np.ndarray, q: int, d: int) -> np.ndarray:
    """Expand a lattice kernel k(z) into the full matrix M[x, y] = k(x - y)."""
    kernel = np.asarray(kernel)
    if kernel.shape != (size(q, d),):
        raise ShapeError(f"kernel has shape {kernel.shape}, expected ({size(q, d)},)")
    return kernel[difference_rank_table(q, d)]
