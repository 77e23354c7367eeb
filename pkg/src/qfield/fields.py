"""Gaussian fields whose covariance is the normalized Green kernel.

Synthesis from real i.i.d. standard normal drivers gr:

    g[x] = q^(-d/2) sum_r sqrt(lambda[r]) theta^(x.r) gr[r],

so E[g_x conj(g_y)] = (1-alpha) G(x, y; alpha).  Real eigenvalues
(reversibility) are required; the inverse map recovers the driver by one
forward transform.  Count-indexed fields use the Krawtchouk synthesis
with weights sqrt(h_l lambda_l), ranked-class sums expose the spin-glass
grouping, and truncated torus fields mirror the torus Green expansion.

Drivers are real, not circular: only the conjugate pairing
E[g conj(g)] is contractual; E[g g] equals the transform of lambda at
x + y and is checked, not promised.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from . import _mc
from .green import WrappedLaw, frequency_box, green_eigenvalues
from .lattice import RangeError, all_states, dft, size
from .walks import Spectrum


class ReversibilityError(ValueError):
    """Field construction requires real walk eigenvalues."""


def synthesis_weights(spec: Spectrum, alpha: float) -> np.ndarray:
    """sqrt(lambda[r]); demands a real spectrum."""
    if not spec.is_real:
        raise ReversibilityError(
            "field synthesis requires real eigenvalues (symmetric jumps)")
    lam = green_eigenvalues(spec.rho.real, alpha)
    return np.sqrt(lam)


@dataclass
class FieldSample:
    """Field values with the drivers that synthesized them."""

    values: np.ndarray   # (n_samples, q^d) complex
    driver: np.ndarray   # (n_samples, q^d) real
    alpha: float
    spectrum: Spectrum = field(repr=False)


def sample_field(spec: Spectrum, alpha: float, seed: int,
                 n_samples: int = 1, workers: int = 1) -> FieldSample:
    """Draw fields; deterministic given (seed, workers)."""
    weights = synthesis_weights(spec, alpha)
    n = size(spec.q, spec.d)

    def draw(rng, m):
        return rng.standard_normal((m, n))

    driver = _mc.stack_results(_mc.run_chunked(n_samples, seed, workers, draw))
    values = dft(driver * weights[None, :], spec.q, spec.d, inverse=True)
    return FieldSample(values, driver, alpha, spec)


def invert_field(values: np.ndarray, spec: Spectrum, alpha: float) -> np.ndarray:
    """Recover drivers: gr = forward(values) / sqrt(lambda)."""
    weights = synthesis_weights(spec, alpha)
    coeffs = dft(values, spec.q, spec.d) / weights
    return coeffs.real


def dual_field(driver: np.ndarray, q: int, d: int) -> np.ndarray:
    """Unweighted companion field g*[y] = sum_r theta^(y.r) gr[r]."""
    n = size(q, d)
    return dft(driver, q, d, inverse=True) * math.sqrt(n)


def dual_field_from_values(values: np.ndarray, spec: Spectrum,
                           alpha: float) -> np.ndarray:
    """g* reached through the field values instead of the driver.

    Substitutes the inversion display into the synthesis: recover each
    driver coordinate by a forward transform, then resum without the
    lambda weights.  Must agree with :func:`dual_field`.
    """
    n = size(spec.q, spec.d)
    weights = synthesis_weights(spec, alpha)
    coeffs = dft(values, spec.q, spec.d) / weights  # = driver
    return dft(coeffs, spec.q, spec.d, inverse=True) * math.sqrt(n)


@dataclass
class CountFieldSample:
    """Type-count-indexed field with per-degree drivers."""

    values: np.ndarray       # (n_samples, n_counts) complex
    driver: np.ndarray       # (n_samples, n_degrees) real
    counts: list[tuple[int, ...]]
    degrees: list[tuple[int, ...]]
    alpha: float


def sample_count_field(kappas, q: int, d: int, alpha: float, seed: int,
                       n_samples: int = 1) -> CountFieldSample:
    """Count field g[m] = q^(-d/2) sum_l sqrt(h_l lambda_l) Q_l(m) gl.

    Covariance is the grouped Green display; the l = 0 term contributes
    the constant q^(-d/2) g_{l0}.  Requires real grouped eigenvalues.
    """
    from .krawtchouk import table

    tab = table(q, d)
    get = kappas.__getitem__ if isinstance(kappas, dict) else kappas
    kap = np.array([complex(get(l)) for l in tab.degrees])
    if np.max(np.abs(kap.imag)) > 1e-10:
        raise ReversibilityError("count field requires real grouped eigenvalues")
    lam = green_eigenvalues(kap.real, alpha)
    weights = np.sqrt(lam / tab.h_inv)
    rng = np.random.default_rng(seed)
    driver = rng.standard_normal((n_samples, len(tab.degrees)))
    values = (driver * weights[None, :]) @ tab.values / q ** (d / 2.0)
    return CountFieldSample(values, driver, tab.counts, tab.degrees, alpha)


def count_field_weight(kappa_l: complex, alpha: float, h_l: float) -> float:
    """Synthesis weight sqrt(h_l lambda_l) for one degree."""
    lam = green_eigenvalues(np.array([kappa_l]), alpha)[0]
    return float(np.sqrt(h_l * lam.real))


def ranked_classes(q: int, d: int) -> dict[tuple[int, ...], np.ndarray]:
    """Ranks of r grouped by sorted(r) descending (spin-glass classes)."""
    states = all_states(q, d)
    classes: dict[tuple[int, ...], list[int]] = {}
    for i, r in enumerate(states):
        key = tuple(sorted(r.tolist(), reverse=True))
        classes.setdefault(key, []).append(i)
    return {k: np.array(v) for k, v in classes.items()}


def ranked_class_sum(driver: np.ndarray, x, ranked: tuple[int, ...],
                     q: int, d: int) -> complex:
    """sum_{r in [ranked]} theta^(r.x) gr[r] for one ranked class.

    For q = 2 and |ranked| = j ones this is the degree-j spin-glass term
    sum_{i1<..<ij} (-1)^(x[i1]+..+x[ij]) g_{i1..ij} after relabeling.
    """
    classes = ranked_classes(q, d)
    key = tuple(sorted((int(v) for v in ranked), reverse=True))
    if key not in classes:
        raise RangeError(f"no ranked class {ranked!r} at q={q}, d={d}")
    idx = classes[key]
    states = all_states(q, d)[idx]
    x = np.asarray(x, dtype=np.int64)
    phases = np.exp(2j * np.pi * (states @ x) / q)
    return complex(phases @ np.asarray(driver)[idx])


def binary_krawtchouk(k: int, w: int, d: int) -> int:
    """sum_j (-1)^j C(w, j) C(d-w, k-j): class sums at Hamming distance w."""
    return sum((-1) ** j * math.comb(w, j) * math.comb(d - w, k - j)
               for j in range(max(0, k - (d - w)), min(w, k) + 1))


@dataclass
class TorusFieldSample:
    values: np.ndarray       # (n_samples, n_grid) complex
    driver: np.ndarray       # (n_samples, n_freqs) real
    grid: np.ndarray         # (n_grid, d)
    freqs: np.ndarray        # (n_freqs, d)
    alpha: float


def sample_torus_field(law: WrappedLaw, alpha: float, radius: int, seed: int,
                       grid: np.ndarray, n_samples: int = 1,
                       mode: str = "Z") -> TorusFieldSample:
    """Truncated torus field g[b] = sum_|r|<=R sqrt(lambda_r) e^(2 pi i b.r) gr.

    Real (symmetric) eigenvalues enforced; the empirical covariance on
    the grid targets the same-box truncated Green sum.
    """
    freqs = frequency_box(law.d, radius, mode)
    rho = law.rho(freqs)
    if np.max(np.abs(rho.imag)) > 1e-10:
        raise ReversibilityError("torus field requires a symmetric wrapped law")
    lam = green_eigenvalues(rho.real, alpha)
    weights = np.sqrt(lam)
    grid = np.atleast_2d(np.asarray(grid, dtype=float))
    rng = np.random.default_rng(seed)
    driver = rng.standard_normal((n_samples, len(freqs)))
    basis = np.exp(2j * np.pi * grid @ freqs.T)  # (n_grid, n_freqs)
    values = (driver * weights[None, :]) @ basis.T
    return TorusFieldSample(values, driver, grid, freqs, alpha)


def empirical_covariance(values: np.ndarray) -> np.ndarray:
    """E-hat[g_x conj(g_y)] over samples (axis 0)."""
    v = np.asarray(values)
    return v.T @ v.conj() / v.shape[0]


def covariance_stderr(values: np.ndarray) -> np.ndarray:
    """Entrywise standard error of :func:`empirical_covariance`."""
    v = np.asarray(values)
    n = v.shape[0]
    prods = v[:, :, None] * v.conj()[:, None, :]
    var = prods.real.var(axis=0, ddof=1) + prods.imag.var(axis=0, ddof=1)
    return np.sqrt(var / n)
