"""Large-dimension limits: Hermite polynomials scaled to N(0,1/q), limit
Krawtchouk polynomials, the Gaussian transform identity, the limit Green
density, and the transform-field covariance.

Scaling counts as m = d/q + sqrt(d) mfrak, the type fluctuation mfrak
converges to a singular Gaussian M with Cov = (1/q)(delta_ab - 1/q),
realized here as M = (I - J/q) Z / sqrt(q) with Z i.i.d. standard
normal.  The scaled polynomials Q_l(d/q + sqrt(d) m) d^(-|l|/2) converge
to Q_l(m; infinity), the coefficient of w^l in

    exp{ -(1/2q) sum_j (sum_k w_k theta_k^j)^2 + sum_j m[j] sum_k w_k theta_k^j }.

Two independent evaluation routes are kept: generic truncated-series
exponentiation of that generating function (route A) and the explicit
Hermite-product expansion (route B).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from itertools import product as iter_product

import numpy as np
from numpy.polynomial.hermite_e import hermegauss

from .green import green_eigenvalues
from .krawtchouk import degree_indices, krawtchouk, log_scale_constant_inv
from .lattice import RangeError, roots
from .pointprocess import PointProcessSpec, y_moment
from .walks import ContractError


def hermite_chebycheff(k: int, x, q: int):
    """H_k for the N(0, 1/q) weight: H_{k+1} = x H_k - (k/q) H_{k-1}.

    Generating function sum_k z^k H_k / k! = exp(-z^2/(2q) + x z).
    Vectorized over x.
    """
    if k < 0:
        raise RangeError("degree must be >= 0")
    x = np.asarray(x, dtype=float)
    prev = np.ones_like(x)
    if k == 0:
        return prev
    cur = x.copy()
    for j in range(1, k):
        prev, cur = cur, x * cur - (j / q) * prev
    return cur


def hermite_table(max_k: int, x, q: int) -> np.ndarray:
    """Stack H_0..H_max_k along axis 0."""
    x = np.asarray(x, dtype=float)
    out = np.empty((max_k + 1,) + x.shape)
    out[0] = 1.0
    if max_k >= 1:
        out[1] = x
    for j in range(1, max_k):
        out[j + 1] = x * out[j] - (j / q) * out[j - 1]
    return out


def hermite_orthogonality_residual(q: int, max_k: int = 8,
                                   nodes: int = 64) -> float:
    """max |E[H_j H_k] - delta_jk k!/q^k| under N(0, 1/q) by quadrature."""
    z, w = hermegauss(nodes)
    x = z / math.sqrt(q)
    w = w / w.sum()
    table = hermite_table(max_k, x, q)
    gram = (table * w[None, :]) @ table.T
    target = np.diag([math.factorial(k) / q**k for k in range(max_k + 1)])
    return float(np.max(np.abs(gram - target)))


def _quadratic_pairs(q: int) -> list[tuple[int, int, complex]]:
    """Exponent quadratic -(1/2q) sum_j (sum_k w_k theta_k^j)^2 reduces to
    -(1/2) sum_k w_k w_{q-k}; returns (k, k', coeff) with k <= k'."""
    out = []
    for k in range(1, q):
        kk = (q - k) % q
        if kk == 0:
            continue
        if k < kk:
            out.append((k, kk, -1.0 + 0.0j))
        elif k == kk:
            out.append((k, k, -0.5 + 0.0j))
    return out


def _linear_coeffs(m_full: np.ndarray, q: int) -> np.ndarray:
    """c_k = sum_j m[j] theta_k^j for k = 1..q-1."""
    theta = roots(q)
    j = np.arange(q)
    return np.array([np.sum(m_full * theta[(k * j) % q]) for k in range(1, q)])


def full_type_vector(m_plus, q: int) -> np.ndarray:
    """Prepend m[0] = -sum(m_plus) to close the singular constraint."""
    m_plus = np.asarray(m_plus, dtype=float)
    if m_plus.shape != (q - 1,):
        raise RangeError(f"m_plus must have length {q - 1}")
    return np.concatenate(([-m_plus.sum()], m_plus))


def _truncated_multiply(a: np.ndarray, b: np.ndarray, shape) -> np.ndarray:
    out = np.zeros(shape, dtype=complex)
    for idx in np.ndindex(a.shape):
        if a[idx] == 0:
            continue
        window = tuple(slice(0, s - i) for s, i in zip(shape, idx))
        target = tuple(slice(i, None) for i in idx)
        out[target] += a[idx] * b[window]
    return out


def limit_krawtchouk_series(m_full, l, q: int) -> complex:
    """Route A: coefficient of w^l by truncated series exponentiation."""
    l = tuple(int(v) for v in l)
    m_full = np.asarray(m_full, dtype=float)
    if m_full.shape != (q,):
        raise RangeError(f"m must be the full length-{q} type vector")
    shape = tuple(v + 1 for v in l)
    expo = np.zeros(shape, dtype=complex)
    c = _linear_coeffs(m_full, q)
    for k in range(1, q):
        idx = [0] * (q - 1)
        idx[k - 1] = 1
        if idx[k - 1] < shape[k - 1]:
            expo[tuple(idx)] += c[k - 1]
    for k, kk, coeff in _quadratic_pairs(q):
        idx = [0] * (q - 1)
        idx[k - 1] += 1
        idx[kk - 1] += 1
        if all(i < s for i, s in zip(idx, shape)):
            expo[tuple(idx)] += coeff
    # exp(E) = sum_n E^n / n!, truncated at total degree |l|
    term = np.zeros(shape, dtype=complex)
    term[(0,) * (q - 1)] = 1.0
    acc = term.copy()
    for n in range(1, sum(l) + 1):
        term = _truncated_multiply(term, expo, shape) / n
        acc += term
    return complex(acc[l])


def _hermite_expansion_coeffs(l, q: int) -> list[tuple[tuple[int, ...], complex]]:
    """(a, coeff) pairs: Q_l(m; inf) = sum_a coeff_a prod_j H_{a[j]}(m[j])."""
    l = tuple(int(v) for v in l)
    s = sum(l)
    denom = 1.0
    for v in l:
        denom *= math.factorial(v)
    l_as_counts = (0,) + l  # degree index reused as a count vector over q types
    out = []
    for a in _compositions(s, q):
        a_plus = a[1:]
        coeff = krawtchouk(np.array(l_as_counts), a_plus, q) / denom
        if coeff != 0:
            out.append((a, complex(coeff)))
    return out


def _compositions(total: int, slots: int) -> list[tuple[int, ...]]:
    out = []

    def rec(prefix, remaining, left):
        if left == 1:
            out.append(tuple(prefix + [remaining]))
            return
        for v in range(remaining + 1):
            rec(prefix + [v], remaining - v, left - 1)

    rec([], total, slots)
    return out


def limit_krawtchouk_hermite(m_full, l, q: int) -> complex:
    """Route B: explicit Hermite-product expansion."""
    m_full = np.asarray(m_full, dtype=float)
    if m_full.shape != (q,):
        raise RangeError(f"m must be the full length-{q} type vector")
    s = sum(int(v) for v in l)
    table = hermite_table(s, m_full, q)  # (s+1, q)
    acc = 0.0 + 0.0j
    for a, coeff in _hermite_expansion_coeffs(l, q):
        prod = 1.0
        for j in range(q):
            prod = prod * table[a[j], j]
        acc += coeff * prod
    return complex(acc)


def limit_krawtchouk_batch(m_samples: np.ndarray, l, q: int) -> np.ndarray:
    """Route-B evaluation over many full type vectors (n, q)."""
    m_samples = np.atleast_2d(np.asarray(m_samples, dtype=float))
    s = sum(int(v) for v in l)
    table = hermite_table(s, m_samples, q)  # (s+1, n, q)
    acc = np.zeros(m_samples.shape[0], dtype=complex)
    for a, coeff in _hermite_expansion_coeffs(l, q):
        prod = np.ones(m_samples.shape[0])
        for j in range(q):
            prod = prod * table[a[j], :, j]
        acc += coeff * prod
    return acc


@dataclass
class LimitPolyTable:
    """Limit polynomials stored on the linear-form basis c_k(m).

    Each Q_l is a dict {exponent tuple over c_1..c_{q-1}: coefficient};
    total degree equals |l| and Q_0 = 1.
    """

    q: int
    max_degree: int
    polys: dict[tuple[int, ...], dict[tuple[int, ...], complex]]

    def evaluate(self, m_full, l) -> complex:
        c = _linear_coeffs(np.asarray(m_full, dtype=float), self.q)
        acc = 0.0 + 0.0j
        for expo, coeff in self.polys[tuple(int(v) for v in l)].items():
            acc += coeff * np.prod(c ** np.array(expo))
        return complex(acc)

    def degree(self, l) -> int:
        mono = self.polys[tuple(int(v) for v in l)]
        return max((sum(e) for e, v in mono.items() if abs(v) > 1e-14),
                   default=0)


def limit_poly_table(q: int, max_degree: int) -> LimitPolyTable:
    """Closed-form c-basis coefficients from the factorized quadratic."""
    pairs = _quadratic_pairs(q)
    polys = {}
    for l in degree_indices(q, max_degree + 1, max_degree):
        mono: dict[tuple[int, ...], complex] = {}
        ranges = [range(0, v + 1) for v in l]
        for b in iter_product(*ranges):
            coeff = 1.0 + 0.0j
            ok = True
            consumed = [0] * (q - 1)
            for k, kk, cval in pairs:
                if k == kk:
                    bk = b[k - 1]
                    if bk % 2:
                        ok = False
                        break
                    coeff *= (-0.5) ** (bk // 2) / math.factorial(bk // 2)
                    consumed[k - 1] = bk
                else:
                    if b[k - 1] != b[kk - 1]:
                        ok = False
                        break
                    coeff *= (-1.0) ** b[k - 1] / math.factorial(b[k - 1])
                    consumed[k - 1] = b[k - 1]
                    consumed[kk - 1] = b[kk - 1]
            if not ok or list(b) != consumed:
                continue
            expo = tuple(lv - bv for lv, bv in zip(l, b))
            for lv, bv in zip(l, b):
                coeff /= math.factorial(lv - bv)
            mono[expo] = mono.get(expo, 0.0) + coeff
        polys[l] = mono
    return LimitPolyTable(q, max_degree, polys)


def mplus_density(m_plus, q: int) -> float:
    """Density of the nonsingular marginal M_+ at m_plus."""
    m_plus = np.asarray(m_plus, dtype=float)
    quad = float(np.sum(m_plus**2) + np.sum(m_plus) ** 2)
    return (q ** (q / 2.0) / (2.0 * np.pi) ** ((q - 1) / 2.0)
            * math.exp(-q / 2.0 * quad))


def sample_type_gaussian(q: int, n: int, rng: np.random.Generator) -> np.ndarray:
    """Draws of the singular type Gaussian M = (I - J/q) Z / sqrt(q)."""
    z = rng.standard_normal((n, q))
    return (z - z.mean(axis=1, keepdims=True)) / math.sqrt(q)


def gaussian_char(omega, q: int) -> complex:
    """E[e^(i omega . M)] = exp{-(1/2q) sum w^2 + (1/2q^2)(sum w)^2}."""
    omega = np.asarray(omega, dtype=float)
    if omega.shape != (q,):
        raise RangeError(f"omega must be the full length-{q} vector")
    return complex(math.exp(-np.sum(omega**2) / (2 * q)
                            + np.sum(omega) ** 2 / (2 * q**2)))


def transform_identity(omega, l, q: int, n_samples: int, seed: int
                       ) -> tuple[complex, complex, float]:
    """(MC transform, closed form, standard error) for one (omega, l).

    E[e^(i w.M) Q_l(M; inf)] = E[e^(i w.M)] (i/q)^|l|
                               prod_k (sum_a w[a] theta_k^a)^l[k] / l[k]!.
    """
    omega = np.asarray(omega, dtype=float)
    l = tuple(int(v) for v in l)
    rng = np.random.default_rng(seed)
    m = sample_type_gaussian(q, n_samples, rng)
    samples = np.exp(1j * m @ omega) * limit_krawtchouk_batch(m, l, q)
    mc = samples.mean()
    se = math.sqrt((samples.real.var(ddof=1) + samples.imag.var(ddof=1))
                   / n_samples)
    theta = roots(q)
    a = np.arange(q)
    rhs = gaussian_char(omega, q) * (1j / q) ** sum(l)
    for k in range(1, q):
        rhs *= np.sum(omega * theta[(k * a) % q]) ** l[k - 1] \
            / math.factorial(l[k - 1])
    return complex(mc), complex(rhs), se


def limit_green_density(m_plus, n_plus, lambda_of_l, q: int,
                        max_degree: int) -> float:
    """Truncated limit Green density
    phi(m)phi(n){1 + sum_{0<|l|<=L} (prod l!) lambda_l Q_l(m) conj(Q_l(n))}.

    With unit eigenvalues (the alpha = 0 case) the series is the
    reproducing kernel and diverges as L grows; the truncated value is
    still returned, with a warning flagging the delta-type limit.
    """
    import warnings

    m_full = full_type_vector(m_plus, q)
    n_full = full_type_vector(n_plus, q)
    get = lambda_of_l.__getitem__ if isinstance(lambda_of_l, dict) \
        else lambda_of_l
    acc = 1.0 + 0.0j
    degenerate = True
    for l in degree_indices(q, max_degree + 1, max_degree):
        if sum(l) == 0:
            continue
        lam_l = complex(get(l))
        if abs(lam_l - 1.0) > 1e-12:
            degenerate = False
        lfac = 1.0
        for v in l:
            lfac *= math.factorial(v)
        acc += (lfac * lam_l
                * limit_krawtchouk_hermite(m_full, l, q)
                * np.conj(limit_krawtchouk_hermite(n_full, l, q)))
    if degenerate and max_degree > 0:
        warnings.warn("unit eigenvalues: truncated reproducing series of a "
                      "delta-type limit", stacklevel=2)
    return float(mplus_density(m_plus, q) * mplus_density(n_plus, q) * acc.real)


def scaled_green_finite_d(kappa_of_l, alpha: float, q: int, d: int, m, n,
                          max_degree: int | None = None) -> float:
    """d^(q-1) (d choose m)(d choose n) q^-2d {1 + sum h_l lambda_l Q Q*}.

    The finite-d quantity whose truncation converges to
    :func:`limit_green_density` at the matching degree: the local CLT
    sends d^((q-1)/2) (d choose m) q^-d to the Gaussian density, and
    h_l Q_l(m) conj(Q_l(n)) scales to (prod l!) Q_l conj(Q_l) at infinity.
    Count vectors m, n must sum to d.
    """
    from .krawtchouk import multinomial_pmf

    m = tuple(int(v) for v in m)
    n = tuple(int(v) for v in n)
    if sum(m) != d or sum(n) != d:
        raise RangeError("count vectors must sum to d")
    get = kappa_of_l.__getitem__ if isinstance(kappa_of_l, dict) else kappa_of_l
    acc = 0.0 + 0.0j
    for l in degree_indices(q, d, max_degree):
        lam = green_eigenvalues(np.array([complex(get(l))]), alpha)[0]
        h_l = math.exp(-log_scale_constant_inv(l, d))
        acc += h_l * lam * krawtchouk(m, l, q) * np.conj(krawtchouk(n, l, q))
    return float(d ** (q - 1) * multinomial_pmf(m, d, q)
                 * multinomial_pmf(n, d, q) * acc.real)


def _check_transform_args(omega, psi, q: int) -> tuple[np.ndarray, np.ndarray]:
    omega = np.asarray(omega, dtype=float)
    psi = np.asarray(psi, dtype=float)
    for name, v in (("omega", omega), ("psi", psi)):
        if v.shape != (q,):
            raise RangeError(f"{name} must be the full length-{q} vector")
        if abs(v[0]) > 0:
            raise RangeError(f"{name}[0] must be 0 (M_+ marginal convention)")
    return omega, psi


def _transform_couplings(omega, psi, q: int) -> np.ndarray:
    """u_k = q^-2 (sum_a w[a] theta_k^a)(sum_b psi[b] theta_k^-b)."""
    theta = roots(q)
    a = np.arange(q)
    u = np.empty(q - 1, dtype=complex)
    for k in range(1, q):
        u[k - 1] = (np.sum(omega * theta[(k * a) % q])
                    * np.sum(psi * theta[(-k * a) % q]) / q**2)
    return u


def transform_field_cov_series(omega, psi, spec: PointProcessSpec,
                               max_degree: int = 12
                               ) -> tuple[complex, float]:
    """Series route: prefactors * sum_l lambda_l prod_k u_k^l[k] / l[k]!.

    Returns (value, tail estimate over degrees L+1, L+2).
    """
    omega, psi = _check_transform_args(omega, psi, spec.q)
    u = _transform_couplings(omega, psi, spec.q)
    full = PointProcessSpec(spec.alpha, spec.atoms, 1.0)
    pref = gaussian_char(omega, spec.q) * gaussian_char(-psi, spec.q)
    acc = 0.0 + 0.0j
    for l in degree_indices(spec.q, max_degree + 1, max_degree):
        term = complex(y_moment(full, l))
        for k, v in enumerate(l):
            term *= u[k] ** v / math.factorial(v)
        acc += term
    tail = 0.0
    for extra in (max_degree + 1, max_degree + 2):
        for l in _compositions(extra, spec.q - 1):
            t = 1.0
            for k, v in enumerate(l):
                t *= abs(u[k]) ** v / math.factorial(v)
            tail += t
    return complex(pref * acc), float(abs(pref) * tail)


def transform_field_cov_closed(omega, psi, spec: PointProcessSpec,
                               mass_eps: float = 1e-12
                               ) -> tuple[complex, float]:
    """Closed route: prefactors * E_Y[exp(sum_k u_k Y[k])] with the exact
    killed-horizon mixture over atom compositions, truncated at total
    mass 1 - mass_eps.  Returns (value, truncation bound)."""
    omega, psi = _check_transform_args(omega, psi, spec.q)
    xi = spec.xi_matrix()
    if np.max(np.abs(xi.imag)) > 1e-12:
        raise ContractError("closed transform-field route requires real Y "
                            "(real transform atoms)")
    u = _transform_couplings(omega, psi, spec.q)
    weights = spec.weights()
    n_atoms = len(weights)
    alpha = spec.alpha
    pref = gaussian_char(omega, spec.q) * gaussian_char(-psi, spec.q)
    acc = 0.0 + 0.0j
    mass = 0.0
    t = 0
    log_w = np.log(np.where(weights > 0, weights, 1.0))
    while mass < 1.0 - mass_eps:
        p_t = (1.0 - alpha) * alpha**t
        inner = 0.0 + 0.0j
        for comp in _compositions(t, n_atoms):
            logm = math.lgamma(t + 1)
            ok = True
            for c_a, w_a in zip(comp, weights):
                if c_a and w_a == 0.0:
                    ok = False
                    break
                logm += c_a * math.log(w_a) if c_a else 0.0
                logm -= math.lgamma(c_a + 1)
            if not ok:
                continue
            y = np.prod(xi.real[:, 1:] ** np.array(comp)[:, None], axis=0)
            inner += math.exp(logm) * np.exp(np.sum(u * y))
        acc += p_t * inner
        mass += p_t
        t += 1
        if t > 100_000:
            raise RuntimeError("killing mass accumulates too slowly")
    bound = (1.0 - mass) * math.exp(float(np.sum(np.abs(u))))
    return complex(pref * acc), float(abs(pref) * bound)
