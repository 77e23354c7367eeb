"""Multivariate Krawtchouk polynomials on the uniform multinomial.

Q_l(m) is the coefficient of w_1^l[1] .. w_{q-1}^l[q-1] in

    prod_{j=0}^{q-1} (1 + sum_{k=1}^{q-1} w_k theta_k^j)^m[j],

theta_k = exp(2*pi*i*k/q), extracted by a dynamic program that truncates
multi-degrees componentwise at l (cost O(|m| * q * prod(l[k]+1))).  The
inverse squared norms h_l^-1 = d!/((d-|l|)! prod l[k]!) are computed in
integer arithmetic.

These polynomials diagonalize the type-count chain of walks with
exchangeable increments: grouped eigenvalues kappa_l come either from
counts (route A, h_l E[Q_l(counts of V)]) or from transforms (route B,
E[prod_k xi[k]^l[k]]) and the t-step count kernel is

    p(n; d) * (1 + sum_{0<|l|<=d} kappa_l^t h_l Q_l(m) conj(Q_l(n))).
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np

from .lattice import RangeError, all_states, roots
from .walks import (
    ContractError,
    DeFinettiMixtureLaw,
    DeterministicLaw,
    IncrementLaw,
    ProductIIDLaw,
    SparseExchangeableLaw,
    UniformLaw,
)


class KappaError(ValueError):
    """Grouped eigenvalues do not define a transition kernel."""


def degree_indices(q: int, d: int, max_total: int | None = None) -> list[tuple[int, ...]]:
    """All l in N^(q-1) with |l| <= max_total (default d), lex order."""
    cap = d if max_total is None else min(max_total, d)
    out: list[tuple[int, ...]] = []

    def rec(prefix, remaining, slots):
        if slots == 0:
            out.append(tuple(prefix))
            return
        for v in range(remaining + 1):
            rec(prefix + [v], remaining - v, slots - 1)

    rec([], cap, q - 1)
    return sorted(out)


def count_vectors(q: int, d: int) -> list[tuple[int, ...]]:
    """All m in N^q with |m| = d, lex order."""
    out: list[tuple[int, ...]] = []

    def rec(prefix, remaining, slots):
        if slots == 1:
            out.append(tuple(prefix + [remaining]))
            return
        for v in range(remaining + 1):
            rec(prefix + [v], remaining - v, slots - 1)

    rec([], d, q)
    return out


def krawtchouk(m, l, q: int) -> complex:
    """Q_l(m) by truncated-multidegree coefficient extraction.

    ``m`` is a length-q count vector; sum(m) plays the role of the
    dimension.  Degrees |l| beyond sum(m) exceed the polynomial degree
    bound and return 0 (with a warning).
    """
    m = np.asarray(m, dtype=np.int64)
    l = tuple(int(v) for v in l)
    if m.shape != (q,) or np.any(m < 0):
        raise RangeError(f"m must be a length-{q} nonnegative count vector")
    if len(l) != q - 1 or any(v < 0 for v in l):
        raise RangeError(f"l must be a length-{q - 1} nonnegative degree index")
    if sum(l) > int(m.sum()):
        warnings.warn(f"degree |l|={sum(l)} exceeds |m|={int(m.sum())}; "
                      "coefficient is 0", stacklevel=2)
        return 0.0 + 0.0j
    theta = roots(q)
    shape = tuple(v + 1 for v in l)
    coef = np.zeros(shape, dtype=complex)
    coef[(0,) * (q - 1)] = 1.0
    for j in range(q):
        if m[j] == 0:
            continue
        factors = [theta[(k * j) % q] for k in range(1, q)]
        for _ in range(int(m[j])):
            new = coef.copy()
            for axis in range(q - 1):
                if l[axis] == 0:
                    continue
                src = [slice(None)] * (q - 1)
                dst = [slice(None)] * (q - 1)
                src[axis] = slice(0, l[axis])
                dst[axis] = slice(1, l[axis] + 1)
                new[tuple(dst)] += factors[axis] * coef[tuple(src)]
            coef = new
    return complex(coef[l])


def krawtchouk_exact_q2(m, l: int) -> int:
    """q = 2 coefficient of w^l in (1+w)^m[0] (1-w)^m[1], exact integers."""
    m0, m1 = int(m[0]), int(m[1])
    coef = [1]  # truncated at degree l
    for sign, reps in ((1, m0), (-1, m1)):
        for _ in range(reps):
            new = list(coef) + ([0] if len(coef) <= l else [])
            for i in range(len(new) - 1, 0, -1):
                new[i] = (coef[i] if i < len(coef) else 0) + sign * coef[i - 1]
            coef = new
    return coef[l] if l < len(coef) else 0


def scale_constant_inv(l, d: int) -> int:
    """h_l^-1 = d!/((d-|l|)! * prod_k l[k]!), exact integer."""
    s = sum(int(v) for v in l)
    if s > d:
        raise RangeError(f"|l| = {s} exceeds d = {d}")
    num = 1
    for i in range(s):
        num *= d - i
    den = 1
    for v in l:
        den *= math.factorial(int(v))
    return num // den


def log_scale_constant_inv(l, d: int) -> float:
    """log h_l^-1, for dimensions too large for exact floats."""
    s = sum(int(v) for v in l)
    out = math.lgamma(d + 1) - math.lgamma(d - s + 1)
    for v in l:
        out -= math.lgamma(int(v) + 1)
    return out


def multinomial_pmf(m, d: int, q: int) -> float:
    """Uniform multinomial mass p(m; d) = (d choose m) q^-d."""
    logc = math.lgamma(d + 1) - sum(math.lgamma(int(v) + 1) for v in m)
    return math.exp(logc - d * math.log(q))


@dataclass
class KrawtchoukTable:
    """Precomputed Q_l(m) and scale constants for all |l| <= max_degree."""

    q: int
    d: int
    degrees: list[tuple[int, ...]]
    counts: list[tuple[int, ...]]
    values: np.ndarray  # (n_degrees, n_counts) complex
    h_inv: np.ndarray   # exact h_l^-1 as float

    def degree_index(self, l) -> int:
        return self.degrees.index(tuple(int(v) for v in l))

    def count_index(self, m) -> int:
        return self.counts.index(tuple(int(v) for v in m))

    def value(self, l, m) -> complex:
        return self.values[self.degree_index(l), self.count_index(m)]

    def h(self, l) -> float:
        return 1.0 / self.h_inv[self.degree_index(l)]


def table(q: int, d: int, max_degree: int | None = None) -> KrawtchoukTable:
    degrees = degree_indices(q, d, max_degree)
    counts = count_vectors(q, d)
    values = np.empty((len(degrees), len(counts)), dtype=complex)
    for i, l in enumerate(degrees):
        for j, m in enumerate(counts):
            values[i, j] = krawtchouk(m, l, q)
    h_inv = np.array([scale_constant_inv(l, d) for l in degrees], dtype=float)
    return KrawtchoukTable(q, d, degrees, counts, values, h_inv)


def orthogonality_residual(q: int, d: int, max_degree: int | None = None,
                           tab: KrawtchoukTable | None = None) -> float:
    """max_{l,l'} | E[Q_l conj(Q_l')] - delta_{ll'} h_l^-1 | over the multinomial."""
    if tab is None:
        tab = table(q, d, max_degree)
    if len(tab.counts) > 100_000:
        raise RangeError("count-vector enumeration too large for exact check")
    weights = np.array([multinomial_pmf(m, d, q) for m in tab.counts])
    gram = (tab.values * weights[None, :]) @ tab.values.conj().T
    target = np.diag(tab.h_inv)
    return float(np.max(np.abs(gram - target)))


def duality_residual(m, l, q: int) -> float:
    """| h_{m^-}^-1 Q_l(m) - h_l^-1 Q_{m^-}(l^+) | for one (m, l) pair.

    l^+ prepends d - |l| as the type-0 count; m^- drops the type-0 count
    of m and acts as a degree index.
    """
    d = int(sum(m))
    m_minus = tuple(int(v) for v in m[1:])
    l_plus = (d - sum(l),) + tuple(int(v) for v in l)
    lhs = scale_constant_inv(m_minus, d) * krawtchouk(m, l, q)
    rhs = scale_constant_inv(l, d) * krawtchouk(l_plus, m_minus, q)
    return float(abs(lhs - rhs))


def max_duality_residual(q: int, d: int, max_degree: int | None = None) -> float:
    worst = 0.0
    for l in degree_indices(q, d, max_degree):
        for m in count_vectors(q, d):
            worst = max(worst, duality_residual(m, l, q))
    return worst


def _component_kappa_by_counts(p: np.ndarray, l, q: int, d: int) -> complex:
    """E[Q_l(M)] with M ~ Multinomial(d, p), by full enumeration."""
    acc = 0.0 + 0.0j
    logf_d = math.lgamma(d + 1)
    for m in count_vectors(q, d):
        logw = logf_d
        ok = True
        for mj, pj in zip(m, p):
            if mj and pj == 0.0:
                ok = False
                break
            logw -= math.lgamma(mj + 1)
            logw += mj * math.log(pj) if mj else 0.0
        if not ok:
            continue
        acc += math.exp(logw) * krawtchouk(m, l, q)
    return acc


def kappa_route_counts(law: IncrementLaw, l) -> complex:
    """Route A: kappa_l = h_l E[Q_l(type counts of V)], by enumeration."""
    if not law.is_exchangeable():
        raise ContractError("kappa requires an exchangeable increment law")
    q, d = law.q, law.d
    h_l = 1.0 / scale_constant_inv(l, d)
    if isinstance(law, UniformLaw):
        mean = _component_kappa_by_counts(np.full(q, 1.0 / q), l, q, d)
    elif isinstance(law, DeterministicLaw):
        m = np.zeros(q, dtype=np.int64)
        m[law.shift[0]] = d
        mean = krawtchouk(m, l, q)
    elif isinstance(law, ProductIIDLaw):
        mean = _component_kappa_by_counts(law.p, l, q, d)
    elif isinstance(law, DeFinettiMixtureLaw):
        mean = sum(w * _component_kappa_by_counts(p, l, q, d)
                   for w, p in zip(law.weights, law.pmfs))
    elif isinstance(law, SparseExchangeableLaw):
        # counts of V = counts over the c special slots + uniform rest
        c = law.c
        mean = 0.0 + 0.0j
        rest = {mu: multinomial_pmf(mu, d - c, q)
                for mu in count_vectors(q, d - c)} if d > c \
            else {tuple([0] * q): 1.0}
        states = all_states(q, c) if c > 1 else np.arange(q)[:, None]
        for idx, prob in enumerate(law.joint):
            if prob == 0.0:
                continue
            mv = np.bincount(states[idx], minlength=q)
            for mu, wu in rest.items():
                mean += prob * wu * krawtchouk(mv + np.array(mu), l, q)
    else:
        raise ContractError(f"no counts route for {type(law).__name__}")
    return complex(h_l * mean)


def kappa_route_transform(law: IncrementLaw, l) -> complex:
    """Route B: kappa_l = E[prod_k xi[k]^l[k]] over the mixing measure."""
    from .walks import xi_transform

    q = law.q
    l = tuple(int(v) for v in l)
    if isinstance(law, UniformLaw):
        atoms, weights = [xi_transform(np.full(q, 1.0 / q))], [1.0]
    elif isinstance(law, ProductIIDLaw):
        atoms, weights = [xi_transform(law.p)], [1.0]
    elif isinstance(law, DeFinettiMixtureLaw):
        atoms, weights = list(law.xi_atoms()), list(law.weights)
    elif isinstance(law, DeterministicLaw) and law.is_exchangeable():
        p = np.zeros(q)
        p[law.shift[0]] = 1.0
        atoms, weights = [xi_transform(p)], [1.0]
    else:
        raise ContractError(
            "transform route needs conditionally-i.i.d. entries "
            f"(got {type(law).__name__})")
    acc = 0.0 + 0.0j
    for w, xi in zip(weights, atoms):
        acc += w * np.prod([xi[k] ** l[k - 1] for k in range(1, q)])
    return complex(acc)


def kappa_from_law(law: IncrementLaw, l, route: str = "transform") -> complex:
    """Grouped eigenvalue kappa_l; ``route`` is "counts" or "transform"."""
    if route == "counts":
        return kappa_route_counts(law, l)
    if route == "transform":
        try:
            return kappa_route_transform(law, l)
        except ContractError:
            return kappa_route_counts(law, l)
    raise RangeError(f"unknown route {route!r}")


def count_chain_kernel(kappas, q: int, d: int, t: int,
                       tab: KrawtchoukTable | None = None
                       ) -> tuple[np.ndarray, list[tuple[int, ...]]]:
    """t-step transition matrix of the type-count chain.

    ``kappas`` maps degree tuples to eigenvalues (dict or callable).
    Rows sum to 1 within 1e-9; entries below -1e-9 raise KappaError.
    """
    if t < 0:
        raise RangeError(f"t must be >= 0, got {t}")
    if tab is None:
        tab = table(q, d)
    get = kappas.__getitem__ if isinstance(kappas, dict) else kappas
    kap = np.array([complex(get(l)) for l in tab.degrees])
    weights = (kap**t) * (1.0 / tab.h_inv)
    pvec = np.array([multinomial_pmf(m, d, q) for m in tab.counts])
    # S[m, n] = sum_l kappa_l^t h_l Q_l(m) conj(Q_l(n))
    s = tab.values.T @ (weights[:, None] * tab.values.conj())
    kernel = pvec[None, :] * s
    if np.max(np.abs(kernel.imag)) > 1e-9:
        raise KappaError("count kernel has imaginary residue; kappas invalid")
    kernel = kernel.real
    if kernel.min() < -1e-9:
        raise KappaError(f"count kernel entry {kernel.min():.3e} < -1e-9")
    rows = kernel.sum(axis=1)
    if np.max(np.abs(rows - 1.0)) > 1e-9:
        raise KappaError("count kernel rows do not sum to 1")
    return np.clip(kernel, 0.0, None), tab.counts


def state_type_counts(q: int, d: int) -> tuple[list[tuple[int, ...]], np.ndarray]:
    """Count vectors plus the map rank -> class index."""
    counts = count_vectors(q, d)
    lookup = {m: i for i, m in enumerate(counts)}
    states = all_states(q, d)
    classes = np.empty(states.shape[0], dtype=np.int64)
    for i, x in enumerate(states):
        classes[i] = lookup[tuple(np.bincount(x, minlength=q))]
    return counts, classes


def lump_by_type(matrix: np.ndarray, q: int, d: int) -> np.ndarray:
    """Type-lumped kernel: sum columns over classes, one representative row.

    The brute-force oracle that the spectral count kernel must match.
    """
    counts, classes = state_type_counts(q, d)
    reps = [int(np.nonzero(classes == i)[0][0]) for i in range(len(counts))]
    lumped = np.zeros((len(counts), len(counts)))
    for mi, x in enumerate(reps):
        lumped[mi] = np.bincount(classes, weights=matrix[x].real,
                                 minlength=len(counts))
    return lumped
