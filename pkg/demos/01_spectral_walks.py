# Walks on {0,..,q-1}^d driven by an increment law V, diagonalized by
# roots of unity: rho[r] = E[theta^(V.r)] are the kernel eigenvalues.
# This script builds a few laws, reconstructs their kernels, and checks
# the structure numerically.

import numpy as np

from qfield import walks
from qfield.lattice import all_states

q, d = 3, 2

print("== uniform law: one-step mixing ==")
uniform = walks.UniformLaw(q, d)
rho = uniform.spectrum().rho
print("rho[0] =", rho[0].real, " max |rho[r != 0]| =",
      np.max(np.abs(rho[1:])))
P = walks.transition_matrix(uniform.spectrum())
print("every entry equals 1/q^d:", np.allclose(P, 1 / q**d))

print("\n== lazy walk: hold w.p. 1-gamma, step +-1 otherwise ==")
lazy = walks.lazy_walk(q, d, gammas=[0.3, 0.7])
spec = lazy.spectrum()
print("symmetric jumps  ->  real eigenvalues:", spec.is_real)
P = walks.transition_matrix(spec)
print("row sums:", P.sum(axis=1)[:4], "...")
print("doubly stochastic:", np.allclose(P.sum(axis=0), 1.0))

print("\n== sparse exchangeable: only c coordinates jump ==")
sparse = walks.builtin_law("sparse_exchangeable", 2, 5)
rho = sparse.spectrum().rho
weights = (all_states(2, 5) != 0).sum(axis=1)
print("c =", sparse.c)
for w in range(6):
    level = np.abs(rho[weights == w])
    print(f"  |r| = {w}: max |rho| = {level.max():.4f}")

print("\n== simulation: one path and one killed endpoint batch ==")
path = walks.simulate_walk(lazy, x0=(0, 0), steps=8, seed=42)
print("path:", [tuple(x) for x in path])
kill = walks.KillingLaw(alpha=0.6)
ends = walks.simulate_killed(lazy, (0, 0), kill, seed=7, n_walks=5)
print("killed endpoints:", [tuple(x) for x in ends])

print("\n== continuous time: Poisson embedding of the lazy walk ==")
embedding = walks.unit_rate_embedding(lazy)
for tau in (0.0, 0.5, 2.0):
    ct = walks.ct_eigenvalues(embedding, tau, q, d)
    print(f"tau = {tau}: rho_ct matches exp(-tau (1-rho)):",
          np.max(np.abs(ct.rho - np.exp(-tau * (1 - spec.rho)))) < 1e-12)
