# The driver change of variables turns the field energy into a sum of
# squares, so the partition function is an explicit Gaussian integral.
# Its log density has a d -> infinity limit, and the field doubles as a
# random-bond spin model.

import math

import numpy as np

from qfield import fields, green, hamiltonian as ham, walks

law = walks.lazy_walk(2, 3, gammas=[0.3, 0.7])
spec = law.spectrum()
alpha, beta = 0.55, 1.1

print("== Dirichlet-plus-mass identity ==")
rng = np.random.default_rng(0)
g = rng.standard_normal(8)
lhs, rhs, res = ham.hamiltonian_identity_check(spec, alpha, g)
print(f"lhs {lhs:.6f} = rhs {rhs:.6f} (residual {res:.1e})")

print("\n== driver diagonalization ==")
driver = rng.standard_normal(8)
value = ham.hamiltonian_value(driver, spec, alpha)
print("energy:", round(value, 8), " vs (1/2)|driver|^2:",
      round(0.5 * float(driver @ driver), 8))

print("\n== partition function in log space ==")
pr = ham.partition_function(spec, alpha, beta)
print(f"log J = {pr.log_jacobian:.6f}, log Z = {pr.log_z:.6f}")
swap = walks.DeterministicLaw(2, 1, (1,)).spectrum()
print("worked value J(q=2,d=1,alpha=1/2) =",
      round(ham.partition_function(swap, 0.5, 1.0).jacobian, 7))

print("\n== grouping identity (exchangeable walks) ==")
print("residual:", ham.grouping_identity_residual(law, alpha))

print("\n== partition density limit as d grows ==")
s = 1.0
target = -math.log1p(-alpha * math.exp(-s))
for d in (4, 8, 12):
    gap = ham.log_z_density_gap(walks.lazy_walk(2, d, [s / d]).spectrum(),
                                alpha)
    print(f"  d = {d:2d}: gap {gap:.6f}  (limit with c = 1: {target:.6f})")
print("closed-form limit op:",
      ham.log_z_limit([s], [1.0], alpha, beta, 2, c=1.0).value)

print("\n== random-bond spins on the field ==")
pspec = ham.PottsSpec(spec, alpha, beta=0.3)
sample = fields.sample_field(spec, alpha, seed=1, n_samples=50_000)
h = ham.potts_hamiltonian(pspec, sample)     # b = delta: H_y = -g_y
weights = ham.gibbs(pspec, sample)
print("Gibbs rows sum to 1:", np.allclose(weights.sum(axis=1), 1.0))
ez = ham.expected_partition(pspec)
sigma2 = green.green_exact(spec, alpha).kernel[0]
print("log E[Z] =", round(math.log(ez), 6), " closed form:",
      round(3 * math.log(2) + 0.3**2 * sigma2 / 2, 6))
z_draws = np.sum(np.exp(0.3 * h.real), axis=1)
print("MC estimate:", round(float(np.log(z_draws.mean())), 6))
print("free energy expansion:",
      round(ham.free_energy_expansion(pspec), 6))
