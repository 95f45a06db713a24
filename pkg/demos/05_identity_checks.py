"""Brute-force verification of the probabilistic identities.

On machines small enough to enumerate every joint state, the model's
algebra is checkable exactly: probabilities normalise, the marginal
obtained by enumeration equals the free-energy form, and the analytic
log-likelihood gradient matches finite differences.  The same battery
backs `rbmstream verify-oracles`.
"""

import numpy as np

from rbmstream import (SplitMix64, oracle_loglik_grad, oracle_partition,
                       oracle_prob_v, run_identity_suite)
from rbmstream.oracles import binary_states, finite_difference_grad
from rbmstream.rbm import RbmParams

# A concrete 3-visible / 2-hidden machine.
rng = SplitMix64(2718)
params = RbmParams((2 * rng.unit_array(6) - 1).reshape(2, 3),
                   2 * rng.unit_array(3) - 1,
                   2 * rng.unit_array(2) - 1)

z = oracle_partition(params)
marginals = [oracle_prob_v(params, v) for v in binary_states(3)]
print(f"partition Z = {z:.6f}")
print(f"marginals   = {np.round(marginals, 6)}")
print(f"sum p(v)    = {sum(marginals):.12f}")

v = np.array([1.0, 0.0, 1.0])
exact = oracle_loglik_grad(params, v)
approx = finite_difference_grad(params, v)
gap = max(np.abs(exact.weights - approx.weights).max(),
          np.abs(exact.visible_bias - approx.visible_bias).max(),
          np.abs(exact.hidden_bias - approx.hidden_bias).max())
print(f"\ngrad ln p(v): exact vs central differences, max gap = {gap:.2e}")

print("\nfull identity suite (100 random tiny machines):")
for check in run_identity_suite(instances=100, max_units=12):
    status = "pass" if check.passed else "FAIL"
    print(f"  {status}: {check.name}  "
          f"(worst {check.worst_error:.2e}, tolerance {check.tolerance:.0e})")
