"""Inside the generator: the energy machine and its keyed training.

Shows the conditional sampling structure, the free-energy identity checked
against explicit enumeration, one CD-1 step, and how the per-epoch weight
disturbance turns the weight matrix into keystream material.
"""

import math

import numpy as np

from rbmstream import (KeyConfig, SplitMix64, derive_master_seed, energy,
                       free_energy, hidden_probs, init_params,
                       oracle_partition, oracle_prob_v, quantize, train,
                       visible_probs)
from rbmstream.rbm import extract_row

# --- a tiny machine by hand ---------------------------------------------------
key = KeyConfig("0.5", epochs=60, hidden_count=4)
rng = derive_master_seed(key)
params = init_params(6, 4, rng)
print(f"weights 4x6 initialised in [-0.1, 0.1]; "
      f"range seen: [{params.weights.min():+.4f}, {params.weights.max():+.4f}]")

v = np.array([1.0, 0.0, 1.0, 0.0, 1.0, 1.0])
h = np.array([1.0, 0.0, 1.0, 0.0])
print(f"energy(v, h)        = {energy(params, v, h):+.6f}")
print(f"free energy F(v)    = {free_energy(params, v):+.6f}")
print(f"p(h_j=1 | v)        = {np.round(hidden_probs(params, v), 4)}")
print(f"p(v_i=1 | h)        = {np.round(visible_probs(params, h), 4)}")

# The analytic free energy agrees with brute-force enumeration over all
# hidden states (that is exactly what the oracle module cross-checks).
z = oracle_partition(params)
p_v = oracle_prob_v(params, v)
print(f"\npartition Z (enumerated over 2^10 states) = {z:.4f}")
print(f"p(v) via enumeration = {p_v:.6e}")
print(f"p(v) via e^-F / Z    = {math.exp(-free_energy(params, v)) / z:.6e}")

# --- keyed training end to end --------------------------------------------------
pattern = np.tile([0.9, 0.1], 32)  # a striped 64-long training vector
trained = train(key, pattern, derive_master_seed(key, nonce=3))


def reconstruction_mse(p):
    v1 = visible_probs(p, hidden_probs(p, pattern))
    return float(((v1 - pattern) ** 2).mean())


fresh = init_params(pattern.size, key.hidden_count, derive_master_seed(key, nonce=3))
print(f"\nreconstruction MSE: initialised {reconstruction_mse(fresh):.4f} "
      f"-> after {key.epochs} epochs {reconstruction_mse(trained):.4f}")

# The disturbed rows are the cipher material.
row = extract_row(trained, 0)
print(f"row 0 (first 6 weights): {np.round(row[:6], 4)}")
print(f"quantized to bytes     : {[int(b) for b in quantize(row[:6])]}")

# Determinism: retraining from the same key and nonce replays the bytes.
again = train(key, pattern, derive_master_seed(key, nonce=3))
print(f"retrained row identical: {np.array_equal(extract_row(again, 0), row)}")
