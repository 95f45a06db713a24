"""Restricted Boltzmann Machine with keyed, fully deterministic training.

The model is the standard bipartite energy machine: m hidden units, n
visible units, weight w[j, i] between hidden j and visible i, one bias per
unit.  Visible activity is carried as float64 in [0, 1] (pixel data), the
hidden reconstruction stays mean-field, and the one stochastic choice per
training step (the hidden sample) thresholds conditional probabilities
against unit draws from the keyed generator.

Training is CD-1 plus an explicit Gaussian disturbance of the weight matrix
after every epoch; the disturbed rows are what the keystream module later
quantizes.  Every operation consumes a documented, exact number of PRNG
draws so ciphertext regeneration can never drift out of sync.
"""

from __future__ import annotations

import struct
from dataclasses import dataclass

import numpy as np
from scipy.special import expit

from .errors import DimensionError, FormatError, NumericError, RowRangeError
from .keyrng import KeyConfig, SplitMix64, _kernel

PARAMS_MAGIC = b"RBMP"

# Fixed defaults for the unstated training constants; small enough to keep
# the sigmoids unsaturated at desk scale.  All are caller-overridable.
DEFAULT_LEARNING_RATE = 0.01
DEFAULT_DISTURBANCE_SIGMA = 0.01
WEIGHT_INIT_HALF_RANGE = 0.1


@dataclass
class RbmParams:
    """Weights and biases of one machine.

    weights has shape (hidden_count, visible_count); visible_bias and
    hidden_bias match their layer lengths.  All entries must be finite.
    """

    weights: np.ndarray
    visible_bias: np.ndarray
    hidden_bias: np.ndarray

    def __post_init__(self):
        self.weights = np.asarray(self.weights, dtype=np.float64)
        self.visible_bias = np.asarray(self.visible_bias, dtype=np.float64)
        self.hidden_bias = np.asarray(self.hidden_bias, dtype=np.float64)
        if self.weights.ndim != 2:
            raise DimensionError(f"weights must be 2-D, got shape {self.weights.shape}")
        m, n = self.weights.shape
        if m < 1 or n < 1:
            raise DimensionError(f"weights must be at least 1x1, got {m}x{n}")
        if self.visible_bias.shape != (n,):
            raise DimensionError(
                f"visible_bias must have shape ({n},), got {self.visible_bias.shape}"
            )
        if self.hidden_bias.shape != (m,):
            raise DimensionError(
                f"hidden_bias must have shape ({m},), got {self.hidden_bias.shape}"
            )
        for name, arr in (("weights", self.weights), ("visible_bias", self.visible_bias),
                          ("hidden_bias", self.hidden_bias)):
            if not np.isfinite(arr).all():
                raise NumericError(f"{name} contains non-finite entries")

    @property
    def visible_count(self) -> int:
        return self.weights.shape[1]

    @property
    def hidden_count(self) -> int:
        return self.weights.shape[0]

    def copy(self) -> "RbmParams":
        return RbmParams(self.weights.copy(), self.visible_bias.copy(),
                         self.hidden_bias.copy())


def _check_visible(params: RbmParams, v: np.ndarray) -> np.ndarray:
    v = np.asarray(v, dtype=np.float64)
    if v.shape != (params.visible_count,):
        raise DimensionError(
            f"visible vector must have length {params.visible_count}, got shape {v.shape}"
        )
    return v


def _check_hidden(params: RbmParams, h: np.ndarray) -> np.ndarray:
    h = np.asarray(h, dtype=np.float64)
    if h.shape != (params.hidden_count,):
        raise DimensionError(
            f"hidden vector must have length {params.hidden_count}, got shape {h.shape}"
        )
    return h


def init_params(n: int, m: int, rng: SplitMix64) -> RbmParams:
    """Keyed initialisation: weights i.i.d. uniform in [-0.1, 0.1], biases zero.

    Weights are filled in row-major order (hidden index outer, visible index
    inner) and consume exactly m * n draws.
    """
    if n < 1 or m < 1:
        raise DimensionError(f"layer sizes must be >= 1, got n={n}, m={m}")
    draws = rng.unit_array(m * n)
    half = WEIGHT_INIT_HALF_RANGE
    weights = (-half + 2.0 * half * draws).reshape(m, n)
    return RbmParams(weights, np.zeros(n), np.zeros(m))


def energy(params: RbmParams, v: np.ndarray, h: np.ndarray) -> float:
    """Joint energy -sum_ij w_ji v_i h_j - sum_i b_i v_i - sum_j b_j h_j."""
    v = _check_visible(params, v)
    h = _check_hidden(params, h)
    cross = float(h @ (params.weights @ v))
    return -cross - float(params.visible_bias @ v) - float(params.hidden_bias @ h)


def hidden_probs(params: RbmParams, v: np.ndarray) -> np.ndarray:
    """p(h_j = 1 | v) = sigmoid(sum_i w_ji v_i + b_j) for every hidden unit."""
    v = _check_visible(params, v)
    return expit(params.weights @ v + params.hidden_bias)


def visible_probs(params: RbmParams, h: np.ndarray) -> np.ndarray:
    """p(v_i = 1 | h) = sigmoid(sum_j w_ji h_j + b_i) for every visible unit."""
    h = _check_hidden(params, h)
    return expit(params.weights.T @ h + params.visible_bias)


def sample_binary(probs: np.ndarray, rng: SplitMix64) -> np.ndarray:
    """Threshold probabilities against fresh unit draws: 1.0 where p >= r.

    One draw per component, in index order; the comparison keeps the
    literal ">= r" direction, so p = 1 always fires and p = 0 fires only on
    the measure-zero draw r = 0.0.
    """
    probs = np.asarray(probs, dtype=np.float64)
    thresholds = rng.unit_array(probs.size)
    return (probs >= thresholds).astype(np.float64)


def free_energy(params: RbmParams, v: np.ndarray) -> float:
    """-b.v - sum_j softplus(x_j), the analytic marginal -ln sum_h e^-E.

    softplus is evaluated as max(x, 0) + log1p(exp(-|x|)) so large
    pre-activations cannot overflow.
    """
    v = _check_visible(params, v)
    x = params.weights @ v + params.hidden_bias
    softplus = np.maximum(x, 0.0) + np.log1p(np.exp(-np.abs(x)))
    return -float(params.visible_bias @ v) - float(softplus.sum())


def cd1_update(params: RbmParams, v0: np.ndarray, lr: float,
               rng: SplitMix64) -> RbmParams:
    """One contrastive-divergence step (k = 1) against a single data vector.

    h0 = p(h|v0); one binary hidden sample drives a mean-field (unsampled)
    reconstruction v1; h1 = p(h|v1).  Updates:

        w  += lr * (outer(h0, v0) - outer(h1, v1))
        b_v += lr * (v0 - v1)
        b_h += lr * (h0 - h1)

    Consumes exactly hidden_count draws.  Returns a new parameter snapshot.
    """
    v0 = _check_visible(params, v0)
    if lr < 0.0:
        raise NumericError(f"learning rate must be >= 0, got {lr}")
    h0 = hidden_probs(params, v0)
    h0_sample = sample_binary(h0, rng)
    v1 = visible_probs(params, h0_sample)
    h1 = hidden_probs(params, v1)
    weights = params.weights + lr * (np.outer(h0, v0) - np.outer(h1, v1))
    visible_bias = params.visible_bias + lr * (v0 - v1)
    hidden_bias = params.hidden_bias + lr * (h0 - h1)
    return RbmParams(weights, visible_bias, hidden_bias)


def perturb_weights(params: RbmParams, sigma: float, rng: SplitMix64) -> RbmParams:
    """Disturb every weight with sigma-scaled Box-Muller Gaussian noise.

    Noise is applied in row-major order; biases are untouched.  Consumes
    exactly 2 * ceil(m * n / 2) draws.
    """
    if sigma < 0.0:
        raise NumericError(f"sigma must be >= 0, got {sigma}")
    disturbed = rng.scaled_normal_add(params.weights, sigma)
    return RbmParams(disturbed, params.visible_bias.copy(),
                     params.hidden_bias.copy())


def _cd1_weights_fill(weights, h0, v0, h1, v1, lr, out):
    """out = weights + lr * (outer(h0, v0) - outer(h1, v1)), single pass.

    numba-compiled body of the training loop; element expressions match
    cd1_update exactly so the fused path stays bit-identical to the public
    ops (the composition test in the suite checks that).
    """
    m, n = weights.shape
    for j in range(m):
        a = h0[j]
        b = h1[j]
        for i in range(n):
            out[j, i] = weights[j, i] + lr * (a * v0[i] - b * v1[i])


def train(key: KeyConfig, training_vec: np.ndarray, rng: SplitMix64,
          lr: float = DEFAULT_LEARNING_RATE,
          sigma: float = DEFAULT_DISTURBANCE_SIGMA) -> RbmParams:
    """Full keyed training: init, then key.epochs x (CD-1 step + disturbance).

    training_vec is the single real-unit data vector (values in [0, 1]); the
    visible layer size is its length and the hidden size comes from the key.
    Raises NumericError naming the epoch if the weights ever leave the
    finite range.

    The epoch loop is a fused, buffer-reusing rendition of
    cd1_update + perturb_weights producing bit-identical parameters; the
    public ops stay the readable reference.
    """
    v0 = np.asarray(training_vec, dtype=np.float64)
    if v0.ndim != 1 or v0.size < 1:
        raise DimensionError(f"training vector must be 1-D and nonempty, got shape {v0.shape}")
    if lr < 0.0:
        raise NumericError(f"learning rate must be >= 0, got {lr}")
    if sigma < 0.0:
        raise NumericError(f"sigma must be >= 0, got {sigma}")
    if v0.min() < 0.0 or v0.max() > 1.0:
        raise NumericError("training vector values must lie in [0, 1]")
    params = init_params(v0.size, key.hidden_count, rng)
    weights = params.weights
    scratch = np.empty_like(weights)
    visible_bias = params.visible_bias
    hidden_bias = params.hidden_bias
    cd1_weights = _kernel(_cd1_weights_fill)
    # Divergence is detected by the explicit finite check, so float overflow
    # on the way to an inf must not surface as a warning.
    with np.errstate(over="ignore", invalid="ignore"):
        for epoch in range(key.epochs):
            h0 = expit(weights @ v0 + hidden_bias)
            h0_sample = sample_binary(h0, rng)
            v1 = expit(weights.T @ h0_sample + visible_bias)
            h1 = expit(weights @ v1 + hidden_bias)
            cd1_weights(weights, h0, v0, h1, v1, lr, scratch)
            visible_bias = visible_bias + lr * (v0 - v1)
            hidden_bias = hidden_bias + lr * (h0 - h1)
            # scratch holds the CD-1 result; the disturbance writes back
            # into the weights buffer, so both buffers are reused every epoch
            weights = rng.scaled_normal_add(scratch, sigma, out=weights)
            if not (np.isfinite(weights).all()
                    and np.isfinite(visible_bias).all()
                    and np.isfinite(hidden_bias).all()):
                raise NumericError(f"training diverged at epoch {epoch}: "
                                   f"non-finite parameters")
    return RbmParams(weights, visible_bias, hidden_bias)


def training_draw_count(n: int, m: int, epochs: int) -> int:
    """PRNG draws consumed by :func:`train` for the given sizes."""
    per_epoch = m + 2 * ((m * n + 1) // 2)
    return m * n + epochs * per_epoch


def extract_row(params: RbmParams, j: int) -> np.ndarray:
    """Row j of the weight matrix, verbatim (a copy)."""
    if not 0 <= j < params.hidden_count:
        raise RowRangeError(
            f"row {j} out of range for {params.hidden_count} hidden units"
        )
    return params.weights[j].copy()


def dump_params(params: RbmParams) -> bytes:
    """Serialise to the little-endian debug blob (magic RBMP).

    Layout: magic, u32 visible count, u32 hidden count, then the weights
    row-major, visible biases, hidden biases, all float64.
    """
    head = struct.pack("<4sII", PARAMS_MAGIC, params.visible_count,
                       params.hidden_count)
    return (head
            + params.weights.astype("<f8").tobytes()
            + params.visible_bias.astype("<f8").tobytes()
            + params.hidden_bias.astype("<f8").tobytes())


def load_params(blob: bytes) -> RbmParams:
    """Parse a blob produced by :func:`dump_params`."""
    head_size = struct.calcsize("<4sII")
    if len(blob) < head_size:
        raise FormatError(f"params blob truncated at offset {len(blob)}: no header")
    magic, n, m = struct.unpack_from("<4sII", blob, 0)
    if magic != PARAMS_MAGIC:
        raise FormatError(f"bad params magic {magic!r} at offset 0")
    expected = head_size + 8 * (m * n + n + m)
    if len(blob) != expected:
        raise FormatError(
            f"params blob has {len(blob)} bytes, expected {expected} "
            f"for n={n}, m={m}"
        )
    floats = np.frombuffer(blob, dtype="<f8", offset=head_size)
    weights = floats[:m * n].reshape(m, n)
    visible_bias = floats[m * n:m * n + n]
    hidden_bias = floats[m * n + n:]
    return RbmParams(weights.copy(), visible_bias.copy(), hidden_bias.copy())
