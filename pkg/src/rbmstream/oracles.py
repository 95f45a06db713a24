"""Brute-force verification oracles for small machines.

Everything here enumerates all 2**(n+m) joint states, so it is exact (up to
float rounding) and deliberately independent of the analytic shortcuts in
:mod:`rbmstream.rbm`: the partition sum never uses the softplus identity,
and probabilities come straight from exponentiated energies.  The guard
n + m <= 20 keeps the enumeration at or below a million states.

These oracles back the `verify-oracles` CLI subcommand and the identity
tests: joint and marginal normalisation, the free-energy route equality,
and the exact log-likelihood gradient against finite differences.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.special import expit

from .errors import CapacityError, NumericError
from .keyrng import SplitMix64
from .rbm import RbmParams, free_energy

ENUMERATION_LIMIT = 20

# Route-equality tolerance between the enumerated marginal and the
# free-energy form; identities hold exactly in exact arithmetic.
ROUTE_RTOL = 1e-10


def _guard_size(params: RbmParams):
    total = params.visible_count + params.hidden_count
    if total > ENUMERATION_LIMIT:
        raise CapacityError(
            f"enumeration needs n + m <= {ENUMERATION_LIMIT}, got {total}"
        )


def binary_states(count: int) -> np.ndarray:
    """All 2**count binary vectors as a (2**count, count) float64 array.

    Row index k encodes k in binary, least significant bit in column 0.
    """
    ks = np.arange(2**count, dtype=np.uint64)[:, None]
    bits = (ks >> np.arange(count, dtype=np.uint64)[None, :]) & np.uint64(1)
    return bits.astype(np.float64)


def _joint_unnormalised(params: RbmParams) -> np.ndarray:
    """exp(-E(v, h)) for every joint state, shape (2**n, 2**m)."""
    vs = binary_states(params.visible_count)
    hs = binary_states(params.hidden_count)
    cross = (vs @ params.weights.T) @ hs.T
    neg_energy = cross + (vs @ params.visible_bias)[:, None] \
        + (hs @ params.hidden_bias)[None, :]
    return np.exp(neg_energy)


def oracle_partition(params: RbmParams) -> float:
    """Exact partition sum Z over all joint binary states."""
    _guard_size(params)
    return float(_joint_unnormalised(params).sum())


def oracle_prob_v(params: RbmParams, v: np.ndarray) -> float:
    """Marginal p(v) = (sum_h e^-E(v,h)) / Z by enumeration over h.

    Also cross-checks the result against the free-energy route
    e^-F(v) / Z and raises NumericError if the two disagree beyond
    ROUTE_RTOL relative, since that equality is an identity.
    """
    _guard_size(params)
    v = np.asarray(v, dtype=np.float64)
    hs = binary_states(params.hidden_count)
    neg_energy = hs @ (params.weights @ v + params.hidden_bias) \
        + float(params.visible_bias @ v)
    numer = float(np.exp(neg_energy).sum())
    z = oracle_partition(params)
    p = numer / z
    via_free_energy = math.exp(-free_energy(params, v)) / z
    if abs(p - via_free_energy) > ROUTE_RTOL * abs(p):
        raise NumericError(
            f"free-energy route disagrees with enumeration: {via_free_energy!r} "
            f"vs {p!r}"
        )
    return p


def log_prob_v(params: RbmParams, v: np.ndarray) -> float:
    """ln p(v) through the enumeration route (used by finite differences)."""
    return math.log(oracle_prob_v(params, v))


@dataclass
class Gradient:
    """Log-likelihood gradient, shaped like the parameters it differentiates."""

    weights: np.ndarray
    visible_bias: np.ndarray
    hidden_bias: np.ndarray


def oracle_loglik_grad(params: RbmParams, v: np.ndarray) -> Gradient:
    """Exact gradient of ln p(v): data expectation minus model expectation.

    The data side conditions on the clamped v (hidden expectation is the
    sigmoid of the pre-activation); the model side is the full enumeration
    average of the same statistics.
    """
    _guard_size(params)
    v = np.asarray(v, dtype=np.float64)
    joint = _joint_unnormalised(params)
    z = joint.sum()
    p_joint = joint / z

    vs = binary_states(params.visible_count)
    hs = binary_states(params.hidden_count)
    model_w = hs.T @ (p_joint.T @ vs)          # E_model[h_j v_i], shape (m, n)
    model_v = p_joint.sum(axis=1) @ vs         # E_model[v_i]
    model_h = p_joint.sum(axis=0) @ hs         # E_model[h_j]

    h_given_v = expit(params.weights @ v + params.hidden_bias)
    return Gradient(
        weights=np.outer(h_given_v, v) - model_w,
        visible_bias=v - model_v,
        hidden_bias=h_given_v - model_h,
    )


@dataclass
class IdentityCheck:
    """Outcome of one oracle identity over a batch of random machines."""

    name: str
    worst_error: float
    tolerance: float

    @property
    def passed(self) -> bool:
        return self.worst_error <= self.tolerance


def _random_tiny_rbm(rng: SplitMix64, max_units: int) -> tuple[RbmParams, np.ndarray]:
    """A random machine with n + m <= max_units and a random binary v."""
    n = 1 + int(rng.next_unit() * (max_units - 2))
    m = 1 + int(rng.next_unit() * (max_units - n - 1))
    weights = (2.0 * rng.unit_array(m * n) - 1.0).reshape(m, n)
    visible_bias = 2.0 * rng.unit_array(n) - 1.0
    hidden_bias = 2.0 * rng.unit_array(m) - 1.0
    v = (rng.unit_array(n) < 0.5).astype(np.float64)
    return RbmParams(weights, visible_bias, hidden_bias), v


def finite_difference_grad(params: RbmParams, v: np.ndarray,
                           step: float = 1e-5) -> Gradient:
    """Central finite differences of ln p(v) over every parameter."""
    def fd(getter):
        arr = getter(params)
        grad = np.zeros_like(arr)
        flat = arr.reshape(-1)
        gflat = grad.reshape(-1)
        for idx in range(flat.size):
            original = flat[idx]
            flat[idx] = original + step
            hi = log_prob_v(params, v)
            flat[idx] = original - step
            lo = log_prob_v(params, v)
            flat[idx] = original
            gflat[idx] = (hi - lo) / (2.0 * step)
        return grad

    return Gradient(
        weights=fd(lambda p: p.weights),
        visible_bias=fd(lambda p: p.visible_bias),
        hidden_bias=fd(lambda p: p.hidden_bias),
    )


def run_identity_suite(instances: int = 100, max_units: int = 12,
                       seed: int = 0x52424D53,
                       grad_instances: int | None = None) -> list[IdentityCheck]:
    """Check the probabilistic identities on a batch of random tiny machines.

    Returns one IdentityCheck per identity with the worst error seen across
    the batch.  grad_instances limits how many machines get the (per
    parameter) finite-difference sweep; None means all of them.
    """
    if grad_instances is None:
        grad_instances = instances
    rng = SplitMix64(seed)
    worst_joint = worst_marginal = worst_route = worst_grad = 0.0
    for index in range(instances):
        params, v = _random_tiny_rbm(rng, max_units)
        joint = _joint_unnormalised(params)
        z = float(joint.sum())
        worst_joint = max(worst_joint, abs(float((joint / z).sum()) - 1.0))

        marginal = joint.sum(axis=1) / z
        worst_marginal = max(worst_marginal, abs(float(marginal.sum()) - 1.0))

        # Free-energy route over every visible vector, vectorised.
        vs = binary_states(params.visible_count)
        pre = vs @ params.weights.T + params.hidden_bias
        softplus = np.maximum(pre, 0.0) + np.log1p(np.exp(-np.abs(pre)))
        neg_free = vs @ params.visible_bias + softplus.sum(axis=1)
        route = np.exp(neg_free) / z
        worst_route = max(
            worst_route, float(np.abs(route / marginal - 1.0).max())
        )
        oracle_prob_v(params, v)  # exercises the op's built-in route assert

        if index < grad_instances:
            exact = oracle_loglik_grad(params, v)
            approx = finite_difference_grad(params, v)
            gap = max(
                float(np.abs(exact.weights - approx.weights).max()),
                float(np.abs(exact.visible_bias - approx.visible_bias).max()),
                float(np.abs(exact.hidden_bias - approx.hidden_bias).max()),
            )
            worst_grad = max(worst_grad, gap)

    return [
        IdentityCheck("joint normalisation sum p(v,h) = 1", worst_joint, 1e-10),
        IdentityCheck("marginal normalisation sum p(v) = 1", worst_marginal, 1e-10),
        IdentityCheck("enumerated marginal = free-energy route", worst_route, ROUTE_RTOL),
        IdentityCheck("log-likelihood gradient vs finite differences", worst_grad, 1e-5),
    ]
