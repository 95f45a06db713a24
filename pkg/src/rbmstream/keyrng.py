"""Key schedule and deterministic random source.

The secret key is a decimal cipher code X in (0, 1) carried as a string so
that its 16-digit precision is exact and "nudge the last digit" experiments
are well defined.  X, together with a per-message nonce, seeds a SplitMix64
generator; every stochastic draw anywhere in the pipeline comes from that
generator, which is what makes encryption and decryption replay the exact
same float sequence.

SplitMix64 was picked because it is fully specified by three constants and
two mixing multiplies, is invertible, and reproduces bit-for-bit anywhere.
"""

from __future__ import annotations

import re
from dataclasses import dataclass

import numpy as np

from .errors import DimensionError, KeyFormatError

MASK64 = (1 << 64) - 1

# SplitMix64 state increment (golden ratio) and finalizer multipliers.
GOLDEN_GAMMA = 0x9E3779B97F4A7C15
MIX_MULT_1 = 0xBF58476D1CE4E5B9
MIX_MULT_2 = 0x94D049BB133111EB

_TWO_PI = 6.283185307179586
_UNIT_SCALE = 2.0**-53

# Decimal precision of the cipher code: X is resolved to d = round(X * 10**16).
PRECISION_EXPONENT = 16
PRECISION_MODULUS = 10**PRECISION_EXPONENT

_CODE_RE = re.compile(r"^0\.([0-9]{1,16})$")


def mix64(z: int) -> int:
    """SplitMix64 finalizer: avalanche a 64-bit value (shifts 30/27/31)."""
    z &= MASK64
    z = ((z ^ (z >> 30)) * MIX_MULT_1) & MASK64
    z = ((z ^ (z >> 27)) * MIX_MULT_2) & MASK64
    return z ^ (z >> 31)


def _mix64_array(z: np.ndarray) -> np.ndarray:
    """Vectorised finalizer; mutates the (caller-owned) uint64 buffer in place."""
    z ^= z >> np.uint64(30)
    z *= np.uint64(MIX_MULT_1)
    z ^= z >> np.uint64(27)
    z *= np.uint64(MIX_MULT_2)
    z ^= z >> np.uint64(31)
    return z


def step_state(state: int) -> int:
    """One state-update step (a bijection on 64-bit integers)."""
    return (state + GOLDEN_GAMMA) & MASK64


def unstep_state(state: int) -> int:
    """Inverse of :func:`step_state`."""
    return (state - GOLDEN_GAMMA) & MASK64


def _normal_fill(state, count, out):
    """Box-Muller over consecutive generator outputs, one pair per two normals.

    Pair k consumes draws 2k and 2k+1 after `state`; out[2k] takes the cos
    branch and out[2k+1] the sin branch.  Compiled with numba at first use
    (training disturbs every weight every epoch, so this is the hot loop);
    the integer path is bit-identical to the numpy bulk draws.
    """
    pairs = (count + 1) // 2
    for k in range(pairs):
        z1 = state + np.uint64(2 * k + 1) * np.uint64(GOLDEN_GAMMA)
        z1 ^= z1 >> np.uint64(30)
        z1 = z1 * np.uint64(MIX_MULT_1)
        z1 ^= z1 >> np.uint64(27)
        z1 = z1 * np.uint64(MIX_MULT_2)
        z1 ^= z1 >> np.uint64(31)
        z2 = state + np.uint64(2 * k + 2) * np.uint64(GOLDEN_GAMMA)
        z2 ^= z2 >> np.uint64(30)
        z2 = z2 * np.uint64(MIX_MULT_1)
        z2 ^= z2 >> np.uint64(27)
        z2 = z2 * np.uint64(MIX_MULT_2)
        z2 ^= z2 >> np.uint64(31)
        u1 = np.float64(z1 >> np.uint64(11)) * _UNIT_SCALE
        u2 = np.float64(z2 >> np.uint64(11)) * _UNIT_SCALE
        radius = np.sqrt(-2.0 * np.log1p(-u1))
        angle = _TWO_PI * u2
        out[2 * k] = radius * np.cos(angle)
        if 2 * k + 1 < count:
            out[2 * k + 1] = radius * np.sin(angle)


def _scaled_normal_add_fill(state, count, scale, base, out):
    """out[i] = base[i] + scale * g_i with the same normals as _normal_fill.

    Keep the Box-Muller body in lockstep with _normal_fill: the two kernels
    must consume identical draw sequences and produce identical g values so
    the fused path is bit-equal to `base + scale * normal_array(count)`.
    """
    pairs = (count + 1) // 2
    for k in range(pairs):
        z1 = state + np.uint64(2 * k + 1) * np.uint64(GOLDEN_GAMMA)
        z1 ^= z1 >> np.uint64(30)
        z1 = z1 * np.uint64(MIX_MULT_1)
        z1 ^= z1 >> np.uint64(27)
        z1 = z1 * np.uint64(MIX_MULT_2)
        z1 ^= z1 >> np.uint64(31)
        z2 = state + np.uint64(2 * k + 2) * np.uint64(GOLDEN_GAMMA)
        z2 ^= z2 >> np.uint64(30)
        z2 = z2 * np.uint64(MIX_MULT_1)
        z2 ^= z2 >> np.uint64(27)
        z2 = z2 * np.uint64(MIX_MULT_2)
        z2 ^= z2 >> np.uint64(31)
        u1 = np.float64(z1 >> np.uint64(11)) * _UNIT_SCALE
        u2 = np.float64(z2 >> np.uint64(11)) * _UNIT_SCALE
        radius = np.sqrt(-2.0 * np.log1p(-u1))
        angle = _TWO_PI * u2
        out[2 * k] = base[2 * k] + scale * (radius * np.cos(angle))
        if 2 * k + 1 < count:
            out[2 * k + 1] = base[2 * k + 1] + scale * (radius * np.sin(angle))


_compiled_kernels = {}


def _kernel(fill_function):
    compiled = _compiled_kernels.get(fill_function)
    if compiled is None:
        from numba import njit

        compiled = njit(cache=True)(fill_function)
        _compiled_kernels[fill_function] = compiled
    return compiled


@dataclass(frozen=True)
class KeyConfig:
    """The secret key: cipher code X plus the training-size parameters.

    cipher_code must spell a decimal in the open interval (0, 1) with at
    most 16 fractional digits, at least one of them nonzero.  epochs and
    hidden_count are part of the key material (they change the keystream).
    """

    cipher_code: str
    epochs: int = 100
    hidden_count: int = 64
    precision_exponent: int = PRECISION_EXPONENT

    def __post_init__(self):
        if self.precision_exponent != PRECISION_EXPONENT:
            raise KeyFormatError(
                f"precision_exponent is fixed at {PRECISION_EXPONENT}, "
                f"got {self.precision_exponent}"
            )
        if not isinstance(self.cipher_code, str) or not _CODE_RE.match(self.cipher_code):
            raise KeyFormatError(
                f"cipher code must match 0.d1..dk with 1 <= k <= 16 digits, "
                f"got {self.cipher_code!r}"
            )
        if self.seed_digits == 0:
            raise KeyFormatError("cipher code must have at least one nonzero digit")
        if self.epochs < 1:
            raise KeyFormatError(f"epochs must be >= 1, got {self.epochs}")
        if self.hidden_count < 1:
            raise KeyFormatError(f"hidden_count must be >= 1, got {self.hidden_count}")

    @property
    def seed_digits(self) -> int:
        """d = round(X * 10**16), i.e. the fractional digits as an integer."""
        frac = _CODE_RE.match(self.cipher_code).group(1)
        return int(frac.ljust(PRECISION_EXPONENT, "0"))

    def shifted(self, delta_digits: int) -> "KeyConfig":
        """Return the key with X increased by 10**-delta_digits.

        The addition is done on the decimal representation, so the result is
        exact.  Raises KeyFormatError if the shifted code leaves (0, 1) or
        delta_digits is outside 1..16.
        """
        if not 1 <= delta_digits <= PRECISION_EXPONENT:
            raise KeyFormatError(
                f"delta_digits must be in 1..{PRECISION_EXPONENT}, got {delta_digits}"
            )
        d = self.seed_digits + 10 ** (PRECISION_EXPONENT - delta_digits)
        if d >= PRECISION_MODULUS:
            raise KeyFormatError(
                f"shifting {self.cipher_code} by 1e-{delta_digits} leaves (0, 1)"
            )
        code = "0." + str(d).zfill(PRECISION_EXPONENT)
        return KeyConfig(code, self.epochs, self.hidden_count)


class SplitMix64:
    """Deterministic 64-bit generator; the single random source of the package.

    State advances by GOLDEN_GAMMA per draw, so the state after k draws is
    state + k * GOLDEN_GAMMA (mod 2**64).  Bulk draws exploit that closed
    form and produce exactly the same sequence as repeated scalar calls,
    which the test suite checks.

    One generator must have a single owner.  For parallel work, never share
    state: derive one generator per lane by XORing the master seed with a
    fixed per-lane constant, e.g. SplitMix64(master.state ^ lane_tag).
    """

    __slots__ = ("state",)

    def __init__(self, state: int):
        self.state = state & MASK64

    def clone(self) -> "SplitMix64":
        return SplitMix64(self.state)

    def next_u64(self) -> int:
        self.state = (self.state + GOLDEN_GAMMA) & MASK64
        return mix64(self.state)

    def next_unit(self) -> float:
        """Next float64 in [0, 1), from the high 53 bits of the next u64."""
        return (self.next_u64() >> 11) * 2.0**-53

    def u64_array(self, count: int) -> np.ndarray:
        """The next `count` outputs as a uint64 array (consumes `count` draws)."""
        if count < 0:
            raise DimensionError(f"draw count must be >= 0, got {count}")
        states = np.arange(1, count + 1, dtype=np.uint64)
        states *= np.uint64(GOLDEN_GAMMA)
        states += np.uint64(self.state)
        self.state = (self.state + count * GOLDEN_GAMMA) & MASK64
        return _mix64_array(states)

    def unit_array(self, count: int) -> np.ndarray:
        """The next `count` floats in [0, 1) (consumes `count` draws)."""
        raw = self.u64_array(count)
        return (raw >> np.uint64(11)).astype(np.float64) * 2.0**-53

    def normal_array(self, count: int) -> np.ndarray:
        """`count` standard normals via Box-Muller on consecutive unit pairs.

        Pair k is draws (2k, 2k+1); outputs 2k and 2k+1 are the cos and sin
        branches of that pair.  Consumes exactly 2 * ceil(count / 2) draws.
        The radius uses log1p(-u) so a drawn 0.0 cannot produce an infinity.
        """
        if count < 0:
            raise DimensionError(f"draw count must be >= 0, got {count}")
        out = np.empty(count, dtype=np.float64)
        _kernel(_normal_fill)(np.uint64(self.state), count, out)
        pairs = (count + 1) // 2
        self.state = (self.state + 2 * pairs * GOLDEN_GAMMA) & MASK64
        return out

    def scaled_normal_add(self, base: np.ndarray, scale: float,
                          out: np.ndarray | None = None) -> np.ndarray:
        """base + scale * normal_array(len(base)) in one fused pass.

        Bit-identical to the unfused expression; consumes the same
        2 * ceil(len(base) / 2) draws.  Exists because disturbing every
        weight every epoch is the training hot loop; `out` lets that loop
        reuse a buffer (must not alias `base`).
        """
        base = np.ascontiguousarray(base, dtype=np.float64)
        count = base.size
        if out is None:
            out = np.empty(base.shape, dtype=np.float64)
        elif out.shape != base.shape or out.dtype != np.float64:
            raise DimensionError(
                f"out buffer must be float64 with shape {base.shape}, got "
                f"{out.dtype} {out.shape}"
            )
        _kernel(_scaled_normal_add_fill)(np.uint64(self.state), count,
                                         float(scale), base.reshape(-1),
                                         out.reshape(-1))
        pairs = (count + 1) // 2
        self.state = (self.state + 2 * pairs * GOLDEN_GAMMA) & MASK64
        return out

    def __repr__(self):
        return f"SplitMix64(state=0x{self.state:016X})"


def derive_master_seed(key: KeyConfig, nonce: int = 0) -> SplitMix64:
    """Map (cipher code, nonce) to the generator that drives the pipeline.

    The decimal code is shifted to the integer d = round(X * 10**16), the
    nonce is folded in multiplicatively by the golden-ratio constant for
    domain separation, and the result is avalanched once.
    """
    d = key.seed_digits
    folded = d ^ ((nonce * GOLDEN_GAMMA) & MASK64)
    return SplitMix64(mix64(folded))
