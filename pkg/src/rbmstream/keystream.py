"""Turn trained weight rows into byte keystreams.

A weight row is a float64 vector; XOR needs bytes.  The quantizer squashes
each weight through the sigmoid, scales to 16 bits and keeps only the low
byte: the high byte carries the (predictable) coarse shape of the sigmoid,
the low byte carries the high-entropy fractional structure.  A clamp just
below 1.0 stops a saturated weight from wrapping to byte 0.

Streams longer than one row concatenate consecutive rows; asking for more
rows than the machine has is a capacity error (raise hidden_count).

Two generation modes exist because training on the plaintext itself (the
original experimental setup) produces a stream the receiver cannot
regenerate from the key alone:

* key-derived: the training vector is drawn from the keyed generator, so
  knowing (key, nonce) is enough to rebuild the stream.
* paper-faithful: the caller supplies the normalized plaintext as the
  training vector and must ship the resulting stream alongside the
  ciphertext (see the RBMK sidecar frame).
"""

from __future__ import annotations

import struct
from dataclasses import dataclass

import numpy as np
from scipy.special import expit

from .errors import (CapacityError, DimensionError, FormatError, ModeError,
                     NumericError)
from .keyrng import KeyConfig, SplitMix64, derive_master_seed
from .rbm import (DEFAULT_DISTURBANCE_SIGMA, DEFAULT_LEARNING_RATE,
                  extract_row, train)

MODE_KEY_DERIVED = "key-derived"
MODE_PAPER_FAITHFUL = "paper-faithful"
MODES = (MODE_KEY_DERIVED, MODE_PAPER_FAITHFUL)

SIDECAR_MAGIC = b"RBMK"

# Quantizer scale and the clamp that keeps sigmoid(huge) below 1.0.
_QUANT_SCALE = 1 << 16
_CLAMP = 1.0 - 2.0**-17


@dataclass(frozen=True)
class Keystream:
    """A generated byte stream and the weight rows it came from."""

    data: bytes
    source_rows: tuple[int, int]

    @property
    def length(self) -> int:
        return len(self.data)


def quantize(ws: np.ndarray) -> np.ndarray:
    """Map float64 weights to bytes: low byte of floor(sigmoid(w) * 2**16).

    sigmoid values are clamped to 1 - 2**-17 first so the scaled value
    stays below 2**16 and a saturated weight maps to byte 255, not 0.
    """
    ws = np.asarray(ws, dtype=np.float64)
    if not np.isfinite(ws).all():
        raise NumericError("quantize requires finite weights")
    p = np.minimum(expit(ws), _CLAMP)
    scaled = np.floor(p * _QUANT_SCALE).astype(np.uint32)
    return (scaled & np.uint32(0xFF)).astype(np.uint8)


def rows_needed(length: int, n: int) -> int:
    """How many n-wide rows cover `length` bytes."""
    return -(-length // n)


def generate_keystream(key: KeyConfig, nonce: int, n: int, length: int,
                       start_row: int = 0, mode: str = MODE_KEY_DERIVED,
                       plaintext_vec: np.ndarray | None = None,
                       lr: float = DEFAULT_LEARNING_RATE,
                       sigma: float = DEFAULT_DISTURBANCE_SIGMA) -> Keystream:
    """End-to-end stream generation: seed, train, extract, quantize, truncate.

    n is the visible-layer width (bytes per row); length is the requested
    byte count.  In paper-faithful mode plaintext_vec (length n, values in
    [0, 1]) is the training vector; in key-derived mode the training vector
    is n unit draws taken from the generator before training starts.
    """
    if length < 1:
        raise DimensionError(f"keystream length must be >= 1, got {length}")
    if n < 1:
        raise DimensionError(f"row width must be >= 1, got {n}")
    if start_row < 0:
        raise CapacityError(f"start_row must be >= 0, got {start_row}")
    if mode not in MODES:
        raise ModeError(f"unknown mode {mode!r}; expected one of {MODES}")
    required = rows_needed(length, n)
    if start_row + required > key.hidden_count:
        raise CapacityError(
            f"need rows {start_row}..{start_row + required - 1} but the key "
            f"configures only {key.hidden_count} hidden units; raise "
            f"hidden_count to at least {start_row + required}"
        )

    rng = derive_master_seed(key, nonce)
    if mode == MODE_PAPER_FAITHFUL:
        if plaintext_vec is None:
            raise ModeError("paper-faithful mode requires the plaintext vector")
        training = np.asarray(plaintext_vec, dtype=np.float64)
        if training.shape != (n,):
            raise DimensionError(
                f"plaintext vector must have length {n}, got shape {training.shape}"
            )
    else:
        training = rng.unit_array(n)

    params = train(key, training, rng, lr=lr, sigma=sigma)
    chunks = [quantize(extract_row(params, start_row + k)) for k in range(required)]
    data = np.concatenate(chunks)[:length].tobytes()
    return Keystream(data=data, source_rows=(start_row, start_row + required - 1))


def write_sidecar(stream: bytes) -> bytes:
    """Frame keystream bytes as an RBMK sidecar blob."""
    return struct.pack("<4sI", SIDECAR_MAGIC, len(stream)) + stream


def parse_sidecar(blob: bytes) -> bytes:
    """Extract the keystream bytes from an RBMK sidecar blob."""
    head_size = struct.calcsize("<4sI")
    if len(blob) < head_size:
        raise FormatError(f"sidecar truncated at offset {len(blob)}: no header")
    magic, length = struct.unpack_from("<4sI", blob, 0)
    if magic != SIDECAR_MAGIC:
        raise FormatError(f"bad sidecar magic {magic!r} at offset 0")
    if len(blob) != head_size + length:
        raise FormatError(
            f"sidecar declares {length} bytes but carries {len(blob) - head_size}"
        )
    return blob[head_size:]
