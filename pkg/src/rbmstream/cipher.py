"""XOR image encryption with a framed, self-describing ciphertext.

The ciphertext envelope (magic RBMC) records everything a key holder needs
to regenerate the keystream: mode, start row, hidden count, epochs, the
per-message nonce and the image geometry.  The payload is the plaintext
pixel buffer XORed byte-for-byte with the keystream, so decryption is the
same operation run again.

Key-derived mode hashes the plaintext into the nonce (FNV-1a 64).  That
binds the stream to the message: flip one plaintext pixel and the whole
keystream changes, which is where the differential-attack numbers come
from, while the receiver still only needs the key plus the header.  FNV is
a mixing device here, not a security primitive.

Paper-faithful mode instead trains on the normalized plaintext itself
(nonce 0), reproducing the original experimental pipeline; the stream then
depends on data the receiver does not have, so encrypt hands back the
keystream for an RBMK sidecar and decrypt requires it.
"""

from __future__ import annotations

import struct
from dataclasses import dataclass

import numpy as np

from .errors import CapacityError, FormatError, ModeError
from .image import RasterImage, normalize, split_channels
from .keyrng import KeyConfig
from .keystream import (MODE_KEY_DERIVED, MODE_PAPER_FAITHFUL, MODES,
                        generate_keystream)
from .rbm import DEFAULT_DISTURBANCE_SIGMA, DEFAULT_LEARNING_RATE

ENVELOPE_MAGIC = b"RBMC"
ENVELOPE_VERSION = 1
_HEADER = struct.Struct("<4sBBHIIQIIB")

FNV_OFFSET = 0xCBF29CE484222325
FNV_PRIME = 0x100000001B3
_MASK64 = (1 << 64) - 1

_MODE_CODES = {MODE_KEY_DERIVED: 0, MODE_PAPER_FAITHFUL: 1}
_MODE_NAMES = {code: name for name, code in _MODE_CODES.items()}


def fnv1a64(data: bytes) -> int:
    """FNV-1a 64-bit hash (used as the plaintext-bound nonce)."""
    acc = FNV_OFFSET
    for byte in data:
        acc = ((acc ^ byte) * FNV_PRIME) & _MASK64
    return acc


@dataclass(frozen=True)
class CipherEnvelope:
    """Framed ciphertext: header fields plus the XORed payload."""

    mode: int
    start_row: int
    hidden_count: int
    epochs: int
    nonce: int
    width: int
    height: int
    channels: int
    payload: bytes

    def __post_init__(self):
        if self.mode not in _MODE_NAMES:
            raise FormatError(f"envelope mode must be 0 or 1, got {self.mode}")
        ranges = (("start_row", self.start_row, 1 << 16),
                  ("hidden_count", self.hidden_count, 1 << 32),
                  ("epochs", self.epochs, 1 << 32),
                  ("nonce", self.nonce, 1 << 64),
                  ("width", self.width, 1 << 32),
                  ("height", self.height, 1 << 32),
                  ("channels", self.channels, 1 << 8))
        for name, value, bound in ranges:
            if not 0 <= value < bound:
                raise FormatError(f"{name} {value} does not fit its header field")
        expected = self.width * self.height * self.channels
        if len(self.payload) != expected:
            raise FormatError(
                f"payload has {len(self.payload)} bytes, header implies {expected}"
            )

    @property
    def mode_name(self) -> str:
        return _MODE_NAMES[self.mode]

    def serialize(self) -> bytes:
        head = _HEADER.pack(ENVELOPE_MAGIC, ENVELOPE_VERSION, self.mode,
                            self.start_row, self.hidden_count, self.epochs,
                            self.nonce, self.width, self.height, self.channels)
        return head + self.payload

    @classmethod
    def parse(cls, blob: bytes) -> "CipherEnvelope":
        if len(blob) < _HEADER.size:
            raise FormatError(f"envelope truncated at offset {len(blob)}: no header")
        magic, version, mode, start_row, hidden_count, epochs, nonce, \
            width, height, channels = _HEADER.unpack_from(blob, 0)
        if magic != ENVELOPE_MAGIC:
            raise FormatError(f"bad envelope magic {magic!r} at offset 0")
        if version != ENVELOPE_VERSION:
            raise FormatError(f"unsupported envelope version {version} at offset 4")
        payload = blob[_HEADER.size:]
        expected = width * height * channels
        if len(payload) != expected:
            raise FormatError(
                f"envelope payload has {len(payload)} bytes, header implies "
                f"{expected} at offset {_HEADER.size}"
            )
        return cls(mode, start_row, hidden_count, epochs, nonce,
                   width, height, channels, payload)


def _xor(a: bytes, b: bytes) -> bytes:
    return np.bitwise_xor(np.frombuffer(a, dtype=np.uint8),
                          np.frombuffer(b, dtype=np.uint8)).tobytes()


def _keystream_for_image(img_geometry: tuple[int, int, int], key: KeyConfig,
                         nonce: int, start_row: int, lr: float, sigma: float,
                         training_channels: list[np.ndarray] | None) -> bytes:
    """Build the full-buffer keystream for an image.

    The visible layer is one pixel position wide (n = W*H).  Key-derived
    mode (training_channels None) pulls W*H*C bytes from consecutive rows of
    a single machine.  Paper-faithful mode trains one machine per channel on
    that channel's normalized plaintext, takes row start_row + c from each,
    and interleaves the per-channel streams to match the pixel layout.
    """
    width, height, channels = img_geometry
    n = width * height
    if training_channels is None:
        stream = generate_keystream(key, nonce, n, n * channels, start_row,
                                    MODE_KEY_DERIVED, lr=lr, sigma=sigma)
        return stream.data
    per_channel = []
    for c, training in enumerate(training_channels):
        stream = generate_keystream(key, nonce, n, n, start_row + c,
                                    MODE_PAPER_FAITHFUL, plaintext_vec=training,
                                    lr=lr, sigma=sigma)
        per_channel.append(np.frombuffer(stream.data, dtype=np.uint8))
    interleaved = np.stack(per_channel, axis=1).reshape(-1)
    return interleaved.tobytes()


def encrypt(img: RasterImage, key: KeyConfig, mode: str = MODE_KEY_DERIVED,
            start_row: int = 0, lr: float = DEFAULT_LEARNING_RATE,
            sigma: float = DEFAULT_DISTURBANCE_SIGMA
            ) -> tuple[CipherEnvelope, bytes | None]:
    """Encrypt an image; returns the envelope and, in paper-faithful mode,
    the raw keystream bytes the receiver will need (frame them with
    :func:`rbmstream.keystream.write_sidecar` for storage)."""
    if mode not in MODES:
        raise ModeError(f"unknown mode {mode!r}; expected one of {MODES}")
    geometry = (img.width, img.height, img.channels)
    if mode == MODE_KEY_DERIVED:
        nonce = fnv1a64(img.pixels)
        stream = _keystream_for_image(geometry, key, nonce, start_row,
                                      lr, sigma, None)
        sidecar = None
    else:
        nonce = 0
        if img.channels == 1:
            training = [normalize(img)]
        else:
            training = [normalize(ch) for ch in split_channels(img)]
        stream = _keystream_for_image(geometry, key, nonce, start_row,
                                      lr, sigma, training)
        sidecar = stream
    envelope = CipherEnvelope(
        mode=_MODE_CODES[mode], start_row=start_row,
        hidden_count=key.hidden_count, epochs=key.epochs, nonce=nonce,
        width=img.width, height=img.height, channels=img.channels,
        payload=_xor(img.pixels, stream),
    )
    return envelope, sidecar


def decrypt(env: CipherEnvelope, key: KeyConfig,
            keystream: bytes | None = None,
            lr: float = DEFAULT_LEARNING_RATE,
            sigma: float = DEFAULT_DISTURBANCE_SIGMA) -> RasterImage:
    """Invert :func:`encrypt`.

    Key-derived envelopes are decrypted by regenerating the stream from
    (key, header); paper-faithful envelopes need the keystream bytes saved
    at encryption time.  Non-default lr/sigma must be passed again, they are
    deliberately not recorded in the header.
    """
    if env.hidden_count != key.hidden_count or env.epochs != key.epochs:
        raise CapacityError(
            f"envelope was made with hidden_count={env.hidden_count}, "
            f"epochs={env.epochs}; key config says {key.hidden_count}, {key.epochs}"
        )
    if env.mode_name == MODE_PAPER_FAITHFUL:
        if keystream is None:
            raise ModeError("paper-faithful envelopes require the keystream sidecar")
        if len(keystream) != len(env.payload):
            raise FormatError(
                f"sidecar keystream has {len(keystream)} bytes, payload has "
                f"{len(env.payload)}"
            )
        stream = keystream
    else:
        geometry = (env.width, env.height, env.channels)
        stream = _keystream_for_image(geometry, key, env.nonce, env.start_row,
                                      lr, sigma, None)
    return RasterImage(env.width, env.height, env.channels,
                       _xor(env.payload, stream))
