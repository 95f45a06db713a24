"""Raster images and binary netpbm (PGM/PPM) parsing.

Images are byte buffers: row-major, channel-interleaved, 8 bits per
sample.  Only the binary netpbm flavours with maxval 255 are accepted
(P5 gray, P6 RGB); that is lossless, trivially seekable, and keeps the
ciphertext framing free of compression concerns.  Header comments are
tolerated on read and never produced on write, so write(read(x)) is
canonical rather than byte-preserving, while read(write(img)) == img
always holds.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ChannelError, DimensionError, FormatError

_WHITESPACE = b" \t\r\n\x0b\x0c"


@dataclass(frozen=True)
class RasterImage:
    """Pixel buffer with geometry; channels is 1 (gray) or 3 (RGB)."""

    width: int
    height: int
    channels: int
    pixels: bytes

    def __post_init__(self):
        if self.width < 1 or self.height < 1:
            raise DimensionError(
                f"image must be at least 1x1, got {self.width}x{self.height}"
            )
        if self.channels not in (1, 3):
            raise ChannelError(f"channels must be 1 or 3, got {self.channels}")
        expected = self.width * self.height * self.channels
        if len(self.pixels) != expected:
            raise DimensionError(
                f"pixel buffer has {len(self.pixels)} bytes, expected {expected}"
            )

    @property
    def byte_count(self) -> int:
        return len(self.pixels)

    def to_array(self) -> np.ndarray:
        """(H, W) or (H, W, 3) uint8 view of the pixel data."""
        arr = np.frombuffer(self.pixels, dtype=np.uint8)
        if self.channels == 1:
            return arr.reshape(self.height, self.width)
        return arr.reshape(self.height, self.width, self.channels)

    @classmethod
    def from_array(cls, arr: np.ndarray) -> "RasterImage":
        arr = np.asarray(arr)
        if arr.dtype != np.uint8:
            raise FormatError(f"pixel array must be uint8, got {arr.dtype}")
        if arr.ndim == 2:
            h, w = arr.shape
            return cls(w, h, 1, arr.tobytes())
        if arr.ndim == 3 and arr.shape[2] == 3:
            h, w, _ = arr.shape
            return cls(w, h, 3, arr.tobytes())
        raise DimensionError(f"pixel array must be HxW or HxWx3, got {arr.shape}")


class _HeaderScanner:
    """Tracks a byte offset through a netpbm header, skipping comments."""

    def __init__(self, data: bytes):
        self.data = data
        self.pos = 0

    def fail(self, message: str):
        raise FormatError(f"{message} at offset {self.pos}")

    def skip_separators(self):
        while self.pos < len(self.data):
            byte = self.data[self.pos:self.pos + 1]
            if byte in (b"#",):
                newline = self.data.find(b"\n", self.pos)
                if newline < 0:
                    self.fail("unterminated header comment")
                self.pos = newline + 1
            elif byte and byte in _WHITESPACE:
                self.pos += 1
            else:
                return

    def read_token(self) -> bytes:
        self.skip_separators()
        start = self.pos
        while self.pos < len(self.data) and \
                self.data[self.pos:self.pos + 1] not in _WHITESPACE:
            self.pos += 1
        if self.pos == start:
            self.fail("missing header token")
        return self.data[start:self.pos]

    def read_int(self, what: str) -> int:
        token = self.read_token()
        if not token.isdigit():
            raise FormatError(
                f"{what} must be decimal digits, got {token!r} "
                f"at offset {self.pos - len(token)}"
            )
        return int(token)


def read_netpbm(data: bytes) -> RasterImage:
    """Parse binary PGM (P5) or PPM (P6) bytes with maxval 255."""
    if len(data) < 2:
        raise FormatError("input shorter than a netpbm magic at offset 0")
    magic = data[:2]
    if magic == b"P5":
        channels = 1
    elif magic == b"P6":
        channels = 3
    else:
        raise FormatError(f"unsupported netpbm magic {magic!r} at offset 0")

    if len(data) < 3 or (data[2:3] not in _WHITESPACE and data[2:3] != b"#"):
        raise FormatError("expected whitespace after the magic at offset 2")
    scanner = _HeaderScanner(data)
    scanner.pos = 2
    width = scanner.read_int("width")
    height = scanner.read_int("height")
    maxval = scanner.read_int("maxval")
    if maxval != 255:
        raise FormatError(f"maxval must be 255, got {maxval} at offset {scanner.pos}")
    if scanner.pos >= len(data) or data[scanner.pos:scanner.pos + 1] not in _WHITESPACE:
        scanner.fail("expected single whitespace byte after maxval")
    scanner.pos += 1

    expected = width * height * channels
    payload = data[scanner.pos:scanner.pos + expected]
    if len(payload) != expected:
        raise FormatError(
            f"pixel payload truncated: expected {expected} bytes, found "
            f"{len(payload)} at offset {scanner.pos}"
        )
    return RasterImage(width, height, channels, payload)


def write_netpbm(img: RasterImage) -> bytes:
    """Serialise to canonical binary netpbm (never emits comments)."""
    magic = b"P5" if img.channels == 1 else b"P6"
    header = magic + b"\n" + f"{img.width} {img.height}\n255\n".encode("ascii")
    return header + img.pixels


def normalize(img: RasterImage) -> np.ndarray:
    """Pixels scaled into [0, 255/256] as a flat float64 vector (divide by 256)."""
    return np.frombuffer(img.pixels, dtype=np.uint8).astype(np.float64) / 256.0


def split_channels(img: RasterImage) -> tuple[RasterImage, RasterImage, RasterImage]:
    """Separate an RGB image into its three gray channel images."""
    if img.channels != 3:
        raise ChannelError(f"split_channels requires 3 channels, got {img.channels}")
    arr = img.to_array()
    return tuple(RasterImage.from_array(arr[:, :, c].copy()) for c in range(3))


def merge_channels(red: RasterImage, green: RasterImage,
                   blue: RasterImage) -> RasterImage:
    """Interleave three gray channel images back into one RGB image."""
    for name, channel in (("red", red), ("green", green), ("blue", blue)):
        if channel.channels != 1:
            raise ChannelError(f"{name} channel must be gray, has {channel.channels}")
        if (channel.width, channel.height) != (red.width, red.height):
            raise ChannelError(
                f"{name} channel is {channel.width}x{channel.height}, "
                f"expected {red.width}x{red.height}"
            )
    stacked = np.stack([c.to_array() for c in (red, green, blue)], axis=2)
    return RasterImage.from_array(stacked)
