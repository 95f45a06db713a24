"""Shared fixtures-in-spirit: synthetic images and the canonical test key."""

import numpy as np

from rbmstream import RasterImage, SplitMix64

DEFAULT_CODE = "0.1234567890123456"


def smooth_gray(width: int, height: int) -> RasterImage:
    """Deterministic synthetic photo-like image (smooth => correlated pixels)."""
    yy, xx = np.mgrid[0:height, 0:width].astype(np.float64)
    values = (110.0 + 60.0 * np.sin(xx / 17.0) + 45.0 * np.cos(yy / 23.0)
              + 0.25 * xx + 12.0 * np.sin((xx + yy) / 31.0))
    return RasterImage.from_array(np.clip(values, 0, 255).astype(np.uint8))


def smooth_rgb(width: int, height: int) -> RasterImage:
    yy, xx = np.mgrid[0:height, 0:width].astype(np.float64)
    r = np.clip(120 + 70 * np.sin(xx / 13.0) + 0.3 * yy, 0, 255)
    g = np.clip(100 + 60 * np.cos(yy / 19.0) + 0.2 * xx, 0, 255)
    b = np.clip(90 + 50 * np.sin((xx + yy) / 29.0), 0, 255)
    return RasterImage.from_array(np.stack([r, g, b], axis=2).astype(np.uint8))


def random_image(seed: int, width: int, height: int, channels: int) -> RasterImage:
    rng = SplitMix64(seed)
    raw = rng.u64_array(width * height * channels) & np.uint64(0xFF)
    return RasterImage(width, height, channels, raw.astype(np.uint8).tobytes())
