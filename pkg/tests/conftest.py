import pytest

from rbmstream import KeyConfig, RasterImage

from tests.helpers import DEFAULT_CODE, smooth_gray, smooth_rgb


@pytest.fixture(scope="session")
def default_key() -> KeyConfig:
    return KeyConfig(DEFAULT_CODE)


@pytest.fixture(scope="session")
def quick_key() -> KeyConfig:
    """Small config for tests whose property does not depend on model size."""
    return KeyConfig(DEFAULT_CODE, epochs=10, hidden_count=16)


@pytest.fixture(scope="session")
def gray_16() -> RasterImage:
    return smooth_gray(16, 16)


@pytest.fixture(scope="session")
def gray_64() -> RasterImage:
    return smooth_gray(64, 64)


@pytest.fixture(scope="session")
def gray_128() -> RasterImage:
    return smooth_gray(128, 128)


@pytest.fixture(scope="session")
def rgb_16() -> RasterImage:
    return smooth_rgb(16, 16)
