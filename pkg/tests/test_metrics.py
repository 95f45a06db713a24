import json

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from rbmstream import KeyConfig, RasterImage, SplitMix64
from rbmstream.errors import (DegenerateVarianceError, DimensionError,
                              EmptyInputError, GeometryError)
from rbmstream.keyrng import GOLDEN_GAMMA, MASK64
from rbmstream.metrics import (DIRECTIONS, PixelPair, chi_square_uniform,
                               correlation, direction_correlations,
                               evaluate_encryption, histogram,
                               key_sensitivity, npcr, pairs_to_csv,
                               sample_adjacent_pairs, uaci)
from tests.helpers import smooth_gray


def image_from_values(values):
    arr = np.asarray(values, dtype=np.uint8)
    return RasterImage.from_array(arr)


# --- histogram -----------------------------------------------------------------

def test_histogram_all_zero_image():
    hist = histogram(image_from_values(np.zeros((4, 4))))
    assert hist[0] == 16
    assert hist[1:].sum() == 0


def test_histogram_counts_every_value_once():
    arr = np.arange(256, dtype=np.uint8).reshape(16, 16)
    hist = histogram(image_from_values(arr))
    assert np.all(hist == 1)


def test_histogram_sums_to_pixel_count():
    rng = SplitMix64(1)
    arr = (rng.u64_array(6 * 7 * 3) & np.uint64(0xFF)).astype(np.uint8)
    img = RasterImage(6, 7, 3, arr.tobytes())
    assert histogram(img).sum() == 6 * 7 * 3


def test_histogram_invariant_under_permutation():
    rng = SplitMix64(2)
    arr = (rng.u64_array(64) & np.uint64(0xFF)).astype(np.uint8)
    shuffled = arr[np.argsort(rng.unit_array(64))]
    a = histogram(image_from_values(arr.reshape(8, 8)))
    b = histogram(image_from_values(shuffled.reshape(8, 8)))
    assert np.array_equal(a, b)


# --- chi-square -----------------------------------------------------------------

def test_chi_square_uniform_is_zero():
    assert chi_square_uniform(np.full(256, 10)) == 0.0


def test_chi_square_single_bin_hand_value():
    hist = np.zeros(256)
    hist[7] = 256
    # one bin holds all 256 samples: 255^2 + 255 = 65280
    assert chi_square_uniform(hist) == 65280.0


def test_chi_square_nonnegative():
    rng = SplitMix64(3)
    for _ in range(20):
        hist = np.floor(rng.unit_array(256) * 50)
        if hist.sum() == 0:
            continue
        assert chi_square_uniform(hist) >= 0.0


def test_chi_square_empty_histogram():
    with pytest.raises(EmptyInputError):
        chi_square_uniform(np.zeros(256))


# --- pair sampling ----------------------------------------------------------------

def test_sample_pairs_count_and_bounds():
    img = smooth_gray(20, 10)
    rng = SplitMix64(4)
    for direction, (dr, dc) in (("horizontal", (0, 1)), ("vertical", (1, 0)),
                                ("diagonal", (1, 1))):
        pairs = sample_adjacent_pairs(img, direction, 50, rng)
        assert len(pairs) == 50
        arr = img.to_array()
        for p in pairs:
            assert 0 <= p.row < 10 - dr
            assert 0 <= p.col < 20 - dc
            assert p.x == arr[p.row, p.col]
            assert p.y == arr[p.row + dr, p.col + dc]
            assert p.direction == direction


def test_sample_pairs_deterministic_and_draw_count():
    img = smooth_gray(8, 8)
    a = sample_adjacent_pairs(img, "horizontal", 25, SplitMix64(5))
    b = sample_adjacent_pairs(img, "horizontal", 25, SplitMix64(5))
    assert a == b
    rng = SplitMix64(5)
    before = rng.state
    sample_adjacent_pairs(img, "horizontal", 25, rng)
    assert rng.state == (before + 50 * GOLDEN_GAMMA) & MASK64


def test_sample_pairs_geometry_and_argument_errors():
    tiny = image_from_values(np.zeros((1, 1)))
    with pytest.raises(GeometryError):
        sample_adjacent_pairs(tiny, "horizontal", 10, SplitMix64(6))
    img = smooth_gray(4, 4)
    with pytest.raises(EmptyInputError):
        sample_adjacent_pairs(img, "horizontal", 1, SplitMix64(6))
    with pytest.raises(EmptyInputError):
        sample_adjacent_pairs(img, "sideways", 10, SplitMix64(6))


def test_pairs_csv_format():
    pairs = [PixelPair(1, 2, 0, 3, "horizontal"), PixelPair(9, 8, 7, 6, "vertical")]
    text = pairs_to_csv(pairs)
    assert text.splitlines()[0] == "x,y,row,col,direction"
    assert text.splitlines()[1] == "1,2,0,3,horizontal"
    assert text.endswith("\n")


# --- correlation ------------------------------------------------------------------

def pairs_from_xy(xs, ys):
    return [PixelPair(int(x), int(y), 0, i, "horizontal")
            for i, (x, y) in enumerate(zip(xs, ys))]


def test_correlation_identity_line():
    xs = list(range(10))
    assert correlation(pairs_from_xy(xs, xs)) == pytest.approx(1.0)


def test_correlation_reflected_line():
    xs = list(range(10))
    ys = [255 - x for x in xs]
    assert correlation(pairs_from_xy(xs, ys)) == pytest.approx(-1.0)


def test_correlation_hand_zero_case():
    # E(x)=1, E(y)=1/3; covariance terms cancel exactly.
    assert correlation(pairs_from_xy([0, 1, 2], [0, 1, 0])) == pytest.approx(0.0)


def test_correlation_population_divisor():
    # For N=2 the population forms give r = +-1 for any two distinct points.
    assert correlation(pairs_from_xy([0, 1], [5, 9])) == pytest.approx(1.0)


def test_correlation_degenerate_variance():
    with pytest.raises(DegenerateVarianceError):
        correlation(pairs_from_xy([5, 5, 5], [1, 2, 3]))
    with pytest.raises(EmptyInputError):
        correlation(pairs_from_xy([1], [2]))


def test_correlation_swap_symmetry_and_affine_invariance():
    rng = SplitMix64(7)
    xs = (rng.unit_array(100) * 255).astype(int)
    ys = (rng.unit_array(100) * 255).astype(int)
    r = correlation(pairs_from_xy(xs, ys))
    assert correlation(pairs_from_xy(ys, xs)) == pytest.approx(r)
    r_affine = correlation(pairs_from_xy(2 * xs + 3, 2 * ys + 3))
    assert r_affine == pytest.approx(r)
    r_flipped = correlation(pairs_from_xy(-2 * xs + 3, 2 * ys + 3))
    assert r_flipped == pytest.approx(-r)


@settings(max_examples=50, deadline=None)
@given(st.lists(st.tuples(st.integers(0, 255), st.integers(0, 255)),
                min_size=2, max_size=60))
def test_correlation_bounded(points):
    xs = [p[0] for p in points]
    ys = [p[1] for p in points]
    if len(set(xs)) < 2 or len(set(ys)) < 2:
        return
    assert abs(correlation(pairs_from_xy(xs, ys))) <= 1.0 + 1e-12


# --- NPCR / UACI -------------------------------------------------------------------

def test_npcr_trivials():
    a = image_from_values(np.zeros((2, 2)))
    assert npcr(a, a) == 0.0
    b = image_from_values([[0, 0], [0, 1]])
    assert npcr(a, b) == 25.0
    c = image_from_values(np.full((2, 2), 9))
    assert npcr(a, c) == 100.0


def test_uaci_trivials():
    a = image_from_values(np.zeros((4, 4)))
    assert uaci(a, a) == 0.0
    b = image_from_values(np.full((4, 4), 255))
    assert uaci(a, b) == pytest.approx(100.0)
    c = image_from_values(np.full((4, 4), 51))
    assert uaci(a, c) == pytest.approx(20.0)


def test_npcr_uaci_symmetric_and_bounded():
    rng = SplitMix64(8)
    a = image_from_values((rng.u64_array(64) & np.uint64(0xFF))
                          .astype(np.uint8).reshape(8, 8))
    b = image_from_values((rng.u64_array(64) & np.uint64(0xFF))
                          .astype(np.uint8).reshape(8, 8))
    assert npcr(a, b) == npcr(b, a)
    assert uaci(a, b) == uaci(b, a)
    assert 0.0 <= npcr(a, b) <= 100.0
    assert 0.0 <= uaci(a, b) <= 100.0


def test_npcr_dimension_mismatch():
    a = image_from_values(np.zeros((2, 2)))
    b = image_from_values(np.zeros((2, 3)))
    with pytest.raises(DimensionError):
        npcr(a, b)
    with pytest.raises(DimensionError):
        uaci(a, b)


def test_npcr_color_counts_channels():
    base = np.zeros((2, 2, 3), dtype=np.uint8)
    changed = base.copy()
    changed[0, 0, 1] = 7  # one channel sample out of 12
    assert npcr(image_from_values(base), image_from_values(changed)) == \
        pytest.approx(100.0 / 12.0)


# --- key sensitivity ------------------------------------------------------------------

SENS_KEY = KeyConfig("0.1234567890123456", epochs=40, hidden_count=16)


def test_key_sensitivity_zero_delta_recovers():
    report = key_sensitivity(smooth_gray(16, 16), SENS_KEY, delta_digits=0)
    assert report.npcr_vs_plaintext == 0.0
    assert report.passed
    assert report.delta == "0"
    assert report.cipher_code == report.altered_code == SENS_KEY.cipher_code


def test_key_sensitivity_small_delta_destroys():
    report = key_sensitivity(smooth_gray(32, 32), SENS_KEY, delta_digits=15,
                             pairs_per_direction=400)
    assert report.npcr_vs_plaintext >= 99.0
    assert report.max_abs_correlation <= 0.1
    assert report.passed
    assert report.delta == "1e-15"
    assert report.altered_code != report.cipher_code


# --- aggregate report ------------------------------------------------------------------

def test_evaluate_encryption_report(tmp_path):
    img = smooth_gray(32, 32)
    report = evaluate_encryption(img, SENS_KEY, pairs_per_direction=300,
                                 delta_digits=15)
    assert sum(report.histogram) == 32 * 32
    assert report.chi_square >= 0.0
    assert set(report.correlations) == set(DIRECTIONS)
    assert all(abs(r) <= 1.0 + 1e-12 for r in report.correlations.values())
    assert 0.0 <= report.npcr_percent <= 100.0
    assert 0.0 <= report.uaci_percent <= 100.0
    assert report.npcr_percent >= 99.0
    assert report.sensitivity["passed"]

    parsed = json.loads(report.to_json())
    assert parsed["npcr_percent"] == report.npcr_percent
    assert len(parsed["histogram"]) == 256


def test_direction_correlations_on_natural_image():
    corrs = direction_correlations(smooth_gray(64, 64), 500)
    assert corrs["horizontal"] >= 0.8
