import math

import numpy as np
import pytest
from scipy.special import expit

from rbmstream import KeyConfig, derive_master_seed
from rbmstream.errors import (CapacityError, DimensionError, FormatError,
                              ModeError, NumericError)
from rbmstream.keystream import (MODE_KEY_DERIVED, MODE_PAPER_FAITHFUL,
                                 generate_keystream, parse_sidecar, quantize,
                                 rows_needed, write_sidecar)
from rbmstream.rbm import extract_row, train


def ref_quantize(w):
    """Reference in scalar arithmetic: low byte of floor(sigmoid(w) * 2**16)."""
    p = 1.0 / (1.0 + math.exp(-w))
    p = min(p, 1.0 - 2.0**-17)
    return math.floor(p * 65536) % 256


# --- quantizer -----------------------------------------------------------------

def test_quantize_frozen_examples():
    out = quantize(np.array([0.0, 1.0, 100.0, -1.0]))
    assert out.dtype == np.uint8
    assert list(out) == [0, 38, 255, 217]


def test_quantize_matches_scalar_reference():
    ws = np.linspace(-30, 30, 4001)
    got = quantize(ws)
    expected = [ref_quantize(w) for w in ws]
    assert list(got) == expected


def test_quantize_clamp_prevents_wraparound():
    # Saturated sigmoid must land on 255, never wrap to 0.
    assert list(quantize(np.array([50.0, 500.0, 5000.0]))) == [255, 255, 255]


def test_quantize_rejects_non_finite():
    with pytest.raises(NumericError):
        quantize(np.array([0.0, np.inf]))
    with pytest.raises(NumericError):
        quantize(np.array([np.nan]))


def test_quantize_of_sigmoid_midpoint():
    # sigmoid(0) = 0.5 exactly: 0.5 * 65536 = 32768, low byte 0.
    assert quantize(np.array([0.0]))[0] == 0
    assert ref_quantize(0.0) == 0


# --- row arithmetic --------------------------------------------------------------

def test_rows_needed():
    assert rows_needed(1, 10) == 1
    assert rows_needed(10, 10) == 1
    assert rows_needed(11, 10) == 2
    assert rows_needed(30, 10) == 3


# --- generation -----------------------------------------------------------------

def test_keystream_deterministic(quick_key):
    a = generate_keystream(quick_key, 5, 32, 100)
    b = generate_keystream(quick_key, 5, 32, 100)
    assert a.data == b.data
    assert a.source_rows == b.source_rows == (0, 3)


def test_keystream_single_row_equals_quantized_first_row(quick_key):
    stream = generate_keystream(quick_key, 9, 24, 24)
    rng = derive_master_seed(quick_key, 9)
    training = rng.unit_array(24)
    params = train(quick_key, training, rng)
    assert stream.data == quantize(extract_row(params, 0)).tobytes()
    assert stream.source_rows == (0, 0)


def test_keystream_truncation_consistency(quick_key):
    short = generate_keystream(quick_key, 2, 16, 40)
    longer = generate_keystream(quick_key, 2, 16, 40 + 16)
    assert longer.data[:40] == short.data


def test_keystream_start_row_offsets(quick_key):
    full = generate_keystream(quick_key, 4, 16, 32, start_row=0)
    offset = generate_keystream(quick_key, 4, 16, 16, start_row=1)
    assert offset.data == full.data[16:]
    assert offset.source_rows == (1, 1)


def test_keystream_capacity_error_names_remedy():
    key = KeyConfig("0.5", epochs=2, hidden_count=4)
    with pytest.raises(CapacityError, match="hidden_count"):
        generate_keystream(key, 0, 8, 8 * 4 + 1)
    with pytest.raises(CapacityError):
        generate_keystream(key, 0, 8, 8, start_row=4)


def test_keystream_mode_validation(quick_key):
    with pytest.raises(ModeError):
        generate_keystream(quick_key, 0, 8, 8, mode="nonsense")
    with pytest.raises(ModeError):
        generate_keystream(quick_key, 0, 8, 8, mode=MODE_PAPER_FAITHFUL)
    with pytest.raises(DimensionError):
        generate_keystream(quick_key, 0, 8, 8, mode=MODE_PAPER_FAITHFUL,
                           plaintext_vec=np.full(9, 0.5))
    with pytest.raises(DimensionError):
        generate_keystream(quick_key, 0, 8, 0)


def test_mode_separation_on_nonconstant_plaintext(quick_key):
    # Regression, not a theorem: the two modes must not collide on the
    # same key/nonce.
    plaintext = np.linspace(0.0, 0.9, 64)
    faithful = generate_keystream(quick_key, 1, 64, 64,
                                  mode=MODE_PAPER_FAITHFUL,
                                  plaintext_vec=plaintext)
    derived = generate_keystream(quick_key, 1, 64, 64, mode=MODE_KEY_DERIVED)
    assert faithful.data != derived.data


def test_keystreams_under_adjacent_nonces_are_independent():
    # Fraction of equal bytes between streams from nonce and nonce + 1 at
    # the default key is the random-collision rate 1/256 within +-0.005.
    key = KeyConfig("0.1234567890123456")
    a = np.frombuffer(generate_keystream(key, 100, 1024, 65536).data, np.uint8)
    b = np.frombuffer(generate_keystream(key, 101, 1024, 65536).data, np.uint8)
    fraction = float((a == b).mean())
    assert abs(fraction - 1.0 / 256.0) <= 0.005


def test_keystream_byte_histogram_roughly_uniform(quick_key):
    # Smoke-level uniformity; the full chi-square gate runs in acceptance.
    stream = generate_keystream(quick_key, 3, 256, 256 * 16)
    counts = np.bincount(np.frombuffer(stream.data, np.uint8), minlength=256)
    assert counts.max() < 16 * 4  # no byte appears wildly too often


# --- sidecar frame ----------------------------------------------------------------

def test_sidecar_round_trip():
    payload = bytes(range(256))
    blob = write_sidecar(payload)
    assert blob[:4] == b"RBMK"
    assert parse_sidecar(blob) == payload


def test_sidecar_errors():
    with pytest.raises(FormatError):
        parse_sidecar(b"RB")
    with pytest.raises(FormatError):
        parse_sidecar(b"XXXX\x00\x00\x00\x00")
    good = write_sidecar(b"abc")
    with pytest.raises(FormatError):
        parse_sidecar(good + b"extra")
    with pytest.raises(FormatError):
        parse_sidecar(good[:-1])
