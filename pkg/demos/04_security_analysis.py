"""The statistical battery: histogram, correlation, NPCR/UACI, sensitivity.

Reproduces the standard image-encryption evaluation on a desk-scale image:
ciphertext bytes should be uniform (flat histogram, small chi-square),
neighbouring ciphertext pixels uncorrelated, a one-pixel plaintext change
should flip ~99.6% of ciphertext bytes, and a key off by 1e-15 should
decrypt to pure noise.
"""

import numpy as np

from rbmstream import (KeyConfig, RasterImage, chi_square_uniform,
                       direction_correlations, encrypt, evaluate_encryption,
                       histogram, key_sensitivity, npcr, uaci)

key = KeyConfig("0.1234567890123456", epochs=60, hidden_count=32)

yy, xx = np.mgrid[0:64, 0:64].astype(np.float64)
plain = RasterImage.from_array(
    np.clip(110 + 60 * np.sin(xx / 17.0) + 45 * np.cos(yy / 23.0) + 0.25 * xx,
            0, 255).astype(np.uint8))

envelope, _ = encrypt(plain, key)
cipher = RasterImage(64, 64, 1, envelope.payload)

print("histogram / uniformity")
print(f"  plaintext chi-square : {chi_square_uniform(histogram(plain)):10.1f}")
print(f"  ciphertext chi-square: {chi_square_uniform(histogram(cipher)):10.1f}"
      f"   (~255 is noise-like)")

print("\nadjacent-pixel correlation (1000 sampled pairs per direction)")
plain_r = direction_correlations(plain, 1000)
cipher_r = direction_correlations(cipher, 1000)
for direction in plain_r:
    print(f"  {direction:10s}: plaintext {plain_r[direction]:+.4f}   "
          f"ciphertext {cipher_r[direction]:+.4f}")

print("\ndifferential attack (one plaintext pixel bumped by 1)")
bumped = bytearray(plain.pixels)
bumped[0] = (bumped[0] + 1) % 256
envelope2, _ = encrypt(RasterImage(64, 64, 1, bytes(bumped)), key)
cipher2 = RasterImage(64, 64, 1, envelope2.payload)
print(f"  NPCR: {npcr(cipher, cipher2):.4f}%   (99.6% is ideal)")
print(f"  UACI: {uaci(cipher, cipher2):.4f}%   (33.46% is ideal)")

print("\nkey sensitivity (decrypt with X + 1e-15)")
sens = key_sensitivity(plain, key, delta_digits=15)
print(f"  {sens.cipher_code} -> {sens.altered_code}")
print(f"  NPCR vs plaintext: {sens.npcr_vs_plaintext:.4f}%")
print(f"  max |correlation|: {sens.max_abs_correlation:.4f}")
print(f"  verdict: {'pass' if sens.passed else 'FAIL'}")

print("\nfull JSON report (evaluate_encryption) keys:")
report = evaluate_encryption(plain, key, pairs_per_direction=600)
print(" ", ", ".join(sorted(report.__dict__)))
