"""Keyed keystream generation from a trained Boltzmann machine.

A decimal cipher code seeds a deterministic generator; that generator
initialises, trains and disturbs a small RBM; the disturbed weight rows are
quantized into byte keystreams; the keystream XOR-encrypts raster images.
The metrics module reproduces the usual statistical security battery
(histogram/chi-square, adjacent-pixel correlation, NPCR/UACI, key
sensitivity) and the oracles module brute-force checks the probabilistic
identities behind the model on small instances.
"""

from .cipher import CipherEnvelope, decrypt, encrypt, fnv1a64
from .errors import (CapacityError, ChannelError, DegenerateVarianceError,
                     DimensionError, EmptyInputError, FormatError,
                     GeometryError, KeyFormatError, ModeError, NumericError,
                     RbmStreamError, RowRangeError)
from .image import (RasterImage, merge_channels, normalize, read_netpbm,
                    split_channels, write_netpbm)
from .keyrng import KeyConfig, SplitMix64, derive_master_seed, mix64
from .keystream import (MODE_KEY_DERIVED, MODE_PAPER_FAITHFUL, Keystream,
                        generate_keystream, parse_sidecar, quantize,
                        write_sidecar)
from .metrics import (EvalReport, PixelPair, SensitivityReport, correlation,
                      chi_square_uniform, direction_correlations,
                      evaluate_encryption, histogram, key_sensitivity, npcr,
                      pairs_to_csv, sample_adjacent_pairs, uaci)
from .oracles import (Gradient, IdentityCheck, oracle_loglik_grad,
                      oracle_partition, oracle_prob_v, run_identity_suite)
from .rbm import (RbmParams, cd1_update, dump_params, energy, extract_row,
                  free_energy, hidden_probs, init_params, load_params,
                  perturb_weights, sample_binary, train, visible_probs)

__version__ = "0.1.0"

__all__ = [name for name in dir() if not name.startswith("_")]
