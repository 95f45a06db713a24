"""Command-line front end.

Subcommands: encrypt, decrypt, keystream, eval, verify-oracles.  Every run
prints one `config:` line with all defaults expanded, so any output can be
reproduced from the log alone, and identical invocations write byte
identical files.  Errors leave a single-line diagnostic on stderr and a
nonzero exit status.

RBMSTREAM_THREADS caps the numerical thread pool (results are identical
for any value; the cap only bounds CPU use).
"""

from __future__ import annotations

import argparse
import contextlib
import os
import sys
from pathlib import Path

from .cipher import CipherEnvelope, decrypt, encrypt
from .errors import ModeError, RbmStreamError
from .image import RasterImage, read_netpbm, write_netpbm
from .keyrng import KeyConfig, SplitMix64
from .keystream import (MODE_KEY_DERIVED, MODE_PAPER_FAITHFUL, MODES,
                        generate_keystream, parse_sidecar, write_sidecar)
from .metrics import (DIRECTIONS, PAIR_SAMPLE_SEED, chi_square_uniform,
                      correlation, evaluate_encryption, histogram,
                      key_sensitivity, npcr, pairs_to_csv,
                      sample_adjacent_pairs, uaci)
from .oracles import run_identity_suite

THREADS_ENV = "RBMSTREAM_THREADS"


def _thread_cap():
    """Context manager applying the RBMSTREAM_THREADS limit, if any."""
    value = os.environ.get(THREADS_ENV)
    if not value:
        return contextlib.nullcontext()
    try:
        limit = max(1, int(value))
    except ValueError:
        raise ModeError(f"{THREADS_ENV} must be an integer, got {value!r}")
    try:
        from threadpoolctl import threadpool_limits
    except ImportError:
        return contextlib.nullcontext()
    return threadpool_limits(limits=limit)


def _add_key_args(parser: argparse.ArgumentParser, key_required: bool = True):
    parser.add_argument("--key", required=key_required,
                        default=None if key_required else "0.1234567890123456",
                        metavar="0.X...",
                        help="decimal cipher code in (0,1), up to 16 digits")
    parser.add_argument("--hidden-count", type=int, default=64,
                        help="hidden units m (default 64)")
    parser.add_argument("--epochs", type=int, default=100,
                        help="training iterations (default 100)")
    parser.add_argument("--lr", type=float, default=0.01,
                        help="CD-1 learning rate (default 0.01)")
    parser.add_argument("--sigma", type=float, default=0.01,
                        help="weight disturbance scale (default 0.01)")


def _key_from(args) -> KeyConfig:
    return KeyConfig(args.key, epochs=args.epochs, hidden_count=args.hidden_count)


def _print_config(args, skip=("func",)):
    fields = {k: v for k, v in sorted(vars(args).items()) if k not in skip}
    line = " ".join(f"{k.replace('_', '-')}={v}" for k, v in fields.items())
    print(f"config: {line}")


def _load_image_like(path: str) -> RasterImage:
    """Read a PGM/PPM plaintext or treat an RBMC payload as image bytes."""
    blob = Path(path).read_bytes()
    if blob[:4] == b"RBMC":
        env = CipherEnvelope.parse(blob)
        return RasterImage(env.width, env.height, env.channels, env.payload)
    return read_netpbm(blob)


def _cmd_encrypt(args) -> int:
    key = _key_from(args)
    if args.mode == MODE_PAPER_FAITHFUL and not args.sidecar:
        raise ModeError("paper-faithful encryption requires --sidecar PATH")
    img = read_netpbm(Path(args.infile).read_bytes())
    envelope, sidecar = encrypt(img, key, mode=args.mode,
                                start_row=args.start_row,
                                lr=args.lr, sigma=args.sigma)
    Path(args.outfile).write_bytes(envelope.serialize())
    if sidecar is not None:
        Path(args.sidecar).write_bytes(write_sidecar(sidecar))
        print(f"wrote {args.outfile} ({len(envelope.payload)} payload bytes) "
              f"and sidecar {args.sidecar}")
    else:
        print(f"wrote {args.outfile} ({len(envelope.payload)} payload bytes), "
              f"nonce=0x{envelope.nonce:016x}")
    return 0


def _cmd_decrypt(args) -> int:
    key = _key_from(args)
    envelope = CipherEnvelope.parse(Path(args.infile).read_bytes())
    if envelope.mode_name == MODE_PAPER_FAITHFUL and not args.sidecar:
        raise ModeError("this envelope is paper-faithful; pass --sidecar PATH")
    stream = None
    if args.sidecar:
        stream = parse_sidecar(Path(args.sidecar).read_bytes())
    img = decrypt(envelope, key, keystream=stream, lr=args.lr, sigma=args.sigma)
    Path(args.outfile).write_bytes(write_netpbm(img))
    print(f"wrote {args.outfile} ({img.width}x{img.height}, "
          f"{img.channels} channel{'s' if img.channels > 1 else ''})")
    return 0


def _cmd_keystream(args) -> int:
    key = _key_from(args)
    plaintext_vec = None
    if args.mode == MODE_PAPER_FAITHFUL:
        if not args.plaintext:
            raise ModeError("paper-faithful keystream requires --plaintext IMAGE")
        from .image import normalize
        plaintext_vec = normalize(read_netpbm(Path(args.plaintext).read_bytes()))
    stream = generate_keystream(key, args.nonce, args.n, args.length,
                                start_row=args.start_row, mode=args.mode,
                                plaintext_vec=plaintext_vec,
                                lr=args.lr, sigma=args.sigma)
    Path(args.outfile).write_bytes(stream.data)
    print(f"wrote {args.outfile}: {stream.length} bytes from rows "
          f"{stream.source_rows[0]}..{stream.source_rows[1]}")
    return 0


def _cmd_eval(args) -> int:
    if args.metric in ("npcr", "uaci"):
        if not (args.a and args.b):
            raise ModeError(f"eval {args.metric} requires --a and --b")
        img_a = _load_image_like(args.a)
        img_b = _load_image_like(args.b)
        value = npcr(img_a, img_b) if args.metric == "npcr" else uaci(img_a, img_b)
        print(f"{args.metric} = {value:.4f} %")
        return 0

    if not args.infile:
        raise ModeError(f"eval {args.metric} requires --in")
    img = _load_image_like(args.infile)

    if args.metric == "histogram":
        hist = histogram(img)
        print(f"chi-square = {chi_square_uniform(hist):.4f}")
        for value, count in enumerate(hist):
            print(f"{value},{count}")
        return 0

    if args.metric == "correlation":
        rng = SplitMix64(args.sample_seed)
        arr = img.to_array()
        plane = arr if arr.ndim == 2 else arr[:, :, 0]
        for direction in args.directions:
            pairs = sample_adjacent_pairs(plane, direction, args.pairs, rng)
            if args.pairs_csv:
                path = Path(args.pairs_csv) / f"pairs_{direction}.csv"
                path.parent.mkdir(parents=True, exist_ok=True)
                path.write_text(pairs_to_csv(pairs))
            print(f"correlation[{direction}] = {correlation(pairs):+.6f}")
        return 0

    key = _key_from(args)
    if args.metric == "key-sensitivity":
        report = key_sensitivity(img, key, delta_digits=args.delta_digits,
                                 pairs_per_direction=args.pairs,
                                 start_row=args.start_row,
                                 lr=args.lr, sigma=args.sigma,
                                 seed=args.sample_seed)
        print(f"delta = {report.delta} ({report.cipher_code} -> {report.altered_code})")
        print(f"npcr vs plaintext = {report.npcr_vs_plaintext:.4f} %")
        print(f"max |correlation| = {report.max_abs_correlation:.6f}")
        print(f"result: {'pass' if report.passed else 'FAIL'}")
        return 0 if report.passed else 1

    # full report
    report = evaluate_encryption(img, key, pairs_per_direction=args.pairs,
                                 delta_digits=args.delta_digits,
                                 start_row=args.start_row,
                                 lr=args.lr, sigma=args.sigma,
                                 seed=args.sample_seed)
    text = report.to_json()
    if args.outfile:
        Path(args.outfile).write_text(text + "\n")
        print(f"wrote {args.outfile}")
    else:
        print(text)
    return 0


def _cmd_verify_oracles(args) -> int:
    checks = run_identity_suite(instances=args.instances,
                                max_units=args.max_units, seed=args.seed)
    failures = 0
    for check in checks:
        status = "pass" if check.passed else "FAIL"
        print(f"{status}: {check.name} (worst error {check.worst_error:.3e}, "
              f"tolerance {check.tolerance:.0e})")
        failures += 0 if check.passed else 1
    return 0 if failures == 0 else 1


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="rbmstream",
        description="Keyed Boltzmann-machine keystreams and XOR image encryption",
    )
    sub = parser.add_subparsers(dest="subcommand", required=True)

    p_enc = sub.add_parser("encrypt", help="encrypt a PGM/PPM image")
    _add_key_args(p_enc)
    p_enc.add_argument("--in", dest="infile", required=True)
    p_enc.add_argument("--out", dest="outfile", required=True)
    p_enc.add_argument("--mode", choices=MODES, default=MODE_KEY_DERIVED)
    p_enc.add_argument("--start-row", type=int, default=0)
    p_enc.add_argument("--sidecar", help="keystream sidecar path (paper-faithful)")
    p_enc.set_defaults(func=_cmd_encrypt)

    p_dec = sub.add_parser("decrypt", help="decrypt an RBMC envelope")
    _add_key_args(p_dec)
    p_dec.add_argument("--in", dest="infile", required=True)
    p_dec.add_argument("--out", dest="outfile", required=True)
    p_dec.add_argument("--sidecar", help="RBMK sidecar (paper-faithful envelopes)")
    p_dec.set_defaults(func=_cmd_decrypt)

    p_ks = sub.add_parser("keystream", help="write raw keystream bytes")
    _add_key_args(p_ks)
    p_ks.add_argument("--out", dest="outfile", required=True)
    p_ks.add_argument("--nonce", type=lambda s: int(s, 0), default=0)
    p_ks.add_argument("--n", type=int, default=4096,
                      help="visible width / bytes per row (default 4096)")
    p_ks.add_argument("--length", type=int, required=True)
    p_ks.add_argument("--start-row", type=int, default=0)
    p_ks.add_argument("--mode", choices=MODES, default=MODE_KEY_DERIVED)
    p_ks.add_argument("--plaintext", help="PGM training image (paper-faithful)")
    p_ks.set_defaults(func=_cmd_keystream)

    p_eval = sub.add_parser("eval", help="security metrics and reports")
    p_eval.add_argument("metric", choices=("report", "npcr", "uaci",
                                           "correlation", "histogram",
                                           "key-sensitivity"))
    # key is only consulted by report/key-sensitivity, so it is optional here
    _add_key_args(p_eval, key_required=False)
    p_eval.add_argument("--in", dest="infile")
    p_eval.add_argument("--a")
    p_eval.add_argument("--b")
    p_eval.add_argument("--out", dest="outfile")
    p_eval.add_argument("--pairs", type=int, default=1000)
    p_eval.add_argument("--directions", nargs="+", choices=DIRECTIONS,
                        default=list(DIRECTIONS))
    p_eval.add_argument("--delta-digits", type=int, default=15)
    p_eval.add_argument("--start-row", type=int, default=0)
    p_eval.add_argument("--pairs-csv", help="directory for pair CSV exports")
    p_eval.add_argument("--sample-seed", type=lambda s: int(s, 0),
                        default=PAIR_SAMPLE_SEED)
    p_eval.set_defaults(func=_cmd_eval)

    p_ver = sub.add_parser("verify-oracles",
                           help="run the tiny-machine identity checks")
    p_ver.add_argument("--instances", type=int, default=100)
    p_ver.add_argument("--max-units", type=int, default=12)
    p_ver.add_argument("--seed", type=lambda s: int(s, 0), default=0x52424D53)
    p_ver.set_defaults(func=_cmd_verify_oracles)

    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    _print_config(args)
    try:
        with _thread_cap():
            return args.func(args)
    except RbmStreamError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
