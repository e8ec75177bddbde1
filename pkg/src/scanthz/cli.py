"""``scanthz`` command line: phantom | sense | recover | bench | convert.

Exit codes: 0 success, 1 I/O failure, 2 usage or validation error,
3 numerical failure inside a solver.
"""

from __future__ import annotations

import argparse
import json
import math
import sys
from pathlib import Path

from . import io as cimio
from .acquisition import acquire_scan, add_awgn, compression_ratio_scan, m_for_cr
from .bench import (
    SOLVERS,
    BenchConfig,
    format_table,
    load_config,
    make_sensing,
    records_to_csv,
    run_benchmark,
    summarize,
    summary_to_csv,
)
from .baselines import IstaOptions, solve_ista_columnwise
from .bsbl import SolveOptions, solve_bmmv
from .core import snr_db
from .errors import FormatError, NumericalFailure, ScanThzError
from .phantoms import BUILTIN_NAMES, builtin_spec, gen_phantom

EXIT_OK, EXIT_IO, EXIT_USAGE, EXIT_NUMERIC = 0, 1, 2, 3


class UsageError(Exception):
    pass


def _csv_list(conv):
    def parse(text):
        try:
            return tuple(conv(v) for v in text.split(",") if v.strip())
        except ValueError as exc:
            raise argparse.ArgumentTypeError(str(exc)) from exc

    return parse


def _common():
    p = argparse.ArgumentParser(add_help=False)
    p.add_argument("--seed", type=int, default=0, help="RNG seed (default 0)")
    p.add_argument("--format", choices=cimio.FORMATS, default="cim", help="output image format")
    return p


def build_parser():
    common = _common()
    parser = argparse.ArgumentParser(prog="scanthz", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("phantom", parents=[common], help="write a synthetic phantom image")
    src = p.add_mutually_exclusive_group()
    src.add_argument("--name", default="s0", help=f"built-in phantom ({', '.join(BUILTIN_NAMES)})")
    src.add_argument("--config", help="TOML file with a [phantom] section")
    p.add_argument("--size", type=int, default=64)
    p.add_argument("--blur", type=float, default=None, help="Gaussian blur sigma in pixels")
    p.add_argument("--out", required=True)

    p = sub.add_parser("sense", parents=[common], help="simulate scan acquisition of an image")
    p.add_argument("--image", required=True)
    p.add_argument("--matrix", choices=("gaussian", "bernoulli"), default="gaussian")
    p.add_argument("--k", type=int, default=5, help="ones per column for bernoulli masks")
    p.add_argument("--cr", type=float, default=0.5, help="compression ratio (N - M) / N")
    p.add_argument("--noise-snr", type=float, default=None, help="add complex AWGN at this SNR (dB)")
    p.add_argument("--out", required=True, help="measurement matrix path")
    p.add_argument("--phi-out", help="sensing matrix path (default: <out stem>.phi.<ext>)")

    p = sub.add_parser("recover", parents=[common], help="reconstruct an image from measurements")
    p.add_argument("--y", required=True)
    p.add_argument("--phi", required=True)
    p.add_argument("--solver", choices=("bsbl", "ista"), default="bsbl")
    p.add_argument("--block", type=int, default=4)
    p.add_argument("--eta", type=float, default=1e-4)
    p.add_argument("--beta-scale", type=float, default=0.01)
    p.add_argument("--max-iter", type=int, default=None)
    p.add_argument("--add-only", action="store_true")
    p.add_argument("--transform", choices=("none", "dft"), default="none")
    p.add_argument("--truth", help="ground-truth image; adds snr_db to the report")
    p.add_argument("--out", required=True, help="estimate path")
    p.add_argument("--report", help="JSON report path (default: <out stem>.json)")

    p = sub.add_parser("bench", parents=[common], help="run the multi-trial benchmark")
    p.add_argument("--config", help="TOML config; inline flags override its values")
    p.add_argument("--trials", type=int)
    p.add_argument("--size", type=_csv_list(int), help="comma-separated image sizes")
    p.add_argument("--cr", type=_csv_list(float), help="comma-separated compression ratios")
    p.add_argument("--matrix", type=_csv_list(str), help="gaussian and/or bernoulli-<k>")
    p.add_argument("--solver", type=_csv_list(str), help=f"comma-separated from {', '.join(SOLVERS)}")
    p.add_argument("--phantom", help=f"built-in phantom ({', '.join(BUILTIN_NAMES)})")
    p.add_argument("--block", type=int)
    p.add_argument("--workers", type=int)
    p.add_argument("--out", required=True, help="record CSV path")
    p.add_argument("--summary", help="summary CSV path (default: <out stem>.summary.csv)")

    p = sub.add_parser("convert", parents=[common], help="convert between CIM1 and CSV")
    p.add_argument("--in", dest="src", required=True)
    p.add_argument("--out", required=True)
    return parser


def _sibling(path, suffix):
    path = Path(path)
    return path.with_name(path.stem + suffix)


def cmd_phantom(args):
    if args.config:
        from .bench import phantom_from_table, tomllib

        try:
            doc = tomllib.loads(Path(args.config).read_text())
        except tomllib.TOMLDecodeError as exc:
            raise FormatError(f"{args.config}: {exc}") from exc
        if "phantom" not in doc:
            raise FormatError(f"{args.config}: missing [phantom] section")
        spec = phantom_from_table(doc["phantom"])
    else:
        if args.name not in BUILTIN_NAMES:
            raise UsageError(f"unknown phantom {args.name!r}; valid specs: {', '.join(BUILTIN_NAMES)}")
        spec = builtin_spec(args.name, args.size)
    if args.blur is not None:
        from dataclasses import replace

        spec = replace(spec, blur_sigma=args.blur)
    img = gen_phantom(spec, args.seed)
    cimio.write_image(args.out, img, args.format)
    print(f"wrote {spec.name} phantom {img.shape[0]}x{img.shape[1]} to {args.out}")


def cmd_sense(args):
    x = cimio.read_image(args.image)
    n = x.shape[0]
    if not 0.0 <= args.cr < 1.0:
        raise UsageError(f"--cr must lie in [0, 1), got {args.cr}")
    m = m_for_cr(n, args.cr)
    kind = "gaussian" if args.matrix == "gaussian" else f"bernoulli-{args.k}"
    phi = make_sensing(kind, m, n, args.seed)
    y = acquire_scan(phi, x)
    if args.noise_snr is not None:
        y = add_awgn(y, args.noise_snr, args.seed + 1)
    phi_out = args.phi_out or _sibling(args.out, ".phi" + Path(args.out).suffix)
    cimio.write_image(args.out, y, args.format)
    cimio.write_sensing(phi_out, phi, args.format)
    print(f"m={m} n={n} achieved CR={compression_ratio_scan(n, m):.6f} seed={args.seed}")
    print(f"wrote Y {y.shape[0]}x{y.shape[1]} to {args.out} and phi to {phi_out}")


def cmd_recover(args):
    y = cimio.read_image(args.y)
    phi = cimio.read_sensing(args.phi)
    if y.shape[0] != phi.m:
        raise UsageError(f"Y has {y.shape[0]} rows but phi has {phi.m} (dimension mismatch)")
    truth = cimio.read_image(args.truth) if args.truth else None
    if truth is not None and truth.shape != (phi.n, y.shape[1]):
        raise UsageError(f"truth shape {truth.shape} does not match ({phi.n}, {y.shape[1]})")
    if args.solver == "bsbl":
        if not 1 <= args.block <= phi.n:
            raise UsageError(f"--block must lie in [1, {phi.n}]")
        try:
            opts = SolveOptions(block_size=args.block, eta=args.eta, beta_scale=args.beta_scale,
                                max_iter=args.max_iter, transform=args.transform, add_only=args.add_only)
        except ValueError as exc:
            raise UsageError(str(exc)) from exc
        report = solve_bmmv(y, phi, opts)
    else:
        report = solve_ista_columnwise(y, phi, IstaOptions(transform=args.transform))
    snr = snr_db(truth, report.estimate) if truth is not None else None
    cimio.write_image(args.out, report.estimate, args.format)
    report_path = args.report or _sibling(args.out, ".json")
    Path(report_path).write_text(report.to_json(snr, args.seed) + "\n")
    msg = f"{args.solver}: {report.iterations} iterations in {report.wall_time:.3f}s"
    if snr is not None:
        msg += f", SNR {snr:.2f} dB" if math.isfinite(snr) else ", exact recovery"
    print(msg)


def _bench_config(args):
    base = BenchConfig()
    if args.config:
        base = load_config(Path(args.config).read_text())
    overrides = {
        "trials": args.trials, "sizes": args.size, "crs": args.cr, "matrix_kinds": args.matrix,
        "solvers": args.solver, "phantom": args.phantom, "block_size": args.block, "workers": args.workers,
    }
    from dataclasses import replace

    cfg = replace(base, **{k: v for k, v in overrides.items() if v is not None})
    if args.seed or not args.config:
        cfg = replace(cfg, base_seed=args.seed)
    if args.phantom is not None:
        cfg = replace(cfg, custom_phantom=None)
    try:
        return cfg.validate()
    except ScanThzError as exc:
        raise UsageError(str(exc)) from exc


def cmd_bench(args):
    cfg = _bench_config(args)
    records = run_benchmark(cfg)
    Path(args.out).write_text(records_to_csv(records))
    rows = summarize(records)
    summary_path = args.summary or _sibling(args.out, ".summary.csv")
    Path(summary_path).write_text(summary_to_csv(rows))
    print(format_table(rows))
    print(f"wrote {len(records)} records to {args.out}, summary to {summary_path}")


def cmd_convert(args):
    fmt = cimio.detect_format(args.src)
    if fmt == "cim":
        data, kind, k = cimio.decode_cim(Path(args.src).read_bytes())
    else:
        data, kind, k = cimio.decode_csv(Path(args.src).read_text()), None, None
    if args.format == "cim":
        Path(args.out).write_bytes(cimio.encode_cim(data, kind, k))
    else:
        cimio.write_image(args.out, data, "csv")
    print(f"converted {args.src} ({fmt}) -> {args.out} ({args.format})")


COMMANDS = {"phantom": cmd_phantom, "sense": cmd_sense, "recover": cmd_recover, "bench": cmd_bench,
            "convert": cmd_convert}


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        COMMANDS[args.command](args)
    except NumericalFailure as exc:
        print(f"scanthz: numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except (UsageError, FormatError) as exc:
        print(f"scanthz {args.command}: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except OSError as exc:
        print(f"scanthz: I/O error: {exc}", file=sys.stderr)
        return EXIT_IO
    except (ScanThzError, ValueError) as exc:
        print(f"scanthz {args.command}: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
