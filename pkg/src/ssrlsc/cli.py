"""Command-line interface: ``ssrlsc {run,sweep,synth,convert,inspect}``."""

from __future__ import annotations

import argparse
import sys
import warnings
from pathlib import Path

import numpy as np

from . import _backend
from .datamodel import (
    BYTE_ORDERS,
    DTYPES,
    INTERLEAVES,
    SplitSpec,
    load_cube,
    load_labels,
    make_synthetic,
    read_header,
    write_cube,
    write_labels,
)
from .eig import load_projection, save_projection
from .pipeline import CLASSIFIERS, METHODS, SWEEP_AXES, ExperimentConfig, run_experiment, sweep, write_csv


def parse_int_list(text: str) -> list[int]:
    """``"2,4,6"`` or inclusive ranges ``"2:50:2"`` (mixable with commas)."""
    out = []
    for part in str(text).split(","):
        part = part.strip()
        if not part:
            continue
        if ":" in part:
            bits = [int(b) for b in part.split(":")]
            start, stop = bits[0], bits[1]
            step = bits[2] if len(bits) > 2 else 1
            if step < 1:
                raise argparse.ArgumentTypeError(f"bad range step in {part!r}")
            out.extend(range(start, stop + 1, step))
        else:
            out.append(int(part))
    if not out:
        raise argparse.ArgumentTypeError(f"empty list {text!r}")
    return out


def parse_value_list(text: str) -> list[float]:
    return [float(p) for p in str(text).split(",") if p.strip()]


def _experiment_args(p: argparse.ArgumentParser) -> None:
    p.add_argument("--cube", required=True, help="cube header file")
    p.add_argument("--labels", required=True, help="label CSV grid")
    p.add_argument("--config", help="plain-text file of 'key = value' lines using flag names")
    p.add_argument("--method", choices=METHODS, default="ssrlsc")
    p.add_argument("--no-filter", action="store_true", help="skip the guided filter")
    p.add_argument("--filter-radius", type=int, default=1)
    p.add_argument("--filter-eps", type=float, default=0.01)
    p.add_argument("--alpha", type=float, default=0.5)
    p.add_argument("--beta", type=float, default=0.3)
    p.add_argument("--gamma", type=float, default=None, help="patch weight decay (default 1/bands)")
    p.add_argument("--kw", type=int, default=7)
    p.add_argument("--kb", type=int, default=7)
    p.add_argument("--window", type=int, default=3)
    p.add_argument("--dim", type=parse_int_list, default="2:50:2", help="e.g. 2,4,8 or 2:50:2")
    p.add_argument("--train-per-class", type=int, default=10)
    p.add_argument("--runs", type=int, default=5)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--clf", choices=CLASSIFIERS, default="svm")
    p.add_argument("--svm-lambda", type=float, default=0.01)
    p.add_argument("--svm-epochs", type=int, default=200)
    p.add_argument("--threads", type=int, default=1, help="scatter accumulation threads")
    p.add_argument("--csv-out", help="write per-(run, dim) metrics here")
    p.add_argument("--timing", action="store_true", help="fill the CSV seconds column")
    p.add_argument("--quiet", action="store_true")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="ssrlsc", description=__doc__)
    parser.add_argument("--version", action="version", version=f"%(prog)s ({_backend.BACKEND} kernels)")
    sub = parser.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="multi-run experiment for one configuration")
    _experiment_args(run)
    run.add_argument("--model-out", help="save the run-0 projection")
    run.add_argument("--model-in", help="use a saved projection instead of learning one")

    sw = sub.add_parser("sweep", help="one experiment per value of a parameter")
    _experiment_args(sw)
    sw.add_argument("--axis", choices=SWEEP_AXES, required=True)
    sw.add_argument("--values", required=True, help="comma-separated values")

    syn = sub.add_parser("synth", help="write a synthetic block cube and labels")
    syn.add_argument("--out", required=True, help="output prefix; writes PREFIX.hdr/.raw and PREFIX_labels.csv")
    syn.add_argument("--classes", type=int, default=3)
    syn.add_argument("--blocks", type=int, default=2, help="blocks per class")
    syn.add_argument("--block-size", type=int, default=8)
    syn.add_argument("--bands", type=int, default=16)
    syn.add_argument("--sep", type=float, default=6.0)
    syn.add_argument("--noise", type=float, default=0.5)
    syn.add_argument("--seed", type=int, default=0)
    syn.add_argument("--dtype", choices=sorted(DTYPES), default="f64")

    conv = sub.add_parser("convert", help="rewrite a cube with another layout")
    conv.add_argument("src")
    conv.add_argument("dst")
    conv.add_argument("--dtype", choices=sorted(DTYPES), default="f64")
    conv.add_argument("--byte-order", choices=sorted(BYTE_ORDERS), default="little")
    conv.add_argument("--interleave", choices=INTERLEAVES, default="bsq")

    insp = sub.add_parser("inspect", help="print a cube header and value summary")
    insp.add_argument("header")
    insp.add_argument("--labels", help="also summarize a label grid")
    return parser


def config_tokens(path, subparser: argparse.ArgumentParser) -> list[str]:
    """Turn ``key = value`` / ``key: value`` lines into flag tokens."""
    actions = subparser._option_string_actions
    tokens = []
    for lineno, raw in enumerate(Path(path).read_text().splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        sep = "=" if "=" in line else ":"
        key, _, value = (s.strip() for s in line.partition(sep))
        flag = "--" + key.replace("_", "-")
        if flag not in actions or flag == "--config":
            raise SystemExit(f"{path}:{lineno}: unknown config key {key!r}")
        if isinstance(actions[flag], argparse._StoreTrueAction):
            if value.lower() in ("1", "true", "yes", "on", ""):
                tokens.append(flag)
        else:
            tokens += [flag, value]
    return tokens


def _find_config(argv: list[str]):
    for i, tok in enumerate(argv):
        if tok == "--config" and i + 1 < len(argv):
            return argv[i + 1]
        if tok.startswith("--config="):
            return tok.split("=", 1)[1]
    return None


def parse_args(argv=None) -> argparse.Namespace:
    argv = list(sys.argv[1:] if argv is None else argv)
    parser = build_parser()
    cfg_path = _find_config(argv)
    if cfg_path and argv and argv[0] in ("run", "sweep"):
        subparser = parser._subparsers._group_actions[0].choices[argv[0]]
        # Config first so explicit flags, parsed later, win.
        argv = [argv[0]] + config_tokens(cfg_path, subparser) + argv[1:]
    return parser.parse_args(argv)


def experiment_config(args) -> ExperimentConfig:
    dims = args.dim if isinstance(args.dim, list) else parse_int_list(args.dim)
    return ExperimentConfig(
        method=args.method,
        use_filter=not args.no_filter,
        alpha=args.alpha,
        beta=args.beta,
        gamma=args.gamma,
        k_w=args.kw,
        k_b=args.kb,
        window=args.window,
        filter_radius=args.filter_radius,
        filter_eps=args.filter_eps,
        dims=tuple(dims),
        split=SplitSpec(args.train_per_class, args.seed, args.runs),
        classifier=args.clf,
        svm_lambda=args.svm_lambda,
        svm_epochs=args.svm_epochs,
        n_jobs=args.threads,
    )


def _load_inputs(args):
    cube = load_cube(args.cube)
    grid = load_labels(args.labels, cube.height, cube.width)
    return cube, grid


def cmd_run(args) -> int:
    cube, grid = _load_inputs(args)
    cfg = experiment_config(args)
    proj = load_projection(args.model_in) if args.model_in else None
    report = run_experiment(cube, grid, cfg, projection=proj)
    if not args.quiet:
        print(report.summary())
    if args.csv_out:
        write_csv([("", report)], args.csv_out, timing=args.timing)
    if args.model_out:
        save_projection(report.projections[0], args.model_out)
    return 0


def cmd_sweep(args) -> int:
    cube, grid = _load_inputs(args)
    cfg = experiment_config(args)
    values = parse_int_list(args.values) if args.axis in ("dim", "window", "train_size") else parse_value_list(args.values)
    results = sweep(cube, grid, cfg, args.axis, values)
    if not args.quiet:
        print(f"{args.axis:>10} {'best OA%':>9} {'dim':>4} {'AA%':>7} {'kappa%':>7}")
        for value, report in results:
            d, oa, aa, k = report.best()
            print(f"{value!s:>10} {100 * oa:9.2f} {d:>4} {100 * aa:7.2f} {100 * k:7.2f}")
    if args.csv_out:
        write_csv(results, args.csv_out, timing=args.timing)
    return 0


def cmd_synth(args) -> int:
    cube, grid = make_synthetic(
        args.classes, args.blocks, args.block_size, args.bands, args.sep, args.noise, args.seed
    )
    out = Path(args.out)
    hdr, raw = write_cube(cube, out.with_name(out.name + ".hdr"), dtype=args.dtype)
    labels = out.with_name(out.name + "_labels.csv")
    write_labels(grid, labels)
    print(f"wrote {hdr}, {raw}, {labels} ({cube.height}x{cube.width}x{cube.bands}, {grid.n_classes} classes)")
    return 0


def cmd_convert(args) -> int:
    cube = load_cube(args.src)
    hdr, raw = write_cube(cube, args.dst, args.dtype, args.byte_order, args.interleave)
    print(f"wrote {hdr}, {raw}")
    return 0


def cmd_inspect(args) -> int:
    hdr = read_header(args.header)
    for key in ("height", "width", "bands", "dtype", "byte_order", "interleave", "data_file"):
        print(f"{key}: {hdr[key]}")
    cube = load_cube(args.header)
    v = cube.values
    print(f"values: min {v.min():.6g} max {v.max():.6g} mean {v.mean():.6g} std {v.std():.6g}")
    if args.labels:
        grid = load_labels(args.labels, cube.height, cube.width)
        counts = grid.class_counts()
        print(f"classes: {grid.n_classes}  unlabeled: {int(np.sum(grid.labels == 0))}")
        for c, n in counts.items():
            print(f"  class {c}: {n}")
    return 0


COMMANDS = {"run": cmd_run, "sweep": cmd_sweep, "synth": cmd_synth, "convert": cmd_convert, "inspect": cmd_inspect}


def main(argv=None) -> int:
    args = parse_args(argv)
    try:
        with warnings.catch_warnings():
            if getattr(args, "quiet", False):
                warnings.simplefilter("ignore")
            return COMMANDS[args.command](args)
    except (ValueError, OSError, np.linalg.LinAlgError, RuntimeError) as exc:
        print(f"ssrlsc {args.command}: error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
