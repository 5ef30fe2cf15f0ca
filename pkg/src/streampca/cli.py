"""Command-line front end.

Subcommands:
  run       stream one method over a seeded source, one CSV per seed
  suite     run every (cell, method, seed) combination from a config file
  oracle    batch-PCA a trajectory file and export the top-k modes
  plotdata  concatenate trial CSVs into one long-format file
"""

from __future__ import annotations

import argparse
import sys

from .errors import StreamPCAError
from .evaluation import CovarianceSpec, batch_pca
from .experiment import (ExperimentConfig, MethodEntry, emit_plotdata,
                         parse_config_file, parse_seed_spec, run_suite,
                         suite_cells)
from .sources import load_trajectory


def build_parser():
    parser = argparse.ArgumentParser(
        prog="streampca",
        description="Streaming memory-limited PCA experiments")
    sub = parser.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="run one method over a seeded source")
    run.add_argument("--source", default="spiked",
                     choices=("spiked", "harmonic", "trajectory-file"))
    run.add_argument("--d", type=int, default=100)
    run.add_argument("--k", type=int, default=1)
    run.add_argument("--sigma", type=float, default=0.5)
    run.add_argument("--n", type=int, default=10000)
    run.add_argument("--block", type=int, default=5)
    run.add_argument("--method", default="block-power",
                     choices=("block-power", "oja", "momentum"))
    run.add_argument("--accelerate", action="store_true")
    run.add_argument("--a", type=float, default=2.0,
                     help="schedule amplitude in eta=(a*c+1)/t")
    run.add_argument("--beta", type=float, default=0.1,
                     help="momentum coefficient")
    run.add_argument("--seeds", default="1", help="e.g. 7, 1..10 or 1,4,9")
    run.add_argument("--eval-every", type=int, default=10)
    run.add_argument("--modes", type=int, default=25,
                     help="harmonic source: number of modes")
    run.add_argument("--noise", type=float, default=0.1,
                     help="harmonic source: noise sigma")
    run.add_argument("--input", help="trajectory-file source: path")
    run.add_argument("--center", action="store_true",
                     help="running-mean center the stream; grade on "
                          "exactly centered data")
    run.add_argument("--strict", action="store_true",
                     help="abort on degenerate updates instead of retaining")
    run.add_argument("--out", required=True, help="output directory")

    suite = sub.add_parser("suite", help="run a configured grid of cells")
    suite.add_argument("--config", required=True)
    suite.add_argument("--out", required=True)
    suite.add_argument("--seeds", help="override the config seed list")
    suite.add_argument("--n", type=int, help="override sample count")
    suite.add_argument("--eval-every", type=int, dest="eval_every")
    suite.add_argument("--block", type=int)

    oracle = sub.add_parser("oracle", help="batch-PCA a trajectory file")
    oracle.add_argument("--input", required=True)
    oracle.add_argument("--k", type=int, required=True)
    oracle.add_argument("--center", action="store_true")
    oracle.add_argument("--out", required=True)

    plot = sub.add_parser("plotdata", help="merge trial CSVs for plotting")
    plot.add_argument("--in", dest="in_dir", required=True)
    plot.add_argument("--out", required=True)
    return parser


def _cmd_run(args):
    entry = MethodEntry(method=args.method, accelerated=args.accelerate,
                        a=args.a, beta=args.beta)
    config = ExperimentConfig(
        source=args.source, d=args.d, k=args.k, sigma=args.sigma, n=args.n,
        block=args.block, methods=(entry,),
        seeds=tuple(parse_seed_spec(args.seeds)), eval_every=args.eval_every,
        modes=args.modes, noise=args.noise, path=args.input,
        center=args.center, strict=args.strict)
    result = run_suite([config], args.out)
    for row in result.summary_rows:
        print(f"{row['setting']} {row['method']}: "
              f"final convergence median {row['final_convergence_median']:.3e} "
              f"({row['seeds']} seeds)")
    for setting, label, seed, message in result.failures:
        print(f"FAILED {setting} {label} seed {seed}: {message}",
              file=sys.stderr)
    return 0 if result.ok else 1


def _cmd_suite(args):
    options = parse_config_file(args.config)
    overrides = {"seeds": args.seeds, "n": args.n,
                 "eval_every": args.eval_every, "block": args.block}
    cells = suite_cells(options, overrides)
    result = run_suite(cells, args.out)
    print(f"{len(result.trial_paths)} trials -> {args.out}")
    for row in result.summary_rows:
        print(f"{row['setting']} {row['method']}: "
              f"final convergence median {row['final_convergence_median']:.3e}")
    for setting, label, seed, message in result.failures:
        print(f"FAILED {setting} {label} seed {seed}: {message}",
              file=sys.stderr)
    return 0 if result.ok else 1


def _cmd_oracle(args):
    _, X = load_trajectory(args.input)
    basis, values = batch_pca(CovarianceSpec(X, centered=args.center), args.k)
    with open(args.out, "w", encoding="utf-8") as fh:
        coords = ",".join(f"c{i}" for i in range(basis.shape[0]))
        fh.write(f"component,eigenvalue,{coords}\n")
        for i in range(args.k):
            row = ",".join(format(v, ".17g") for v in basis[:, i])
            fh.write(f"{i + 1},{format(values[i], '.17g')},{row}\n")
    print(f"wrote {args.k} modes of {basis.shape[0]} dims to {args.out}")
    return 0


def _cmd_plotdata(args):
    rows = emit_plotdata(args.in_dir, args.out)
    print(f"wrote {rows} rows to {args.out}")
    return 0


def main(argv=None):
    args = build_parser().parse_args(argv)
    handlers = {"run": _cmd_run, "suite": _cmd_suite,
                "oracle": _cmd_oracle, "plotdata": _cmd_plotdata}
    try:
        return handlers[args.command](args)
    except (StreamPCAError, ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
