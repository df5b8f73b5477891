"""Command line front end: ``belgatree --structure belga --N 1023 --B 16 ...``."""
from __future__ import annotations

import argparse
import sys

from . import _backend
from .harness import (
    STRUCTURES,
    WORKLOADS,
    BadTrace,
    IoFailure,
    Workload,
    bench_backends,
    emit_csv,
    run,
)


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(
        prog="belgatree",
        description="Run a search workload against a B-tree variant and report unit costs.",
    )
    p.add_argument("--structure", choices=STRUCTURES, default="belga")
    p.add_argument("--N", type=int, default=1023, help="key universe 1..N")
    p.add_argument("--B", type=int, default=16, help="branching parameter")
    p.add_argument("--workload", choices=WORKLOADS, default="uniform")
    p.add_argument("--ops", type=int, default=4096, help="number of searches")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--alpha", type=float, default=1.1, help="zipf exponent")
    p.add_argument("--key", type=int, default=1, help="key of the constant workload")
    p.add_argument("--trace", help="trace file, one key per line")
    p.add_argument("--csv", help="write per-search rows here")
    p.add_argument("--backend", choices=("auto", "python", "compiled"), default="auto")
    p.add_argument("--bench", action="store_true",
                   help="time the pure and compiled Belga engines instead")
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        if args.bench:
            for name, sec in bench_backends(args.N, args.B, args.ops, args.seed).items():
                print(f"{name:9s} {sec * 1e6:9.1f} us/search")
            return 0
        if args.workload == "trace" and not args.trace:
            raise BadTrace("--workload trace needs --trace")
        w = Workload(args.workload, args.N, args.ops, args.B, args.seed,
                     args.alpha, args.trace, args.key)
        rep = run(args.structure, w, backend=args.backend)
        for msg in rep.warnings:
            print(f"warning: {msg}", file=sys.stderr)
        if args.csv:
            emit_csv(rep, args.csv)
    except (BadTrace, IoFailure, ValueError) as e:
        print(f"belgatree: error: {e}", file=sys.stderr)
        return 1
    for k, v in rep.summary().items():
        print(f"{k:14s} {v}")
    print(f"{'backend':14s} {rep.backend or _backend.NAME}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
