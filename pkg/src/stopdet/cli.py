"""``stopdet`` command line: single estimates and benchmark sweeps.

Exit codes: 0 success, 2 input error, 3 numerical/factorization error,
4 I/O error.
"""

from __future__ import annotations

import argparse
import json
import math
import sys
import time

import numpy as np

from .bench import emit_report, load_run_config, run_sweep
from .bounds import make_config
from .cholesky import BlockPlan, cholesky_full, log_det_from_factor, stopped_cholesky_blocked, stopped_cholesky_rowwise
from .data import load_dataset, permute, synth_gaussian
from .errors import InputError
from .kernels import KernelSpec, assemble_matrix, kappa_plus
from .pivoted import guaranteed_precision_at_stop, pivoted_cholesky

EXIT_INPUT, EXIT_NUMERIC, EXIT_IO = 2, 3, 4


def _synthetic(value: str):
    try:
        n, dim = (int(v) for v in value.split(","))
    except ValueError:
        raise argparse.ArgumentTypeError("expected 'n,dim'") from None
    return n, dim


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="stopdet", description="Kernel log-determinants with optional stopping.")
    sub = parser.add_subparsers(dest="command", required=True)

    est = sub.add_parser("estimate", help="estimate log det(K + sigma2 I) for one dataset")
    src = est.add_mutually_exclusive_group(required=True)
    src.add_argument("--data", help="CSV file (needs --schema)")
    src.add_argument("--synthetic", type=_synthetic, metavar="N,DIM", help="i.i.d. standard normal inputs")
    est.add_argument("--schema", help="schema file: one 'numeric' or 'categorical' per column")
    est.add_argument("--no-header", action="store_true", help="the CSV has no header row")
    est.add_argument("--preclean", action="store_true", help="strip apostrophes and extra whitespace before parsing")
    est.add_argument("--kernel", choices=["rbf", "ou"], default="rbf")
    est.add_argument("--theta", type=float, default=1.0)
    est.add_argument("--lengthscale", type=float, default=1.0)
    est.add_argument("--sigma2", type=float, default=1e-3)
    est.add_argument("--delta", type=float, default=0.1)
    est.add_argument("--r", type=float, default=0.1)
    est.add_argument("--algo", choices=["full", "rowwise", "blocked", "pivoted"], default="blocked")
    est.add_argument("--block-size", type=int, default=None)
    est.add_argument("--diag-tol", type=float, default=0.01, help="pivoted only: residual diagonal tolerance")
    est.add_argument("--max-rows", type=int, default=None, help="use only the first rows after shuffling")
    est.add_argument("--seed", type=int, default=0)

    bench = sub.add_parser("bench", help="run a parameter sweep from a config file")
    bench.add_argument("--config", required=True)
    bench.add_argument("--out", required=True)
    bench.add_argument("--format", choices=["csv", "jsonl"], default="csv")
    return parser


def _finite(x):
    return x if x is not None and math.isfinite(x) else None


def estimate(args) -> dict:
    if args.data is not None:
        if args.schema is None:
            raise InputError("--data needs --schema")
        ds = load_dataset(args.data, args.schema, header=not args.no_header, preclean=args.preclean)
    else:
        ds = synth_gaussian(*args.synthetic, args.seed)
    points = permute(ds, args.seed).rows
    if args.max_rows is not None:
        points = points[: args.max_rows]
    spec = KernelSpec(args.kernel, args.theta, args.lengthscale)
    a = assemble_matrix(points, spec, args.sigma2)
    n = a.shape[0]
    cfg = make_config(n, args.sigma2, args.delta, args.r, kappa_plus(spec, args.sigma2))
    out = {"algorithm": args.algo, "n": n, "dim": points.shape[1], "c_delta": cfg.c_delta, "warnings": []}
    if cfg.loose_precision:
        out["warnings"].append("r>=1")

    t0 = time.perf_counter()
    if args.algo == "full":
        log_det = log_det_from_factor(cholesky_full(a))
        out.update(stopped=False, stop_index=n, estimate=log_det, log_det=log_det)
    elif args.algo == "pivoted":
        res = pivoted_cholesky(a, args.diag_tol, cfg)
        out.update(stopped=not res.completed, stop_index=res.rank, estimate=res.estimate, log_det=res.log_det,
                   reason=res.reason, lower=res.final.lower, upper=res.final.upper,
                   guaranteed_r=_finite(guaranteed_precision_at_stop(res)))
    else:
        if args.algo == "rowwise":
            res = stopped_cholesky_rowwise(a, cfg)
        else:
            plan = BlockPlan(args.block_size) if args.block_size else BlockPlan()
            out["block_size"] = plan.block_size
            res = stopped_cholesky_blocked(a, plan, cfg)
        if res.stopped:
            out.update(stopped=True, stop_index=res.tau, estimate=res.estimate, lower=res.lower, upper=res.upper)
        else:
            out.update(stopped=False, stop_index=n, estimate=res.log_det, log_det=res.log_det)
    out["wall_time"] = time.perf_counter() - t0
    return out


def bench(args) -> int:
    cfg = load_run_config(args.config)
    records = run_sweep(cfg)
    emit_report(records, args.out, args.format)
    print(f"wrote {len(records)} records to {args.out}")
    return 0


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        if args.command == "estimate":
            print(json.dumps(estimate(args), indent=2))
            return 0
        return bench(args)
    except InputError as exc:
        print(f"stopdet: input error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except (np.linalg.LinAlgError, FloatingPointError) as exc:
        print(f"stopdet: numerical error: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except OSError as exc:
        print(f"stopdet: I/O error: {exc}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
