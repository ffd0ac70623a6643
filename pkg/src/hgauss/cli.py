"""Command-line interface: ``hgauss test`` and ``hgauss simulate``.

Exit codes: 0 the command ran (and, with ``--verify``, reproduced exactly),
1 a ``--verify`` replay did not reproduce, 2 malformed input or flags,
3 numerical failure.
"""

from __future__ import annotations

import argparse
import os
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .bootstrap import TestResult, bootstrap_test
from .exceptions import NumericalError
from .io import (
    CurveFileError,
    dump_result,
    file_digest,
    load_result,
    power_csv,
    read_curves,
)
from .measures import GaussianMeasure
from .simulation import ExperimentAborted, ExperimentConfig, PowerRow, run_experiment

EXIT_OK, EXIT_MISMATCH, EXIT_INPUT, EXIT_NUMERIC = 0, 1, 2, 3
MEASURES = {"wiener": "wiener", "ou": "ornstein_uhlenbeck", "bridge": "brownian_bridge"}


def _default_threads():
    try:
        return max(1, int(os.environ.get("HG_THREADS", "1")))
    except ValueError:
        return 1


def _alpha_list(text):
    try:
        values = tuple(float(a) for a in text.split(","))
    except ValueError:
        raise argparse.ArgumentTypeError(f"invalid alpha list {text!r}") from None
    if not all(0 < a < 1 for a in values):
        raise argparse.ArgumentTypeError("alphas must lie in (0, 1)")
    return values


def _add_test_flags(p):
    p.add_argument("--measure", choices=sorted(MEASURES), default="wiener",
                   help="probe measure Q (default: wiener)")
    p.add_argument("--measure-param", type=float, default=1.0,
                   help="variance scale (wiener, bridge) or decay rate (ou)")
    p.add_argument("--M", type=int, default=1000, help="Monte Carlo probes (default 1000)")
    p.add_argument("--B", type=int, default=200, help="bootstrap replicates (default 200)")
    p.add_argument("--seed", type=int, default=0, help="master seed (default 0)")
    p.add_argument("--method", choices=("auto", "mc", "closed"), default="auto",
                   help="statistic evaluation (default auto: closed form for m <= 512)")
    p.add_argument("--fresh-probes", action="store_true",
                   help="draw new probes for every bootstrap replicate")
    p.add_argument("--threads", type=int, default=_default_threads(),
                   help="worker threads (default $HG_THREADS or 1)")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="hgauss", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"hgauss {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    t = sub.add_parser("test", help="test a curve file for Gaussianity")
    t.add_argument("input", nargs="?", help="CSV of curves (rows) on a shared grid")
    _add_test_flags(t)
    t.add_argument("--alpha", type=float, default=0.05, help="nominal level (default 0.05)")
    t.add_argument("--out", help="result JSON path (default: <input>.hgauss.json)")
    t.add_argument("--verify", metavar="RESULT",
                   help="replay a result file and check it reproduces exactly")

    s = sub.add_parser("simulate", help="run a level/power experiment")
    s.add_argument("--dgp", choices=("wiener", "ou", "alt1", "alt2", "alt3"))
    s.add_argument("--variant", choices=("base", "mixture", "laplace"))
    s.add_argument("--n", type=int, default=50)
    s.add_argument("--reps", type=int, default=500)
    s.add_argument("--m", type=int, default=101, help="grid size (default 101)")
    _add_test_flags(s)
    s.add_argument("--alpha", type=_alpha_list, default=(0.05, 0.10),
                   help="comma-separated levels (default 0.05,0.10)")
    s.add_argument("--csv", help="write the PowerRow CSV here (default: stdout)")
    s.add_argument("--json", help="write the full JSON audit record here")
    s.add_argument("--verify", metavar="RESULT",
                   help="replay a simulation JSON and check every record reproduces")
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        if args.command == "test":
            return cmd_test(args)
        return cmd_simulate(args)
    except (CurveFileError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except NumericalError as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC


# --------------------------------------------------------------------------


def _run_test(sample, cfg, threads):
    measure = GaussianMeasure(sample.grid, cfg["measure"], cfg["measure_param"])
    return bootstrap_test(sample, measure, M=cfg["M"], B=cfg["B"], alpha=cfg["alpha"],
                          seed=cfg["seed"], method=cfg["method"],
                          fresh_probes=cfg["fresh_probes"], threads=threads)


def cmd_test(args) -> int:
    if args.verify:
        return _verify_test(args)
    if not args.input:
        raise ValueError("an input CSV is required")
    sample = read_curves(args.input)
    cfg = {"measure": MEASURES[args.measure], "measure_param": args.measure_param,
           "M": args.M, "B": args.B, "alpha": args.alpha, "seed": args.seed,
           "method": args.method, "fresh_probes": args.fresh_probes}
    result = _run_test(sample, cfg, args.threads)
    out = args.out or str(Path(args.input).with_suffix("")) + ".hgauss.json"
    dump_result({
        "kind": "test",
        "input": {"path": str(Path(args.input).resolve()), "sha256": file_digest(args.input),
                  "n": sample.n, "m": sample.m},
        "result": result.to_dict(),
    }, out)
    _print_summary(result)
    print(f"result written to {out}")
    return EXIT_OK


def _print_summary(result: TestResult):
    obs = result.observed
    print(f"n*T_n      = {obs.n_T_n:.6g} ({obs.method}"
          + (f", M={obs.M}, MC s.e. {obs.mc_std_error:.3g})" if obs.M else ")"))
    print(f"p-value    = {result.p_value:.4f} (B={result.boot_stats.size})")
    verdict = "reject" if result.reject else "do not reject"
    print(f"decision   = {verdict} Gaussianity at alpha={result.alpha:g}")


def _verify_test(args) -> int:
    doc = load_result(args.verify)
    if doc.get("kind") != "test":
        raise ValueError(f"{args.verify} is not a test result")
    path = args.input or doc["input"]["path"]
    if file_digest(path) != doc["input"]["sha256"]:
        print(f"input {path} does not match the recorded sha256", file=sys.stderr)
        return EXIT_MISMATCH
    recorded = TestResult.from_dict(doc["result"])
    replay = _run_test(read_curves(path), recorded.config, args.threads)
    same = (replay.observed == recorded.observed
            and replay.p_value == recorded.p_value
            and np.array_equal(replay.boot_stats, recorded.boot_stats))
    _print_summary(replay)
    print("verify: " + ("reproduced exactly" if same else "MISMATCH"))
    return EXIT_OK if same else EXIT_MISMATCH


def cmd_simulate(args) -> int:
    if args.verify:
        return _verify_simulation(args)
    if args.dgp is None:
        raise ValueError("--dgp is required")
    if args.dgp in ("wiener", "ou") and args.variant is not None:
        raise ValueError(f"--variant does not apply to --dgp {args.dgp}")
    config = ExperimentConfig(
        dgp=args.dgp, variant=args.variant, n=args.n, reps=args.reps, M=args.M, B=args.B,
        alphas=args.alpha, m=args.m, measure=MEASURES[args.measure],
        measure_param=args.measure_param, method=args.method, seed=args.seed,
        fresh_probes=args.fresh_probes)
    partial = (args.json + ".partial") if args.json else None
    try:
        row = run_experiment(config, threads=args.threads, partial_path=partial)
    except ExperimentAborted as exc:
        print(f"experiment aborted: {exc}", file=sys.stderr)
        if exc.partial_path:
            print(f"partial results written to {exc.partial_path}", file=sys.stderr)
        return EXIT_NUMERIC
    table = power_csv([row])
    if args.csv:
        Path(args.csv).write_text(table)
    else:
        sys.stdout.write(table)
    if args.json:
        dump_result({"kind": "simulate", "rows": [row.to_dict()]}, args.json)
    return EXIT_OK


def _verify_simulation(args) -> int:
    doc = load_result(args.verify)
    if doc.get("kind") != "simulate":
        raise ValueError(f"{args.verify} is not a simulation result")
    ok = True
    for stored in doc["rows"]:
        recorded = PowerRow.from_dict(stored)
        replay = run_experiment(recorded.config, threads=args.threads)
        same = replay.records == recorded.records and replay.rates == recorded.rates
        ok &= same
        print(f"{recorded.config.label()}: " + ("reproduced exactly" if same else "MISMATCH"))
    return EXIT_OK if ok else EXIT_MISMATCH


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
