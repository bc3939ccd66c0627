"""Command-line entry point: ``rbperm <command> [options]``.

Exit codes: 0 on success, 1 when ``verify`` finds a failing check, 2 on a
usage error.  Every command that draws random numbers takes ``--seed``; when
it is absent the RBPERM_SEED environment variable is used, then 0.
"""

import argparse
import io
import json
import math
import os
import sys
import time

import numpy as np

from . import analytic, oracle, permuton, samplers
from .analytic import StatisticId
from .samplers import RecordBias, SamplerKind

SEED_ENV = "RBPERM_SEED"

STAT_NAMES = {s.value: s for s in StatisticId}


class UsageError(Exception):
    pass


def fmt(x) -> str:
    """Cell text: integers as-is, floats with 17 significant digits, None empty."""
    if x is None:
        return ""
    if isinstance(x, (bool, np.bool_)):
        return str(int(x))
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    return format(float(x), ".17g")


def _json_value(x):
    if x is None or isinstance(x, str):
        return x
    if isinstance(x, (int, np.integer)):
        return int(x)
    x = float(x)
    return x if math.isfinite(x) else None


def write_table(out, columns, rows, form="csv"):
    if form == "json":
        records = [{c: _json_value(v) for c, v in zip(columns, row)} for row in rows]
        json.dump(records, out, separators=(",", ":"))
        out.write("\n")
        return
    out.write(",".join(columns) + "\n")
    for row in rows:
        out.write(",".join(v if isinstance(v, str) else fmt(v) for v in row) + "\n")


# ---------------------------------------------------------------------------
# argument helpers


def _positive_int(text):
    try:
        v = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not an integer: {text!r}") from None
    if v < 1:
        raise argparse.ArgumentTypeError(f"must be at least 1, got {v}")
    return v


def _theta_arg(text):
    try:
        return RecordBias.parse(text)
    except ValueError as e:
        raise argparse.ArgumentTypeError(str(e)) from None


def _int_list(text):
    try:
        vals = [int(t) for t in text.replace(",", " ").split()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a list of integers: {text!r}") from None
    if not vals or min(vals) < 1:
        raise argparse.ArgumentTypeError("sizes must be positive integers")
    return vals


def _float_list(text):
    try:
        vals = [float(t) for t in text.replace(",", " ").split()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a list of numbers: {text!r}") from None
    if not vals or min(vals) <= 0:
        raise argparse.ArgumentTypeError("values must be positive")
    return vals


def resolve_seed(args) -> int:
    if args.seed is not None:
        return args.seed
    env = os.environ.get(SEED_ENV)
    if env is not None and env.strip():
        try:
            return int(env.strip(), 0)
        except ValueError:
            raise UsageError(f"{SEED_ENV}={env!r} is not an integer") from None
    return 0


def regime_of(bias: RecordBias):
    """The asymptotic regime that a theta setting falls into."""
    if bias.mode == "fixed":
        return analytic.Uniform() if bias.value == 1 else analytic.FixedTheta(bias.value)
    if bias.mode == "linear":
        return analytic.Linear(bias.value)
    if bias.value < 1:
        return analytic.Sublinear(bias.value)
    if bias.value == 1:
        return analytic.Linear(1.0)
    return analytic.Superlinear(bias.value)


def _theta_for(bias, n):
    try:
        return samplers.resolve_theta(bias, n)
    except ValueError as e:
        raise UsageError(str(e)) from None


# ---------------------------------------------------------------------------
# commands


def cmd_sample(args, out):
    seed = resolve_seed(args)
    _theta_for(args.theta, args.n)
    words = samplers.batch_words(args.sampler, args.n, args.theta, args.count, seed, workers=args.threads)
    buf = io.StringIO()
    for row in words:
        buf.write(" ".join(map(str, row.tolist())))
        buf.write("\n")
    out.write(buf.getvalue())
    return 0


def _exact_law_column(stat, n, theta):
    """value -> exact probability, or None when no exact law is available."""
    if stat is StatisticId.RECORDS:
        pmf = analytic.exact_pmf_records(theta, n)
        return {k: float(pmf[k]) for k in range(1, n + 1)}
    if stat is StatisticId.INVERSIONS:
        if n > analytic.INVERSIONS_PMF_MAX_N:
            return None
        pmf = analytic.exact_pmf_inversions(theta, n)
        return {k: float(p) for k, p in enumerate(pmf)}
    if stat is StatisticId.FIRST_VALUE:
        return {k: analytic.prob_first_value(theta, n, k) for k in range(1, n + 1)}
    if n <= oracle.MAX_N:
        return dict(oracle.exact_statistic_pmf(n, theta, stat).support)
    return None


def cmd_law(args, out):
    if args.count < 1:
        raise UsageError("--count must be at least 1")
    seed = resolve_seed(args)
    stat = STAT_NAMES[args.stat]
    theta = _theta_for(args.theta, args.n)
    table = samplers.batch_statistics(
        args.sampler, args.n, theta, args.count, seed, workers=args.threads,
        inversions=stat is StatisticId.INVERSIONS,
    )
    column = {
        StatisticId.RECORDS: 0, StatisticId.DESCENTS: 1,
        StatisticId.INVERSIONS: 2, StatisticId.FIRST_VALUE: 3,
    }[stat]
    values, counts = np.unique(table[:, column], return_counts=True)
    observed = dict(zip(values.tolist(), counts.tolist()))
    exact = _exact_law_column(stat, args.n, theta)
    keys = sorted(set(observed) | (set(exact) if exact else set()))
    rows = []
    for v in keys:
        c = observed.get(v, 0)
        rows.append((v, c, c / args.count, exact.get(v, 0.0) if exact is not None else None))
    write_table(out, ("value", "count", "empirical_prob", "exact_prob"), rows, args.format)
    return 0


def cmd_permuton(args, out):
    base = resolve_seed(args)
    bias = RecordBias.linear(args.lam)
    rows = []
    for n in args.n:
        for k in range(args.seeds):
            seed = base + k
            p = samplers.batch_sample(args.sampler, n, bias, 1, seed)[0]
            rows.append((n, seed, permuton.distance_grid(p, args.lam)))
    write_table(out, ("n", "seed", "d"), rows, args.format)
    return 0


def cmd_heatmap(args, out):
    seed = resolve_seed(args)
    _theta_for(args.theta, args.n)
    counts = samplers.batch_heatmap(args.sampler, args.n, args.theta, args.count, seed, workers=args.threads)
    columns = ["i"] + [str(j) for j in range(1, args.n + 1)]
    rows = [[i + 1] + counts[i].tolist() for i in range(args.n)]
    write_table(out, columns, rows, args.format)
    return 0


def cmd_verify(args, out):
    if args.max_n > oracle.MAX_N:
        raise UsageError(f"--max-n is capped at {oracle.MAX_N}")
    fails = oracle.verify(max_n=args.max_n, thetas=tuple(args.thetas))
    if fails:
        out.write(f"FAILED: {len(fails)} check(s)\n")
        for msg in fails:
            out.write(f"  {msg}\n")
        return 1
    out.write(f"ok: all checks passed for n <= {args.max_n}, theta in {list(args.thetas)}\n")
    return 0


def cmd_expect(args, out):
    stat = STAT_NAMES[args.stat]
    theta = _theta_for(args.theta, args.n)
    exact = analytic.expected_value(stat, theta, args.n)
    try:
        asym = analytic.asymptotic_expectation(stat, regime_of(args.theta), args.n)
    except (analytic.UnsupportedCell, analytic.DomainError):
        asym = None
    ratio = exact / asym if asym else None
    write_table(
        out,
        ("stat", "n", "theta", "exact", "asymptotic", "ratio"),
        [(stat.value, args.n, theta, exact, asym, ratio)],
        args.format,
    )
    return 0


def cmd_bench(args, out):
    seed = resolve_seed(args)
    rows = []
    # compile outside the timed region
    samplers.batch_words(args.sampler, 8, args.theta, 1, seed)
    for size in args.sizes:
        theta = _theta_for(args.theta, size)
        best = math.inf
        for r in range(args.repeats):
            t0 = time.perf_counter()
            samplers.batch_words(args.sampler, size, theta, 1, seed + r)
            best = min(best, time.perf_counter() - t0)
        rows.append((size, best, best * 1e9 / size))
    write_table(out, ("size", "seconds", "ns_per_element"), rows, args.format)
    return 0


# ---------------------------------------------------------------------------
# parser


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="rbperm", description="Record-biased random permutations.")
    sub = parser.add_subparsers(dest="command", required=True)

    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--seed", type=int, default=None, help=f"64-bit seed (default: ${SEED_ENV}, then 0)")
    common.add_argument("--out", default="-", help="output file (default: stdout)")
    common.add_argument("--format", choices=("csv", "json"), default="csv")
    common.add_argument("--threads", type=_positive_int, default=1, help="worker threads for batch work")

    kinds = [k.value for k in SamplerKind]
    theta_help = "fixed:<x>, linear:<lambda> or power:<e>"

    p = sub.add_parser("sample", parents=[common], help="write sampled permutations, one per line")
    p.add_argument("--n", type=_positive_int, required=True)
    p.add_argument("--theta", type=_theta_arg, default=RecordBias.fixed(1.0), help=theta_help)
    p.add_argument("--count", type=int, default=1)
    p.add_argument("--sampler", choices=kinds, default="slots")
    p.set_defaults(func=cmd_sample)

    p = sub.add_parser("law", parents=[common], help="empirical law of a statistic next to the exact one")
    p.add_argument("--stat", choices=sorted(STAT_NAMES), required=True)
    p.add_argument("--n", type=_positive_int, required=True)
    p.add_argument("--theta", type=_theta_arg, default=RecordBias.fixed(1.0), help=theta_help)
    p.add_argument("--count", type=int, default=100000)
    p.add_argument("--sampler", choices=kinds, default="slots")
    p.set_defaults(func=cmd_law)

    p = sub.add_parser("permuton", parents=[common], help="grid distance to the limit permuton")
    p.add_argument("--n", type=_int_list, required=True, help="sizes, e.g. 200,1000,5000")
    p.add_argument("--lam", type=float, required=True)
    p.add_argument("--seeds", type=_positive_int, default=20, help="number of seeds, starting at --seed")
    p.add_argument("--sampler", choices=kinds, default="slots")
    p.set_defaults(func=cmd_permuton)

    p = sub.add_parser("heatmap", parents=[common], help="counts of sigma(i) = j over a batch")
    p.add_argument("--n", type=_positive_int, required=True)
    p.add_argument("--theta", type=_theta_arg, default=RecordBias.fixed(1.0), help=theta_help)
    p.add_argument("--count", type=int, default=10000)
    p.add_argument("--sampler", choices=kinds, default="slots")
    p.set_defaults(func=cmd_heatmap)

    p = sub.add_parser("verify", parents=[common], help="run the exhaustive checks")
    p.add_argument("--max-n", type=_positive_int, default=7)
    p.add_argument("--thetas", type=_float_list, default=[0.5, 1.0, 2.0])
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("expect", parents=[common], help="exact and asymptotic expectation")
    p.add_argument("--stat", choices=sorted(STAT_NAMES), required=True)
    p.add_argument("--n", type=_positive_int, required=True)
    p.add_argument("--theta", type=_theta_arg, default=RecordBias.fixed(1.0), help=theta_help)
    p.set_defaults(func=cmd_expect)

    p = sub.add_parser("bench", parents=[common], help="time one sample per size")
    p.add_argument("--sampler", choices=kinds, default="slots")
    p.add_argument("--sizes", type=_int_list, default=[1000000, 2000000])
    p.add_argument("--theta", type=_theta_arg, default=RecordBias.fixed(2.0), help=theta_help)
    p.add_argument("--repeats", type=_positive_int, default=5)
    p.set_defaults(func=cmd_bench)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return int(e.code) if e.code is not None else 0
    if getattr(args, "count", None) is not None and args.count < 0:
        print("rbperm: error: --count must be non-negative", file=sys.stderr)
        return 2
    try:
        if args.out == "-":
            return args.func(args, sys.stdout)
        buf = io.StringIO()
        code = args.func(args, buf)
        with open(args.out, "w", newline="\n") as fh:
            fh.write(buf.getvalue())
        return code
    except UsageError as e:
        print(f"rbperm: error: {e}", file=sys.stderr)
        return 2
    except OSError as e:
        print(f"rbperm: error: {e}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
