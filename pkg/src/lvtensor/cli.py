"""Command-line entry point: ``lvtensor <subcommand> ...``.

Exit codes: 0 success, 2 argument error, 3 I/O error, 4 numerical failure.
Mode numbers on the command line are 1-based.
"""
from __future__ import annotations

import argparse
import logging
import sys

import numpy as np

from . import generators as gen
from .clustering import cluster_mode, elbow_curve, mode_principal_components
from .errors import ArgumentError, NumericalError
from .estimators import RankRule, dse, hooi, select_rank_cv
from .experiments import (DEFAULT_C_GRID, ExperimentSpec, denoise_file, run_experiment,
                          write_result)
from .io import read_config, read_dtf1, write_csv, write_dtf1
from .rank_analysis import SCAN_COLUMNS, RankScanConfig, logrank_scan

log = logging.getLogger("lvtensor")

EXIT_OK, EXIT_ARGS, EXIT_IO, EXIT_NUMERIC = 0, 2, 3, 4


def _ints(text):
    return [int(x) for x in str(text).split(",") if x.strip()]


def _floats(text):
    return [float(x) for x in str(text).split(",") if x.strip()]


def _rule(args, default_c=None):
    if args.rank is not None:
        return RankRule.explicit(_ints(args.rank))
    if args.rank_c is not None:
        return RankRule.log_rule(args.rank_c, args.rank_exp)
    if default_c is not None:
        return RankRule.log_rule(default_c, args.rank_exp)
    return None


def _dims(args, order=3):
    d = _ints(args.d)
    return tuple(d) if len(d) > 1 else (d[0],) * order


def cmd_generate(args):
    dims = _dims(args)
    s = _ints(args.s)
    seed = args.seed
    if args.model in gen.TABLE_MODELS:
        theta = gen.generate_signal(gen.table_model(args.model, s[0]), dims, seed)
    elif args.model == "cp":
        theta = gen.generate_signal(gen.LatentModel("cp", None, {"s": s[0]}), dims, seed)
    elif args.model == "tucker":
        ranks = s * len(dims) if len(s) == 1 else s
        core = gen.make_rng(seed).standard_normal(tuple(ranks))
        theta = gen.generate_signal(gen.tucker_model(core), dims, seed + 1)
    elif args.model == "chc":
        rng = gen.make_rng(seed)
        sets = [rng.choice(d, size=min(s[0], d), replace=False) for d in dims]
        theta = gen.generate_signal(gen.chc_model(args.amplitude, sets), dims)
    else:  # volume
        theta = gen.smooth_volume(dims, seed=seed)
    if args.signal_out:
        write_dtf1(theta, args.signal_out)
    gamma = args.gamma[0] if args.gamma else 0.0
    sigma = gen.noise_sigma_for_level(theta, gamma)
    y = gen.add_noise(theta, gen.NoiseSpec(sigma, seed + 7919))
    write_dtf1(y, args.out)
    print(f"wrote {args.out}: dims={dims} sigma={sigma:.6g}")


def cmd_denoise(args):
    report = denoise_file(args.input, _rule(args), args.out,
                          c_grid=args.c_grid or DEFAULT_C_GRID, exponent=args.rank_exp,
                          folds=args.folds, seed=args.seed, report_path=args.report)
    print(report.text(), end="")


def cmd_rank_scan(args):
    defaults = ExperimentSpec.from_profile("logrank-scan", args.profile)
    d_grid = _ints(args.d) if args.d else defaults.d_grid
    cfg = RankScanConfig(epsilon=args.epsilon, r_max=min(args.r_max, min(d_grid)),
                         d_grid=d_grid, s_grid=_ints(args.s) if args.s else defaults.s_grid,
                         model=args.model,
                         seeds=tuple(args.seed + i for i in range(args.replicates or defaults.replicates)))
    rows = logrank_scan(cfg)
    write_csv(rows, SCAN_COLUMNS, args.out)
    print(f"wrote {len(rows)} rows to {args.out}")


def cmd_bench(args):
    overrides = dict(model=args.model, replicates=args.replicates, base_seed=args.seed,
                     rank_rule=_rule(args), output=args.out)
    if args.d:
        overrides["d_grid"] = tuple(_ints(args.d))
    if args.s:
        overrides["s_grid"] = tuple(_ints(args.s))
    if args.gamma:
        overrides["gamma_grid"] = tuple(args.gamma)
    if args.rank_grid:
        overrides["rank_grid"] = tuple(_ints(args.rank_grid))
    if args.c_grid:
        overrides["c_grid"] = tuple(args.c_grid)
    spec = ExperimentSpec.from_profile(args.kind, args.profile, **overrides)
    result = run_experiment(spec)
    paths = write_result(result, args.out)
    print(f"wrote {len(result.rows)} rows to {paths['raw']} ({len(result.failures)} failed cells)")
    return EXIT_NUMERIC if result.failures and not result.rows else EXIT_OK


def cmd_cluster(args):
    y = read_dtf1(args.input)
    mode = args.mode - 1
    if not 0 <= mode < y.ndim:
        raise ArgumentError(f"mode {args.mode} out of range for an order-{y.ndim} tensor")
    rule = _rule(args, default_c=1.0)
    out = cluster_mode(y, rule, mode, args.k, restarts=args.restarts, seed=args.seed)
    write_csv([{"row_index": i, "label": int(l)} for i, l in enumerate(out.labels)],
              ("row_index", "label"), args.out)
    print(f"wrote {len(out.labels)} labels to {args.out} (wcss={out.wcss:.6g}, ranks={out.metadata['ranks']})")
    if args.elbow:
        ranks = rule.resolve(y.shape)
        _, fact = dse(y, ranks)
        fact = hooi(y, ranks, init=list(fact.factors)).factorization
        scores = mode_principal_components(fact, mode)
        curve = elbow_curve(scores, [k for k in _ints(args.elbow) if k <= scores.shape[0]],
                            restarts=args.restarts, seed=args.seed)
        path = args.elbow_out or (args.out[:-4] if args.out.endswith(".csv") else args.out) + "_elbow.csv"
        write_csv([{"k": k, "wcss": w} for k, w in curve], ("k", "wcss"), path)
        print(f"wrote elbow curve to {path}")


def cmd_cv_rank(args):
    y = read_dtf1(args.input)
    c, ranks, table = select_rank_cv(y, args.c_grid or DEFAULT_C_GRID, args.rank_exp,
                                     args.folds, args.seed)
    write_csv(table, ("c", "ranks", "score", "status"), args.out)
    print(f"best c = {c:g}, ranks = {ranks}")


def build_parser():
    p = argparse.ArgumentParser(prog="lvtensor", description=__doc__.splitlines()[0])
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True)
    p.subcommands = sub.choices

    def common(sp, out_help):
        sp.add_argument("--config", help="key = value file supplying defaults for these flags")
        sp.add_argument("--seed", type=int, default=0)
        sp.add_argument("--out", required=True, help=out_help)

    def rank_flags(sp):
        g = sp.add_mutually_exclusive_group()
        g.add_argument("--rank", help="explicit rank, single or comma list per mode")
        g.add_argument("--rank-c", type=float, help="log-rule constant c in r = ceil(c log^e d)")
        sp.add_argument("--rank-exp", type=int, default=1, help="log-rule exponent e")
        sp.add_argument("--c-grid", type=_floats, help="CV grid for c (comma list)")

    g = sub.add_parser("generate", help="write a (noisy) model tensor as DTF1")
    common(g, "output DTF1 path")
    g.add_argument("--model", default="model1",
                   choices=list(gen.TABLE_MODELS) + ["cp", "tucker", "chc", "volume"])
    g.add_argument("--d", default="40", help="extent, or comma list of extents")
    g.add_argument("--s", default="2", help="latent dimension (CP/Tucker rank, CHC set size)")
    g.add_argument("--gamma", type=_floats, help="noise level relative to the signal RMS")
    g.add_argument("--amplitude", type=float, default=1.0)
    g.add_argument("--signal-out", help="also write the clean signal here")
    g.set_defaults(func=cmd_generate)

    d = sub.add_parser("denoise", help="DSE-denoise a DTF1 tensor")
    d.add_argument("input")
    common(d, "output DTF1 path")
    rank_flags(d)
    d.add_argument("--folds", type=int, default=5)
    d.add_argument("--report", help="report path (default: <out>.report.txt)")
    d.set_defaults(func=cmd_denoise)

    r = sub.add_parser("rank-scan", help="epsilon-rank scan over d and s (CSV)")
    common(r, "output CSV path")
    r.add_argument("--model", default="model1", choices=list(gen.TABLE_MODELS))
    r.add_argument("--d", help="comma list of extents")
    r.add_argument("--s", help="comma list of latent dimensions")
    r.add_argument("--epsilon", type=float, default=0.01)
    r.add_argument("--r-max", type=int, default=20)
    r.add_argument("--replicates", type=int, help="seeds per cell")
    r.add_argument("--profile", choices=["ci", "full"], default="ci")
    r.set_defaults(func=cmd_rank_scan)

    b = sub.add_parser("bench", help="Monte-Carlo estimator benchmarks (CSV)")
    common(b, "raw CSV path; summary and timings are written beside it")
    b.add_argument("--kind", default="estimator-compare",
                   choices=["mse-vs-d", "estimator-compare", "denoise-rank-sweep"])
    b.add_argument("--model", default="model1", choices=list(gen.TABLE_MODELS))
    b.add_argument("--d", help="comma list of extents")
    b.add_argument("--s", help="comma list of latent dimensions")
    b.add_argument("--gamma", type=_floats, help="comma list of noise levels (rank sweep)")
    b.add_argument("--rank-grid", help="comma list of ranks (rank sweep)")
    b.add_argument("--replicates", type=int)
    b.add_argument("--profile", choices=["ci", "full"], default="ci")
    rank_flags(b)
    b.set_defaults(func=cmd_bench)

    c = sub.add_parser("cluster", help="Tucker-PCA k-means on one mode (labels CSV)")
    c.add_argument("input")
    common(c, "labels CSV path")
    rank_flags(c)
    c.add_argument("--mode", type=int, default=1, help="1-based mode to cluster")
    c.add_argument("--k", type=int, required=True)
    c.add_argument("--restarts", type=int, default=10)
    c.add_argument("--elbow", help="comma list of k for an elbow curve")
    c.add_argument("--elbow-out")
    c.set_defaults(func=cmd_cluster)

    v = sub.add_parser("cv-rank", help="cross-validate the log-rule constant (CSV)")
    v.add_argument("input")
    common(v, "CV table CSV path")
    v.add_argument("--c-grid", type=_floats)
    v.add_argument("--rank-exp", type=int, default=1)
    v.add_argument("--folds", type=int, default=5)
    v.set_defaults(func=cmd_cv_rank)
    return p


def _apply_config(parser, args, argv):
    """Re-parse with values from ``--config`` as defaults; explicit flags still win."""
    cfg = read_config(args.config)
    sp = parser.subcommands[args.command]
    defaults = {}
    for action in sp._actions:
        for name in (action.dest, action.dest.replace("_", "-")):
            if name in cfg and action.dest not in ("help", "config"):
                value = cfg[name]
                defaults[action.dest] = ",".join(map(str, value)) if isinstance(value, list) else str(value)
    sp.set_defaults(**defaults)
    return parser.parse_args(argv)


def main(argv=None):
    argv = sys.argv[1:] if argv is None else list(argv)
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return exc.code if isinstance(exc.code, int) else EXIT_ARGS
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        if args.config:
            args = _apply_config(parser, args, argv)
        return args.func(args) or EXIT_OK
    except ArgumentError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_ARGS
    except (NumericalError, np.linalg.LinAlgError, FloatingPointError) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except OSError as exc:
        print(f"I/O error: {exc}", file=sys.stderr)
        return EXIT_IO
    except (KeyError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_ARGS


if __name__ == "__main__":
    sys.exit(main())
