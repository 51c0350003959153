"""Command-line interface.

Subcommands: estimate (one TLOG file), sweep (same- or cross-model
temperature sweep with synthetic models), crossgrid (metric matrix over a
model roster), corpus (estimate every dump in a directory), report (plot
data from result tables). Every subcommand is deterministic given its
flags; all randomness flows from explicit seed flags. Data goes to stdout
or --out files, diagnostics to stderr.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

from . import storage
from .experiments import (
    TemperatureGrid,
    aggregate_sweep,
    corpus_stats,
    cross_grid,
    run_sweep,
)
from .solver import SolverConfig, SolverStatus, estimate_temperature
from .storage import FormatError
from .textgen import SyntheticModelSpec, build_model


def _solver_config(args) -> SolverConfig:
    default = SolverConfig()
    init = default.beta_init
    if not args.bracket_lo < init < args.bracket_hi:
        init = (args.bracket_lo * args.bracket_hi) ** 0.5  # geometric midpoint
    return SolverConfig(
        beta_lo=args.bracket_lo, beta_hi=args.bracket_hi,
        beta_init=init, tol_beta_rel=args.tol,
    )


def _add_solver_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--bracket-lo", type=float, default=1e-2, metavar="BETA",
                   help="lower inverse-temperature bracket end (default 1e-2)")
    p.add_argument("--bracket-hi", type=float, default=1e4, metavar="BETA",
                   help="upper inverse-temperature bracket end (default 1e4)")
    p.add_argument("--tol", type=float, default=1e-10, metavar="REAL",
                   help="relative tolerance on the root in beta (default 1e-10)")


def _add_grid_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--tmin", type=float, default=0.001, help="grid start (default 0.001)")
    p.add_argument("--tmax", type=float, default=2.401, help="grid end (default 2.401)")
    p.add_argument("--tstep", type=float, default=0.1, help="grid step (default 0.1)")
    p.add_argument("--texts", type=int, default=10,
                   help="texts per grid temperature (default 10)")
    p.add_argument("--tokens", type=int, default=200,
                   help="continuation tokens per text (default 200)")
    p.add_argument("--seed", type=int, default=0,
                   help="experiment seed for per-text generation streams (default 0)")
    p.add_argument("--jobs", type=int, default=1,
                   help="worker threads over (temperature, text) cells; output is "
                        "identical for any value (default 1)")


def cmd_estimate(args) -> int:
    logits, tokens = storage.read_logit_dump(args.logits)
    est = estimate_temperature(logits, tokens, _solver_config(args))
    if est.status == SolverStatus.DEGENERATE:
        print("warning: every step is degenerate; any temperature is an MLE",
              file=sys.stderr)
    elif est.status != SolverStatus.CONVERGED:
        print(f"warning: estimate saturated at the bracket edge ({est.status.value})",
              file=sys.stderr)
    if args.format == "records":
        storage.write_results(storage.estimate_table(est, len(tokens)), sys.stdout)
    else:
        print(f"t_hat: {storage.format_number(est.t_hat)}")
        print(f"beta_hat: {storage.format_number(est.beta_hat)}")
        print(f"status: {est.status.value}")
        print(f"iterations: {est.iterations}")
        print(f"residual_at_root: {storage.format_number(est.residual_at_root)}")
        print(f"log_likelihood: {storage.format_number(est.log_likelihood_at_root)}")
        print(f"n_steps: {len(tokens)}")
    return 0


def cmd_sweep(args) -> int:
    gen = build_model(SyntheticModelSpec(
        vocab=args.vocab, order=args.order, logit_scale=args.logit_scale,
        seed=args.gen_seed,
    ))
    est_seed = args.gen_seed if args.est_seed is None else args.est_seed
    est = build_model(SyntheticModelSpec(
        vocab=args.vocab, order=args.order, logit_scale=args.logit_scale, seed=est_seed,
    ))
    grid = TemperatureGrid(t_min=args.tmin, t_max=args.tmax, t_step=args.tstep)
    result = run_sweep(gen, est, grid, args.texts, args.tokens, args.seed, jobs=args.jobs)
    storage.write_results(storage.sweep_table(result), args.out)
    metrics = aggregate_sweep(result)
    print(f"rows: {metrics.n_rows}", file=sys.stderr)
    print(f"mae_all: {storage.format_number(metrics.mae_all)}", file=sys.stderr)
    print(f"mae_converged: {storage.format_number(metrics.mae_converged)}", file=sys.stderr)
    print(f"n_saturated: {metrics.n_saturated}", file=sys.stderr)
    return 0


def cmd_crossgrid(args) -> int:
    specs = storage.read_model_roster(args.models)
    models = [build_model(s) for s in specs]
    vocabs = {m.vocab for m in models}
    if len(vocabs) > 1:
        raise ValueError(f"roster models must share one vocab, got {sorted(vocabs)}")
    grid = TemperatureGrid(t_min=args.tmin, t_max=args.tmax, t_step=args.tstep)
    result = cross_grid(models, grid, args.texts, args.tokens, args.seed, jobs=args.jobs)
    storage.write_results(storage.crossgrid_table(result), args.out)
    if args.assert_diagonal:
        bad = []
        for gid in result.model_ids:
            row = [c for c in result.cells if c.gen_model_id == gid]
            best = min(row, key=lambda c: c.mae_all)
            if best.est_model_id != gid:
                bad.append(gid)
        if bad:
            print(f"diagonal-dominance check failed for generators: {bad}", file=sys.stderr)
            return 1
        print("diagonal-dominance check passed", file=sys.stderr)
    return 0


def cmd_corpus(args) -> int:
    directory = Path(args.dir)
    if not directory.is_dir():
        raise FileNotFoundError(f"not a directory: {directory}")
    paths = sorted(directory.glob("*.tlog"))
    if not paths:
        raise FileNotFoundError(f"no .tlog files in {directory}")
    cfg = _solver_config(args)
    records = []
    estimates = []
    for path in paths:
        try:
            logits, tokens = storage.read_logit_dump(path)
            est = estimate_temperature(logits, tokens, cfg)
        except (FormatError, ValueError) as exc:
            if args.strict:
                raise
            print(f"warning: skipping {path.name}: {exc}", file=sys.stderr)
            continue
        records.append((path.stem, est, len(tokens)))
        estimates.append(est)
    if not estimates:
        raise FormatError("no readable dumps in directory")
    if args.out:
        storage.write_results(storage.corpus_text_table(records), args.out)
    stats = corpus_stats(estimates, corpus_id=directory.name)
    storage.write_results(storage.corpus_summary_table(stats), sys.stdout)
    return 0


def cmd_report(args) -> int:
    table = storage.read_results(getattr(args, "in"))
    if args.emit == "sweep-plot":
        sweep = storage.parse_sweep_table(table)
        rows: list[tuple] = [
            (r.gen_temperature, r.t_hat, "scatter") for r in sweep.rows
        ]
        by_t: dict[float, list[float]] = {}
        for r in sweep.rows:
            by_t.setdefault(r.gen_temperature, []).append(r.t_hat)
        for t in sorted(by_t):
            rows.append((t, sum(by_t[t]) / len(by_t[t]), "mean"))
        out = storage.make_table(storage.SWEEP_PLOT_COLUMNS, rows)
    else:  # heatmap
        storage.require_columns(table, storage.CROSSGRID_COLUMNS, "crossgrid")
        rows = [
            (rec[0], rec[1], rec[2])  # gen_model_id, est_model_id, mae_all
            for rec in table.rows
        ]
        out = storage.make_table(storage.HEATMAP_COLUMNS, rows)
    if args.out:
        storage.write_results(out, args.out)
    else:
        storage.write_results(out, sys.stdout)
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="textemp",
        description="Maximum-likelihood temperature of token sequences from per-step logits.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("estimate", help="estimate the temperature of one TLOG dump")
    p.add_argument("--logits", required=True, metavar="PATH", help="TLOG file to estimate")
    _add_solver_flags(p)
    p.add_argument("--format", choices=["text", "records"], default="text",
                   help="text report or machine-parsable records (default text)")
    p.set_defaults(func=cmd_estimate)

    p = sub.add_parser("sweep", help="generate texts over a temperature grid and estimate them")
    p.add_argument("--gen-seed", type=int, required=True, help="generator model seed")
    p.add_argument("--est-seed", type=int, default=None,
                   help="estimator model seed (default: same as --gen-seed)")
    p.add_argument("--vocab", type=int, default=128, help="vocabulary size (default 128)")
    p.add_argument("--order", type=int, default=1, help="model context order (default 1)")
    p.add_argument("--logit-scale", type=float, default=3.0,
                   help="std of logit table entries (default 3.0)")
    _add_grid_flags(p)
    p.add_argument("--out", required=True, metavar="PATH", help="result table destination")
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("crossgrid", help="metric matrix over every (generator, estimator) pair")
    p.add_argument("--models", required=True, metavar="SPEC_FILE",
                   help="JSON roster: {\"models\": [{vocab, order, logit_scale, seed}, ...]}")
    _add_grid_flags(p)
    p.add_argument("--out", required=True, metavar="PATH", help="result table destination")
    p.add_argument("--assert-diagonal", action="store_true",
                   help="exit nonzero unless each generator's MAE is minimal on the diagonal")
    p.set_defaults(func=cmd_crossgrid)

    p = sub.add_parser("corpus", help="estimate every TLOG dump in a directory")
    p.add_argument("--dir", required=True, metavar="PATH", help="directory of .tlog files")
    p.add_argument("--out", default=None, metavar="PATH", help="per-text result table")
    p.add_argument("--strict", action="store_true",
                   help="fail on the first unreadable dump instead of skipping")
    _add_solver_flags(p)
    p.set_defaults(func=cmd_corpus)

    p = sub.add_parser("report", help="emit plain plot data from a result table")
    p.add_argument("--in", required=True, metavar="PATH", dest="in",
                   help="result table to read")
    p.add_argument("--emit", choices=["sweep-plot", "heatmap"], required=True,
                   help="sweep-plot: x,y,series columns; heatmap: row,col,value triplets")
    p.add_argument("--out", default=None, metavar="PATH", help="destination (default stdout)")
    p.set_defaults(func=cmd_report)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (OSError, ValueError, RuntimeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    raise SystemExit(main())
