"""Command-line entry point: ``sharpe-qubo <command> ...``.

Exit codes: 0 success (or feasible result), 1 error, 2 infeasible result.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path

from . import market_data as md
from .calibration import LambdaGrid, calibrate, collect_statistics
from .errors import NoFeasibleConfigurationError, SharpeQuboError
from .formulations import KINDS, QuboModel, build
from .qubo import save_qubo_json, save_qubo_text
from .report import build_report, format_table, rows_to_csv
from .solvers.heuristics import SOLVERS, SolverConfig, solve
from .synth import synth_prices, write_prices_csv

log = logging.getLogger("sharpe_qubo")

EXIT_OK, EXIT_ERROR, EXIT_INFEASIBLE = 0, 1, 2


def read_json(path):
    return json.loads(Path(path).read_text(encoding="utf-8"))


def write_json(data, path):
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(json.dumps(data, indent=2, allow_nan=False) + "\n", encoding="utf-8")


def write_text(text, path):
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(text, encoding="utf-8")


def save_model(model, path):
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    save_qubo_json(model.matrix, path, model.metadata())


def load_stats(path):
    return md.AssetStats.from_dict(read_json(path))


# ---------------------------------------------------------------- commands


def cmd_synth(args):
    panel = synth_prices(args.assets, args.days, seed=args.seed)
    write_prices_csv(panel, args.out)
    print(f"wrote {len(panel.dates)} days x {len(panel.assets)} assets to {args.out}")
    return EXIT_OK


def prepare(prices_path, returns="auto", max_missing=1, frequency=md.TRADING_DAYS):
    """In-process version of ``prepare``: returns (stats, normality, qq)."""
    panel = md.clean_panel(md.load_prices(prices_path), max_missing)
    panels = {"simple": md.simple_returns(panel), "log": md.log_returns(panel)}
    normality = {kind: md.normality_score(p) for kind, p in panels.items()}
    if returns == "auto":
        returns = min(normality, key=lambda k: normality[k].pooled)
    stats = md.filter_positive_mu(md.annualized_stats(panels[returns], frequency))
    qq = {kind: md.qq_points(p) for kind, p in panels.items()}
    doc = {
        "selected": returns,
        "assets_after_cleaning": len(panel.assets),
        "assets_investable": stats.n_assets,
        **{kind: report.to_dict() for kind, report in normality.items()},
    }
    return stats, doc, qq


def cmd_prepare(args):
    out = Path(args.out)
    stats, normality, qq = prepare(args.prices, args.returns, args.max_missing, args.frequency)
    write_json(stats.to_dict(), out / "stats.json")
    write_json(normality, out / "normality.json")
    lines = ["kind,theoretical,empirical"]
    for kind, points in qq.items():
        lines += [f"{kind},{t!r},{e!r}" for t, e in points]
    write_text("\n".join(lines) + "\n", out / "qq.csv")
    print(
        f"returns={normality['selected']} "
        f"(pooled JB simple={normality['simple']['pooled']:.3f}, "
        f"log={normality['log']['pooled']:.3f}); "
        f"{normality['assets_after_cleaning']} assets after cleaning, "
        f"{stats.n_assets} investable"
    )
    return EXIT_OK


def _build_options(args):
    return {"K": args.K, "H": args.H, "step": args.step}


def cmd_build(args):
    stats = load_stats(args.stats)
    model = build(args.kind, stats, args.lambda0, args.lambda1, **_build_options(args))
    print(
        f"kind={model.kind} variables={model.n_variables} "
        f"nonzeros={model.matrix.nnz} density={model.matrix.density:.4f}"
    )
    if args.out:
        if args.format == "text":
            save_qubo_text(model.matrix, args.out)
        else:
            save_model(model, args.out)
    return EXIT_OK


def solver_config_from_args(args):
    data = read_json(args.config) if args.config else {}
    overrides = {
        "solver": args.solver,
        "sweeps": args.sweeps,
        "beta_start": args.beta_start,
        "beta_end": args.beta_end,
        "restarts": args.restarts,
        "iterations": args.iterations,
        "tenure": args.tenure,
        "seed": args.seed,
    }
    data.update({k: v for k, v in overrides.items() if v is not None})
    return SolverConfig.from_dict(data)


def cmd_solve(args):
    model = QuboModel.from_dict(read_json(args.model))
    config = solver_config_from_args(args)
    header = {
        "kind": model.kind,
        "solver": config.solver,
        "assets": list(model.assets),
        "lambda0": model.lambda0,
        "lambda1": model.lambda1,
        "tolerance": model.default_tolerance(),
    }
    if args.n_feasible:
        run = collect_statistics(
            model, config, args.n_feasible, args.max_attempts, config.seed, args.threads
        )
        doc = {**header, **run.to_dict()}
        write_json(doc, args.out)
        if args.csv:
            write_text(run.to_csv(), args.csv)
        print(f"collected {len(run.solutions)}/{run.n_requested} feasible in {run.attempts} attempts")
        return EXIT_INFEASIBLE if run.shortfall else EXIT_OK

    result = solve(model.matrix, config, threads=args.threads)
    sol = model.decode(result.best_bits, energy=result.best_energy)
    doc = {
        **header,
        **sol.to_dict(),
        "asset_count": sol.asset_count,
        "seed": config.seed,
        "wall_time": result.wall_time,
    }
    write_json(doc, args.out)
    sharpe = "n/a" if sol.sharpe is None else f"{sol.sharpe:.6f}"
    print(
        f"energy={sol.energy:.6g} sharpe={sharpe} residual={sol.residual:.3g} "
        f"feasible={sol.feasible} assets={sol.asset_count}"
    )
    return EXIT_OK if sol.feasible else EXIT_INFEASIBLE


def cmd_calibrate(args):
    stats = load_stats(args.stats)
    grid = LambdaGrid.from_dict(read_json(args.grid))
    if args.runs is not None:
        grid = LambdaGrid(grid.pairs, args.runs)
    config = solver_config_from_args(args)
    out = Path(args.out)
    try:
        report = calibrate(
            args.kind, stats, grid, config, seed=config.seed, threads=args.threads,
            **_build_options(args),
        )
        code = EXIT_OK
    except NoFeasibleConfigurationError as exc:
        report = exc.report
        code = EXIT_ERROR
        log.error("no feasible configuration; report written anyway")
    write_json(report.to_dict(), out / "calibration.json")
    write_text(report.to_csv(), out / "calibration.csv")
    for i, rec in enumerate(report.records):
        mark = "*" if i == report.chosen_index and code == EXIT_OK else " "
        best = "-" if rec.best_sharpe is None else f"{rec.best_sharpe:.4f}"
        print(
            f"{mark} lambda0={rec.lambda0:g} lambda1={rec.lambda1:g} "
            f"feasible={rec.feasible_count}/{rec.total_runs} best_sharpe={best}"
        )
    if code == EXIT_OK and args.model_out:
        chosen = report.chosen
        model = build(args.kind, stats, chosen.lambda0, chosen.lambda1, **_build_options(args))
        save_model(model, args.model_out)
    return code


def cmd_report(args):
    docs = [read_json(p) for p in args.solutions]
    stats = load_stats(args.stats) if args.stats else None
    rows = build_report(docs, stats)
    if args.out:
        write_text(rows_to_csv(rows), args.out)
    print(format_table(rows))
    return EXIT_OK


# ---------------------------------------------------------------- parser


def _add_solver_flags(p):
    p.add_argument("--config", help="JSON solver block")
    p.add_argument("--solver", choices=SOLVERS)
    p.add_argument("--sweeps", type=int)
    p.add_argument("--beta-start", type=float)
    p.add_argument("--beta-end", type=float)
    p.add_argument("--restarts", type=int)
    p.add_argument("--iterations", type=int)
    p.add_argument("--tenure", type=int)
    p.add_argument("--seed", type=int)
    p.add_argument("--threads", type=int, default=None,
                   help="worker threads (default: available cores)")


def _add_build_flags(p):
    p.add_argument("--kind", choices=KINDS, required=True)
    p.add_argument("--K", type=int, default=9, help="bits per asset, proxy")
    p.add_argument("--H", type=int, default=None,
                   help="bits per asset, proposed (default: largest that fits 1/mu_min)")
    p.add_argument("--step", type=float, default=0.1, help="discretization step, proposed")


def _positive(value):
    number = float(value)
    if not number > 0:
        raise argparse.ArgumentTypeError("must be > 0")
    return number


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        # usage errors share the generic error code; 2 means "infeasible"
        self.print_usage(sys.stderr)
        self.exit(EXIT_ERROR, f"{self.prog}: error: {message}\n")


def build_parser():
    parser = _Parser(
        prog="sharpe-qubo",
        description="Build, solve and calibrate QUBO formulations of Max-Sharpe portfolios.",
    )
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("synth", help="write a seeded synthetic price CSV")
    p.add_argument("--assets", type=int, default=10)
    p.add_argument("--days", type=int, default=756)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_synth)

    p = sub.add_parser("prepare", help="prices CSV -> stats.json + normality report")
    p.add_argument("prices")
    p.add_argument("--returns", choices=("auto", "simple", "log"), default="auto")
    p.add_argument("--max-missing", type=int, default=1)
    p.add_argument("--frequency", type=int, default=md.TRADING_DAYS)
    p.add_argument("--out", required=True, help="output directory")
    p.set_defaults(func=cmd_prepare)

    p = sub.add_parser("build", help="stats.json -> model.json")
    p.add_argument("stats")
    _add_build_flags(p)
    p.add_argument("--lambda0", type=_positive, required=True)
    p.add_argument("--lambda1", type=_positive, required=True)
    p.add_argument("--format", choices=("json", "text"), default="json")
    p.add_argument("--out", help="output file (omit to only print the summary)")
    p.set_defaults(func=cmd_build)

    p = sub.add_parser("solve", help="model.json -> solution.json")
    p.add_argument("model")
    _add_solver_flags(p)
    p.add_argument("--n-feasible", type=int, help="collect this many feasible solutions")
    p.add_argument("--max-attempts", type=int)
    p.add_argument("--csv", help="per-solution CSV (with --n-feasible)")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_solve)

    p = sub.add_parser("calibrate", help="lambda grid search")
    p.add_argument("stats")
    _add_build_flags(p)
    p.add_argument("--grid", required=True, help="grid JSON")
    p.add_argument("--runs", type=int, help="override runs_per_pair")
    _add_solver_flags(p)
    p.add_argument("--model-out", help="write the model for the chosen pair here")
    p.add_argument("--out", required=True, help="output directory")
    p.set_defaults(func=cmd_calibrate)

    p = sub.add_parser("report", help="summary table vs the classical baseline")
    p.add_argument("solutions", nargs="*")
    p.add_argument("--stats", help="stats.json for the classical baseline")
    p.add_argument("--out", help="summary CSV")
    p.set_defaults(func=cmd_report)
    return parser


def main(argv=None):
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        if args.command == "report" and not args.solutions:
            parser.error("report needs at least one solution file")
    except SystemExit as exc:
        # usage errors and --help return their code instead of exiting
        return exc.code
    logging.basicConfig(
        level=logging.INFO if args.verbose else logging.WARNING,
        format="%(levelname)s %(name)s: %(message)s",
    )
    try:
        return args.func(args)
    except (SharpeQuboError, ValueError, OSError, KeyError, json.JSONDecodeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())
