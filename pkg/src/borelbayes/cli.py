"""Command-line surface: evaluation subcommands and the study reproduction.

Subcommands: ``dist``, ``bayes-table``, ``eb``, ``monotonize``,
``reproduce-study``, ``figure1``.  Exit codes: 0 on success, 1 for usage or
configuration errors, 2 for numeric failures (with the failing routine and
arguments in the message).

Every output file starts with a comment line carrying the artifact version
and the fully resolved configuration, so a run can be reproduced from its
own outputs byte for byte (modulo the version stamp).  The report commands
additionally render matplotlib figures next to the CSV files.
"""

import argparse
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .config import (
    STUDY_DEFAULTS,
    UsageError,
    build_experiment_config,
    build_prior,
    describe,
    history_sizes,
    load_config_file,
    resolve,
)
from .distribution import BTParams, pmf_cdf_arrays
from .empirical import EBHistory, eb_table
from .monotone import ActionGrid, monotonize
from .numerics import NumericError
from .risk import build_experiment_table, run_experiment


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def _fmt(value):
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    return format(float(value), ".17g")


def _write_csv(path, meta, header, rows):
    with open(path, "w", encoding="utf-8", newline="\n") as handle:
        handle.write(f"# borelbayes {__version__} | {meta}\n")
        handle.write(",".join(header) + "\n")
        for row in rows:
            handle.write(",".join(_fmt(v) for v in row) + "\n")
    print(path)


def _out_dir(args):
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    return out


def _resolved(args, defaults=None):
    mapping = load_config_file(args.config) if getattr(args, "config", None) else {}
    overrides = {}
    if getattr(args, "seed", None) is not None:
        overrides["seed"] = str(args.seed)
    return resolve(mapping, overrides, defaults=defaults)


def _read_history(path):
    try:
        with open(path, "r", encoding="utf-8") as handle:
            values = [int(line) for line in handle if line.strip()]
    except OSError as exc:
        raise UsageError(f"cannot read history file {path}: {exc}") from exc
    except ValueError as exc:
        raise UsageError(f"history file {path} must hold one integer per line") from exc
    if not values:
        raise UsageError(f"history file {path} is empty")
    return values


def cmd_dist(args):
    params = BTParams(args.r, args.theta)
    if args.xmin < params.r:
        raise UsageError(f"xmin must be >= r, got xmin={args.xmin}, r={params.r}")
    if args.xmax < args.xmin:
        raise UsageError(f"xmax must be >= xmin, got {args.xmax} < {args.xmin}")
    pmf, cdf_vals = pmf_cdf_arrays(params.r, params.theta, args.xmax)
    rows = [
        (x, pmf[x - params.r], cdf_vals[x - params.r])
        for x in range(args.xmin, args.xmax + 1)
    ]
    meta = f"command=dist r={args.r} theta={_fmt(args.theta)} xmin={args.xmin} xmax={args.xmax}"
    _write_csv(_out_dir(args) / "dist.csv", meta, ("x", "pmf", "cdf"), rows)
    return 0


def cmd_bayes_table(args):
    resolved = _resolved(args)
    cfg = build_experiment_config(resolved, n=1)
    table = build_experiment_table(cfg)
    rows = zip(table.xs, table.posterior_mean, table.posterior_second, table.marginal)
    meta = f"command=bayes-table {describe(resolved)}"
    _write_csv(
        _out_dir(args) / "bayes_table.csv",
        meta,
        ("x", "theta_bayes", "posterior_second_moment", "marginal"),
        rows,
    )
    return 0


def _fit_history(args, resolved):
    observations = _read_history(args.history)
    r = int(resolved["r"])
    history = EBHistory.from_observations(r, observations)
    cap = args.cap if args.cap is not None else int(history.values[-1])
    qzero = resolved.get("qzero_convention", "one")
    return history, eb_table(history, cap=cap, qzero=qzero)


def cmd_eb(args):
    resolved = _resolved(args)
    _, table = _fit_history(args, resolved)
    meta = f"command=eb history={args.history} cap={table.cap} {describe(resolved)}"
    rows = zip(table.xs, table.values)
    _write_csv(_out_dir(args) / "eb_table.csv", meta, ("x", "theta_eb"), rows)
    return 0


def cmd_monotonize(args):
    resolved = _resolved(args)
    _, raw = _fit_history(args, resolved)
    rule = monotonize(raw, ActionGrid.uniform(int(resolved["grid_m"])))
    out = _out_dir(args)
    meta = f"command=monotonize history={args.history} cap={raw.cap} {describe(resolved)}"
    rows = zip(raw.xs, raw.values, rule.result.values)
    _write_csv(out / "monotone_table.csv", meta, ("x", "theta_eb", "theta_monotone"), rows)

    if args.dump_diagnostics or args.dump_x:
        dump_xs = []
        if args.dump_x:
            try:
                dump_xs = [int(part) for part in args.dump_x.split(",") if part.strip()]
            except ValueError:
                raise UsageError(f"--dump-x must be comma-separated integers, got {args.dump_x!r}")
            for x in dump_xs:
                if not raw.r <= x <= raw.cap:
                    raise UsageError(f"--dump-x value {x} outside support [{raw.r}, {raw.cap}]")
        header = ["a", "alpha"] + [f"dstar_x{x}" for x in dump_xs]
        cols = [rule.grid.points, rule.operating_char]
        cols += [rule.rule_cdf[:, x - raw.r] for x in dump_xs]
        _write_csv(out / "rule_diagnostics.csv", meta, header, zip(*cols))
    return 0


def cmd_reproduce_study(args):
    resolved = _resolved(args)
    sizes = history_sizes(resolved)
    configs = [build_experiment_config(resolved, n) for n in sizes]
    table = build_experiment_table(configs[0])
    reports = [run_experiment(cfg, table=table, threads=args.threads) for cfg in configs]

    out = _out_dir(args)
    meta = f"command=reproduce-study {describe(resolved)}"

    table1_rows = [
        (rep.config.r, rep.config.n, rep.config.reps, rep.s_eb_mean, rep.s_eb_se,
         rep.s_mono_mean, rep.s_mono_se, rep.s_mle)
        for rep in reports
    ]
    _write_csv(
        out / "table1.csv",
        meta,
        ("r", "n", "reps", "S_eb_mean", "S_eb_se", "S_mono_mean", "S_mono_se", "S_mle"),
        table1_rows,
    )

    rep_rows = []
    for rep in reports:
        for res in rep.replications:
            rep_rows.append((rep.config.n, res.index, res.regret_eb, res.regret_mono, res.truncations))
        rep_rows.append((rep.config.n, "mean", rep.s_eb_mean, rep.s_mono_mean, rep.truncations))
        rep_rows.append((rep.config.n, "se", rep.s_eb_se, rep.s_mono_se, 0))
    with open(out / "study_replications.csv", "w", encoding="utf-8", newline="\n") as handle:
        handle.write(f"# borelbayes {__version__} | {meta}\n")
        handle.write("n,rep,regret_eb,regret_mono,truncations\n")
        for row in rep_rows:
            handle.write(",".join(str(v) if isinstance(v, str) else _fmt(v) for v in row) + "\n")
    print(out / "study_replications.csv")

    first = reports[0]
    lines = [
        f"# borelbayes {__version__} | {meta}",
        "",
        f"support cap: {first.cap} (certified tail mass <= {_fmt(first.tail_bound)})",
        f"bayes risk (exact): {first.bayes_risk:.6f}",
        f"mle regret, squared gap (exact): {first.s_mle:.6f}",
        f"mle regret, unsquared signed gap (for the record): {first.s_mle_unsquared:.6f}",
        "",
    ]
    for rep in reports:
        lines += [
            f"n={rep.config.n} reps={rep.config.reps}:",
            f"  EB regret:        {rep.s_eb_mean:.4f} (se {rep.s_eb_se:.4f})",
            f"  monotone regret:  {rep.s_mono_mean:.4f} (se {rep.s_mono_se:.4f})",
            f"  sampler truncation events: {rep.truncations}",
        ]
    summary = out / "study_summary.txt"
    summary.write_text("\n".join(lines) + "\n", encoding="utf-8")
    print(summary)

    from .plots import save_study_figure

    save_study_figure(
        out / "study_regret.png",
        [(rep.config.n, rep.s_eb_mean, rep.s_eb_se, rep.s_mono_mean, rep.s_mono_se)
         for rep in reports],
        first.s_mle,
        first.bayes_risk,
    )
    print(out / "study_regret.png")
    return 0


def cmd_figure1(args):
    defaults = dict(STUDY_DEFAULTS)
    defaults["n"] = str(args.n)
    defaults["r"] = str(args.r)
    resolved = _resolved(args, defaults=defaults)
    cfg = build_experiment_config(resolved, n=args.n)
    table = build_experiment_table(cfg)

    from .risk import _sampling_cap, draw_history

    xs_draws, _ = draw_history(cfg, 0, _sampling_cap(cfg))
    history = EBHistory.from_observations(cfg.r, xs_draws)
    cap = int(table.cap.cap)
    eb = eb_table(history, cap=cap, qzero=cfg.qzero)
    mono = monotonize(eb, ActionGrid.uniform(cfg.grid_m)).result

    counts = np.zeros(cap - cfg.r + 1, dtype=np.int64)
    for value in xs_draws:
        counts[int(value) - cfg.r] += 1
    # Report from r to ten points past the largest observation.
    hi = min(cap, int(xs_draws.max()) + 10)
    sl = slice(0, hi - cfg.r + 1)

    out = _out_dir(args)
    meta = f"command=figure1 {describe(resolved)}"
    rows = zip(
        table.xs[sl],
        counts[sl],
        eb.values[sl],
        mono.values[sl],
        table.posterior_mean[sl],
    )
    _write_csv(
        out / "estimates.csv",
        meta,
        ("x", "count", "theta_eb", "theta_monotone", "theta_bayes"),
        rows,
    )

    from .plots import save_estimates_figure

    save_estimates_figure(
        out / "figure1.png",
        table.xs[sl],
        eb.values[sl],
        mono.values[sl],
        table.posterior_mean[sl],
        n=cfg.n,
        r=cfg.r,
    )
    print(out / "figure1.png")
    return 0


def build_parser():
    parser = _Parser(prog="borelbayes", description=__doc__)
    parser.add_argument("--version", action="version", version=f"borelbayes {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, seed=True):
        p.add_argument("--config", help="flat key=value config file")
        p.add_argument("--out", default=".", help="output directory (default: current)")
        if seed:
            p.add_argument("--seed", type=int, help="override the RNG seed")
        p.add_argument("--threads", type=int, default=1,
                       help="worker processes for replications (0 = auto)")

    p = sub.add_parser("dist", help="tabulate pmf and cdf of one Borel-Tanner law")
    p.add_argument("--r", type=int, required=True)
    p.add_argument("--theta", type=float, required=True)
    p.add_argument("--xmin", type=int, required=True)
    p.add_argument("--xmax", type=int, required=True)
    p.add_argument("--out", default=".")
    p.set_defaults(handler=cmd_dist)

    p = sub.add_parser("bayes-table", help="tabulate the Bayes rule for the configured prior")
    common(p, seed=False)
    p.set_defaults(handler=cmd_bayes_table)

    p = sub.add_parser("eb", help="fit the EB rule to a history file (one integer per line)")
    common(p, seed=False)
    p.add_argument("--history", required=True)
    p.add_argument("--cap", type=int, help="table cap (default: largest observation)")
    p.set_defaults(handler=cmd_eb)

    p = sub.add_parser("monotonize", help="fit and monotonize the EB rule from a history file")
    common(p, seed=False)
    p.add_argument("--history", required=True)
    p.add_argument("--cap", type=int, help="table cap (default: largest observation)")
    p.add_argument("--dump-diagnostics", action="store_true",
                   help="also dump the operating characteristic over the action grid")
    p.add_argument("--dump-x", help="comma-separated x values whose rule cdf to dump")
    p.set_defaults(handler=cmd_monotonize)

    p = sub.add_parser("reproduce-study", help="run the replicated regret study")
    common(p)
    p.set_defaults(handler=cmd_reproduce_study)

    p = sub.add_parser("figure1", help="one replication's estimate curves and figure")
    common(p)
    p.add_argument("--n", type=int, default=500, help="history size (default 500)")
    p.add_argument("--r", type=int, default=3, help="ancestor count (default 3)")
    p.set_defaults(handler=cmd_figure1)
    return parser


def main(argv=None):
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        return args.handler(args)
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except NumericError as exc:
        print(f"numeric error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
