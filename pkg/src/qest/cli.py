"""Command line interface.

Subcommands: run (Monte Carlo sweep -> CSV + JSON summary), fit (CSV ->
power-law fit JSON + figure), gap (CSV -> gap report JSON + figure),
verify-bounds (information-bound sweep table), sample-prior (prior draws).
Exit status: 0 success, 1 validation error, 2 runtime failure.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from typing import List, Optional

from . import harness
from .fisherinfo import bound_sweep
from .measure import derive_stream
from .prior import parse_prior, sample_direction, sample_purity


class _ValidationError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    """argparse that exits with status 1 on bad flags (default is 2)."""

    def error(self, message):
        self.print_usage(sys.stderr)
        print(f"{self.prog}: error: {message}", file=sys.stderr)
        sys.exit(1)


def _build_parser() -> _Parser:
    parser = _Parser(prog="qest", description=__doc__)
    sub = parser.add_subparsers(dest="command", parser_class=_Parser)

    run = sub.add_parser("run", help="run a Monte Carlo sweep over an N grid")
    run.add_argument("--protocol", choices=["adaptive", "tomography"])
    run.add_argument("--prior", help='prior: "bures", "point:<r0>" or "uniform"')
    run.add_argument("--d", type=int, choices=[2, 3])
    run.add_argument("--n-grid", help="comma-separated copy counts, e.g. 256,1024")
    run.add_argument("--trials", type=int, help="trials per grid point")
    run.add_argument("--alpha", type=float, help="step-one exponent in (1/2, 1)")
    run.add_argument("--seed", type=int, help="master seed")
    run.add_argument("--threads", type=int, help="worker count (0 = auto)")
    run.add_argument("--out", help="output CSV path (JSON summary at same stem)")
    run.add_argument("--config", help="key=value config file (CLI overrides it)")

    fit = sub.add_parser("fit", help="fit 1-F = a*N^(-b) to a results CSV")
    fit.add_argument("--in", dest="in_path", required=True, help="results CSV")
    fit.add_argument("--out", help="fit JSON path (stdout when omitted)")
    fit.add_argument("--fig", help="figure path (default: <out stem>.png)")
    fit.add_argument("--no-fig", action="store_true", help="skip the figure")

    gap = sub.add_parser("gap", help="gap report for a results CSV")
    gap.add_argument("--in", dest="in_path", required=True, help="results CSV")
    gap.add_argument("--prior", help="override the prior recorded in the CSV")
    gap.add_argument("--d", type=int, choices=[2, 3], help="override d")
    gap.add_argument("--out", help="report JSON path (stdout when omitted)")
    gap.add_argument("--fig", help="figure path (default: <out stem>.png)")
    gap.add_argument("--no-fig", action="store_true", help="skip the figure")

    vb = sub.add_parser("verify-bounds", help="sweep the information-trace bounds")
    vb.add_argument("--d", type=int, choices=[2, 3], default=3)
    vb.add_argument("--sweeps", type=int, default=200)
    vb.add_argument("--seed", type=int, default=0)
    vb.add_argument("--out", help="CSV path (stdout table when omitted)")

    sp = sub.add_parser("sample-prior", help="emit prior draws for inspection")
    sp.add_argument("--prior", required=True)
    sp.add_argument("--d", type=int, choices=[2, 3], default=3)
    sp.add_argument("--count", type=int, default=10000)
    sp.add_argument("--seed", type=int, default=0)
    sp.add_argument("--out", help="CSV path (stdout when omitted)")

    return parser


_RUN_DEFAULTS = {
    "protocol": "adaptive",
    "prior": "bures",
    "d": 3,
    "n_grid": "256,512,1024,2048,4096",
    "trials": 100000,
    "alpha": 0.7,
    "seed": 0,
    "threads": None,
    "out": None,
}

_RUN_TYPES = {
    "protocol": str,
    "prior": str,
    "d": int,
    "n_grid": str,
    "trials": int,
    "alpha": float,
    "seed": int,
    "threads": int,
    "out": str,
}


def _merge_run_settings(args: argparse.Namespace) -> dict:
    """Resolve run settings: CLI flag > config file > QEST_THREADS > default."""
    settings = dict(_RUN_DEFAULTS)
    if args.config is not None:
        try:
            file_values = harness.load_config_file(args.config)
        except OSError as exc:
            raise _ValidationError(f"--config: cannot read {args.config}: {exc}")
        except ValueError as exc:
            raise _ValidationError(f"--config: {exc}")
        for key, raw in file_values.items():
            if key not in settings:
                raise _ValidationError(f"--config: unknown key {key!r}")
            try:
                settings[key] = _RUN_TYPES[key](raw)
            except ValueError:
                raise _ValidationError(f"--config: invalid value for {key}: {raw!r}")
    for key in ("protocol", "prior", "d", "trials", "alpha", "seed", "threads", "out"):
        value = getattr(args, key)
        if value is not None:
            settings[key] = value
    if args.n_grid is not None:
        settings["n_grid"] = args.n_grid
    if settings["threads"] is None:
        env = os.environ.get(harness.THREADS_ENV_VAR)
        if env is not None:
            try:
                settings["threads"] = int(env)
            except ValueError:
                raise _ValidationError(
                    f"{harness.THREADS_ENV_VAR}: invalid value {env!r}"
                )
        else:
            settings["threads"] = 0
    return settings


def _cmd_run(args: argparse.Namespace) -> int:
    settings = _merge_run_settings(args)
    if settings["out"] is None:
        raise _ValidationError("--out is required for run")
    try:
        grid = harness.parse_n_grid(settings["n_grid"])
        cfg = harness.build_config(
            protocol=settings["protocol"],
            prior_text=settings["prior"],
            d=settings["d"],
            n_grid=grid,
            trials=settings["trials"],
            alpha=settings["alpha"],
            master_seed=settings["seed"],
            threads=settings["threads"],
            out_path=settings["out"],
        )
    except ValueError as exc:
        raise _ValidationError(str(exc))
    table = harness.run_experiment(cfg)
    harness.write_table_csv(table, cfg.out_path)
    json_path = os.path.splitext(cfg.out_path)[0] + ".json"
    harness.write_summary_json(cfg, table, json_path)
    for row in table.rows:
        err = "" if row.scaled_risk_err is None else f" +- {row.scaled_risk_err:.3g}"
        print(f"N={row.N:>8d}  mean F={row.mean_fidelity:.6f}  "
              f"N(1-F)={row.scaled_risk:.4f}{err}")
    print(f"wrote {cfg.out_path} and {json_path}")
    return 0


def _default_fig(out: Optional[str], fig: Optional[str], no_fig: bool) -> Optional[str]:
    if no_fig:
        return None
    if fig is not None:
        return fig
    if out is not None:
        return os.path.splitext(out)[0] + ".png"
    return None


def _cmd_fit(args: argparse.Namespace) -> int:
    table = harness.read_table_csv(args.in_path)
    fit = harness.fit_scaling(table)
    payload = {
        "a": fit.a,
        "b": fit.b,
        "a_err": fit.a_err,
        "b_err": fit.b_err,
        "gof": fit.gof,
    }
    text = json.dumps(payload, indent=2)
    if args.out:
        with open(args.out, "w") as fh:
            fh.write(text + "\n")
        print(f"wrote {args.out}")
    else:
        print(text)
    fig_path = _default_fig(args.out, args.fig, args.no_fig)
    if fig_path:
        from .report import render_fit_figure

        render_fit_figure(table, fit, fig_path)
        print(f"wrote {fig_path}")
    return 0


def _cmd_gap(args: argparse.Namespace) -> int:
    table = harness.read_table_csv(args.in_path)
    d = args.d if args.d is not None else table.d
    prior_text = args.prior if args.prior is not None else table.prior_label
    try:
        prior = parse_prior(prior_text, d)
    except ValueError as exc:
        raise _ValidationError(f"--prior: {exc}")
    report = harness.gap_report(table, prior, d)
    text = json.dumps(report.to_dict(), indent=2)
    if args.out:
        with open(args.out, "w") as fh:
            fh.write(text + "\n")
        print(f"wrote {args.out}")
    else:
        print(text)
    fig_path = _default_fig(args.out, args.fig, args.no_fig)
    if fig_path:
        from .report import render_gap_figure

        render_gap_figure(report, fig_path)
        print(f"wrote {fig_path}")
    return 0


def _cmd_verify_bounds(args: argparse.Namespace) -> int:
    if args.sweeps < 1:
        raise _ValidationError("--sweeps must be >= 1")
    if args.seed < 0:
        raise _ValidationError("--seed must be >= 0")
    rows = bound_sweep(args.d, args.sweeps, derive_stream(args.seed, 0))
    header = (
        "index,d,r,theta,phi,single_info_fraction,single_risk_trace,"
        "lab_info_fraction,lab_risk_trace,ok"
    )
    lines = [header]
    for row in rows:
        lines.append(
            f"{row['index']},{row['d']},{row['r']!r},{row['theta']!r},"
            f"{row['phi']!r},{row['single_info_fraction']!r},"
            f"{row['single_risk_trace']!r},{row['lab_info_fraction']!r},"
            f"{row['lab_risk_trace']!r},{row['ok']}"
        )
    text = "\n".join(lines) + "\n"
    if args.out:
        with open(args.out, "w") as fh:
            fh.write(text)
        print(f"wrote {args.out}")
    else:
        sys.stdout.write(text)
    failures = sum(1 for row in rows if not row["ok"])
    total = len(rows)
    print(f"verify-bounds: {total - failures}/{total} checks passed")
    if failures:
        print(f"verify-bounds: {failures} violations found", file=sys.stderr)
        return 2
    return 0


def _cmd_sample_prior(args: argparse.Namespace) -> int:
    if args.count < 1:
        raise _ValidationError("--count must be >= 1")
    if args.seed < 0:
        raise _ValidationError("--seed must be >= 0")
    try:
        prior = parse_prior(args.prior, args.d)
    except ValueError as exc:
        raise _ValidationError(f"--prior: {exc}")
    rng = derive_stream(args.seed, 0)
    rs = sample_purity(prior, rng, size=args.count)
    ns = sample_direction(args.d, rng, size=args.count)
    lines = ["r,nx,ny,nz"]
    for k in range(args.count):
        lines.append(
            f"{float(rs[k])!r},{float(ns[k, 0])!r},{float(ns[k, 1])!r},{float(ns[k, 2])!r}"
        )
    text = "\n".join(lines) + "\n"
    if args.out:
        with open(args.out, "w") as fh:
            fh.write(text)
        print(f"wrote {args.out}")
    else:
        sys.stdout.write(text)
    return 0


_COMMANDS = {
    "run": _cmd_run,
    "fit": _cmd_fit,
    "gap": _cmd_gap,
    "verify-bounds": _cmd_verify_bounds,
    "sample-prior": _cmd_sample_prior,
}


def main(argv: Optional[List[str]] = None) -> int:
    parser = _build_parser()
    args = parser.parse_args(argv)
    if args.command is None:
        parser.print_help()
        return 1
    try:
        return _COMMANDS[args.command](args)
    except _ValidationError as exc:
        print(f"qest {args.command}: error: {exc}", file=sys.stderr)
        return 1
    except ValueError as exc:
        print(f"qest {args.command}: error: {exc}", file=sys.stderr)
        return 1
    except OSError as exc:
        print(f"qest {args.command}: failed: {exc}", file=sys.stderr)
        return 2
    except Exception as exc:  # pragma: no cover - unexpected runtime failure
        print(f"qest {args.command}: failed: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
