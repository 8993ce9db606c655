"""Figure rendering for the report commands (headless matplotlib)."""

from __future__ import annotations

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt

from .harness import GapReport, RunTable, ScalingFit


def render_fit_figure(table: RunTable, fit: ScalingFit, path: str) -> None:
    """Log-log risk curve with the fitted power law overlaid."""
    ns = [row.N for row in table.rows]
    risks = [1.0 - row.mean_fidelity for row in table.rows]
    errs = [row.std_err if row.std_err is not None else 0.0 for row in table.rows]

    fig, ax = plt.subplots(figsize=(6.0, 4.5))
    ax.errorbar(ns, risks, yerr=errs, fmt="o", ms=4, capsize=3, label="measured 1-F")
    xs = [ns[0] * (ns[-1] / ns[0]) ** (k / 100.0) for k in range(101)]
    ax.plot(
        xs,
        [fit.a * x ** (-fit.b) for x in xs],
        "-",
        lw=1,
        label=f"fit: {fit.a:.3g} N^(-{fit.b:.3f})",
    )
    ax.set_xscale("log")
    ax.set_yscale("log")
    ax.set_xlabel("copies N")
    ax.set_ylabel("mean infidelity 1-F")
    ax.set_title(f"{table.protocol}, d={table.d}, prior {table.prior_label}")
    ax.legend()
    ax.grid(True, which="both", alpha=0.3)
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)


def render_gap_figure(report: GapReport, path: str) -> None:
    """Scaled risk N(1-F) per grid point against the two benchmark constants."""
    ns = [row.N for row in report.rows]
    risks = [row.scaled_risk for row in report.rows]
    errs = [
        row.scaled_risk_err if row.scaled_risk_err is not None else 0.0
        for row in report.rows
    ]

    fig, ax = plt.subplots(figsize=(6.0, 4.5))
    ax.errorbar(ns, risks, yerr=errs, fmt="o-", ms=4, capsize=3, label="N(1-F)")
    ax.axhline(
        report.separable_constant,
        color="tab:red",
        ls="--",
        label=f"separable limit d^2/4 = {report.separable_constant:.4g}",
    )
    ax.axhline(
        report.collective_constant,
        color="tab:green",
        ls=":",
        label=f"collective limit = {report.collective_constant:.4g}",
    )
    ax.set_xscale("log")
    ax.set_xlabel("copies N")
    ax.set_ylabel("scaled risk N(1-F)")
    verdict = "demonstrated" if report.gap_demonstrated else "not demonstrated"
    ax.set_title(
        f"{report.protocol}, d={report.d}, prior {report.prior_label}: gap {verdict}"
    )
    ax.legend()
    ax.grid(True, which="both", alpha=0.3)
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)
