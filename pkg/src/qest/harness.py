"""Experiment orchestration: Monte Carlo sweeps over N, scaling fits, the
separable-vs-collective gap report, and deterministic CSV/JSON output.

Trial t of grid row i uses the RNG stream indexed by the global counter
i*trials + t (row-major over the N grid), so results are a pure function
of (config, master_seed).  Trials are aggregated in fixed-size chunks that
are combined in index order, which makes the output bytes identical for
every thread count.
"""

from __future__ import annotations

import concurrent.futures
import json
import math
import os
from dataclasses import dataclass
from typing import List, Optional, Sequence, Tuple

from .estimate import PROTOCOLS, run_trial
from .fisherinfo import collective_constant, separable_constant
from .measure import StreamFactory
from .prior import PriorSpec, parse_prior

CSV_HEADER = (
    "protocol,d,prior,alpha,N,trials,mean_fidelity,std_err,scaled_risk,scaled_risk_err"
)
_NA = "NA"

# trials per aggregation chunk; fixed so that float summation order (and
# hence the output bytes) cannot depend on the worker count
CHUNK_TRIALS = 2048

THREADS_ENV_VAR = "QEST_THREADS"


@dataclass(frozen=True)
class ExperimentConfig:
    """Full description of one Monte Carlo sweep."""

    protocol: str
    prior: PriorSpec
    d: int
    n_grid: Tuple[int, ...]
    trials: int
    alpha: float = 0.7
    master_seed: int = 0
    threads: int = 0  # 0 = one worker per CPU
    out_path: Optional[str] = None

    def __post_init__(self) -> None:
        if self.protocol not in PROTOCOLS:
            raise ValueError(f"unknown protocol {self.protocol!r}")
        if self.d != self.prior.d:
            raise ValueError("config d does not match the prior's d")
        if not self.n_grid:
            raise ValueError("empty N grid")
        if any(b <= a for a, b in zip(self.n_grid, self.n_grid[1:])):
            raise ValueError("n_grid must be strictly increasing")
        if self.trials < 1:
            raise ValueError("trials must be >= 1")
        if self.threads < 0:
            raise ValueError("threads must be >= 0")


@dataclass(frozen=True)
class RunRow:
    """Mean-fidelity summary of all trials at one sample size N."""

    N: int
    trials: int
    mean_fidelity: float
    std_err: Optional[float]
    scaled_risk: float
    scaled_risk_err: Optional[float]


@dataclass(frozen=True)
class RunTable:
    """Per-N results of one experiment, plus the identifying metadata."""

    protocol: str
    d: int
    prior_label: str
    alpha: float
    rows: Tuple[RunRow, ...]


def _run_chunk(args) -> Tuple[float, float]:
    """Sum of (1-f) and (1-f)^2 over one contiguous block of trial indices."""
    protocol, prior, n_copies, alpha, master_seed, lo, hi = args
    factory = StreamFactory(master_seed)
    s1 = 0.0
    s2 = 0.0
    for k in range(lo, hi):
        f = run_trial(protocol, prior, n_copies, alpha, factory.stream(k))
        risk = 1.0 - f
        s1 += risk
        s2 += risk * risk
    return s1, s2


def resolve_threads(threads: int) -> int:
    if threads > 0:
        return threads
    return os.cpu_count() or 1


def run_experiment(cfg: ExperimentConfig) -> RunTable:
    """Run the full sweep; deterministic for fixed (config, master_seed)."""
    tasks = []
    for i, n_copies in enumerate(cfg.n_grid):
        base = i * cfg.trials
        for lo in range(0, cfg.trials, CHUNK_TRIALS):
            hi = min(lo + CHUNK_TRIALS, cfg.trials)
            tasks.append(
                (
                    cfg.protocol,
                    cfg.prior,
                    n_copies,
                    cfg.alpha,
                    cfg.master_seed,
                    base + lo,
                    base + hi,
                )
            )
    workers = resolve_threads(cfg.threads)
    if workers == 1 or len(tasks) == 1:
        partials = [_run_chunk(t) for t in tasks]
    else:
        with concurrent.futures.ProcessPoolExecutor(max_workers=workers) as pool:
            partials = list(pool.map(_run_chunk, tasks))

    rows: List[RunRow] = []
    idx = 0
    chunks_per_row = -(-cfg.trials // CHUNK_TRIALS)
    for n_copies in cfg.n_grid:
        s1 = 0.0
        s2 = 0.0
        for _ in range(chunks_per_row):  # fixed combination order
            c1, c2 = partials[idx]
            s1 += c1
            s2 += c2
            idx += 1
        t = cfg.trials
        mean_risk = s1 / t
        mean_f = 1.0 - mean_risk
        if t >= 2:
            var = max(0.0, (s2 - s1 * s1 / t) / (t - 1))
            std_err = math.sqrt(var / t)
            scaled_err = n_copies * std_err
        else:
            std_err = None
            scaled_err = None
        rows.append(
            RunRow(n_copies, t, mean_f, std_err, n_copies * mean_risk, scaled_err)
        )
    return RunTable(cfg.protocol, cfg.d, cfg.prior.label, cfg.alpha, tuple(rows))


@dataclass(frozen=True)
class ScalingFit:
    """Power-law fit 1 - F = a * N^(-b) with standard errors and a
    goodness-of-fit statistic (chi^2 per degree of freedom when the rows
    carry standard errors, residual sum of squares otherwise)."""

    a: float
    b: float
    a_err: float
    b_err: float
    gof: float


def fit_scaling(table: RunTable) -> ScalingFit:
    """Weighted least squares of log(1-F) on log N.

    Per-point standard errors are propagated to log scale
    (sigma_log = std_err/(1-F)) and used as inverse-variance weights; rows
    without a standard error fall back to an unweighted fit.
    """
    rows = table.rows
    if len(rows) < 3:
        raise ValueError("scaling fit needs at least 3 grid points")
    risks = [1.0 - row.mean_fidelity for row in rows]
    if any(risk <= 0.0 for risk in risks):
        raise ValueError("degenerate risk")
    x = [math.log(row.N) for row in rows]
    y = [math.log(risk) for risk in risks]
    weighted = all(row.std_err is not None and row.std_err > 0.0 for row in rows)
    if weighted:
        w = [(risk / row.std_err) ** 2 for risk, row in zip(risks, rows)]
    else:
        w = [1.0] * len(rows)

    sw = sum(w)
    swx = sum(wi * xi for wi, xi in zip(w, x))
    swy = sum(wi * yi for wi, yi in zip(w, y))
    swxx = sum(wi * xi * xi for wi, xi in zip(w, x))
    swxy = sum(wi * xi * yi for wi, xi, yi in zip(w, x, y))
    det = sw * swxx - swx * swx
    if det <= 0.0:
        raise ValueError("singular design (identical N values?)")
    intercept = (swxx * swy - swx * swxy) / det
    slope = (sw * swxy - swx * swy) / det
    chi2 = sum(
        wi * (yi - intercept - slope * xi) ** 2 for wi, xi, yi in zip(w, x, y)
    )
    dof = len(rows) - 2
    # covariance of (intercept, slope) from the normal equations; for the
    # unweighted fall-back, scale by the residual variance estimate
    scale = 1.0 if weighted else chi2 / dof if dof > 0 else 0.0
    var_intercept = scale * swxx / det
    var_slope = scale * sw / det
    a = math.exp(intercept)
    return ScalingFit(
        a=a,
        b=-slope,
        a_err=a * math.sqrt(max(0.0, var_intercept)),
        b_err=math.sqrt(max(0.0, var_slope)),
        gof=chi2 / dof if (weighted and dof > 0) else chi2,
    )


@dataclass(frozen=True)
class GapRow:
    N: int
    scaled_risk: float
    scaled_risk_err: Optional[float]
    exceeds_collective: bool


@dataclass(frozen=True)
class GapReport:
    """Scaled risk N(1-F) per grid point against the two benchmark constants.

    gap_demonstrated is judged at the largest N: the scaled risk must clear
    the collective constant by ten standard errors.
    """

    protocol: str
    d: int
    prior_label: str
    separable_constant: float
    collective_constant: float
    rows: Tuple[GapRow, ...]
    gap_demonstrated: bool

    def to_dict(self) -> dict:
        return {
            "protocol": self.protocol,
            "d": self.d,
            "prior": self.prior_label,
            "separable_constant": self.separable_constant,
            "collective_constant": self.collective_constant,
            "rows": [
                {
                    "N": row.N,
                    "scaled_risk": row.scaled_risk,
                    "scaled_risk_err": row.scaled_risk_err,
                    "exceeds_collective": row.exceeds_collective,
                }
                for row in self.rows
            ],
            "gap_demonstrated": self.gap_demonstrated,
        }


def gap_report(table: RunTable, prior: PriorSpec, d: int) -> GapReport:
    """Compare the measured scaled risk against d^2/4 and the collective constant."""
    sep = separable_constant(d)
    coll = collective_constant(prior, d)
    rows = []
    for row in table.rows:
        if row.scaled_risk_err is None:
            exceeds = False
        else:
            exceeds = row.scaled_risk - 10.0 * row.scaled_risk_err > coll
        rows.append(GapRow(row.N, row.scaled_risk, row.scaled_risk_err, exceeds))
    return GapReport(
        protocol=table.protocol,
        d=d,
        prior_label=prior.label,
        separable_constant=sep,
        collective_constant=coll,
        rows=tuple(rows),
        gap_demonstrated=rows[-1].exceeds_collective,
    )


def _fmt(value: Optional[float]) -> str:
    return _NA if value is None else repr(value)


def table_to_csv(table: RunTable) -> str:
    """Render the exact CSV wire format (full-precision floats, NA markers)."""
    lines = [CSV_HEADER]
    for row in table.rows:
        lines.append(
            ",".join(
                (
                    table.protocol,
                    str(table.d),
                    table.prior_label,
                    repr(table.alpha),
                    str(row.N),
                    str(row.trials),
                    repr(row.mean_fidelity),
                    _fmt(row.std_err),
                    repr(row.scaled_risk),
                    _fmt(row.scaled_risk_err),
                )
            )
        )
    return "\n".join(lines) + "\n"


def write_table_csv(table: RunTable, path: str) -> None:
    with open(path, "w", newline="") as fh:
        fh.write(table_to_csv(table))


def read_table_csv(path: str) -> RunTable:
    """Parse a results CSV back into a RunTable (strict header check)."""
    with open(path) as fh:
        lines = [line.strip() for line in fh if line.strip()]
    if not lines or lines[0] != CSV_HEADER:
        raise ValueError(f"unrecognized CSV header in {path}")
    meta = None
    rows = []
    for line in lines[1:]:
        parts = line.split(",")
        if len(parts) != 10:
            raise ValueError(f"malformed CSV row: {line!r}")
        protocol, d_s, prior_label, alpha_s = parts[0], parts[1], parts[2], parts[3]
        key = (protocol, int(d_s), prior_label, float(alpha_s))
        if meta is None:
            meta = key
        elif meta != key:
            raise ValueError("CSV mixes rows from different experiments")
        std_err = None if parts[7] == _NA else float(parts[7])
        scaled_err = None if parts[9] == _NA else float(parts[9])
        rows.append(
            RunRow(
                N=int(parts[4]),
                trials=int(parts[5]),
                mean_fidelity=float(parts[6]),
                std_err=std_err,
                scaled_risk=float(parts[8]),
                scaled_risk_err=scaled_err,
            )
        )
    if meta is None:
        raise ValueError(f"no data rows in {path}")
    return RunTable(meta[0], meta[1], meta[2], meta[3], tuple(rows))


def summary_dict(cfg: ExperimentConfig, table: RunTable) -> dict:
    """JSON summary: config echo, both benchmark constants, CSV-keyed rows."""
    return {
        "config": {
            "protocol": cfg.protocol,
            "d": cfg.d,
            "prior": cfg.prior.label,
            "alpha": cfg.alpha,
            "n_grid": list(cfg.n_grid),
            "trials": cfg.trials,
            "seed": cfg.master_seed,
            "threads": cfg.threads,
        },
        "separable_constant": separable_constant(cfg.d),
        "collective_constant": collective_constant(cfg.prior, cfg.d),
        "rows": [
            {
                "protocol": table.protocol,
                "d": table.d,
                "prior": table.prior_label,
                "alpha": table.alpha,
                "N": row.N,
                "trials": row.trials,
                "mean_fidelity": row.mean_fidelity,
                "std_err": row.std_err,
                "scaled_risk": row.scaled_risk,
                "scaled_risk_err": row.scaled_risk_err,
            }
            for row in table.rows
        ],
    }


def write_summary_json(cfg: ExperimentConfig, table: RunTable, path: str) -> None:
    with open(path, "w") as fh:
        json.dump(summary_dict(cfg, table), fh, indent=2)
        fh.write("\n")


def load_config_file(path: str) -> dict:
    """Read a line-oriented key=value config file ('#' starts a comment)."""
    values = {}
    with open(path) as fh:
        for lineno, raw in enumerate(fh, start=1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise ValueError(f"{path}:{lineno}: expected key=value, got {raw!r}")
            key, value = line.split("=", 1)
            values[key.strip()] = value.strip()
    return values


def parse_n_grid(text: str) -> Tuple[int, ...]:
    """Parse a comma-separated list of copy counts."""
    try:
        grid = tuple(int(part) for part in text.split(",") if part.strip())
    except ValueError:
        raise ValueError(f"invalid N grid {text!r}") from None
    if not grid:
        raise ValueError(f"invalid N grid {text!r}")
    return grid


def build_config(
    protocol: str,
    prior_text: str,
    d: int,
    n_grid: Sequence[int],
    trials: int,
    alpha: float = 0.7,
    master_seed: int = 0,
    threads: int = 0,
    out_path: Optional[str] = None,
) -> ExperimentConfig:
    """Convenience constructor used by the CLI (prior given as its string form)."""
    prior = parse_prior(prior_text, d)
    return ExperimentConfig(
        protocol=protocol,
        prior=prior,
        d=d,
        n_grid=tuple(n_grid),
        trials=trials,
        alpha=alpha,
        master_seed=master_seed,
        threads=threads,
        out_path=out_path,
    )
