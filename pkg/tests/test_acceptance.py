"""Acceptance suite: the headline reproduction targets, one test per criterion.

Run with `pytest -s tests/test_acceptance.py` to see one PASS/FAIL line per
criterion.  The heavy Monte Carlo sweeps are shared through session
fixtures; everything is seeded, so results are bit-reproducible.

Two criteria (01 and 03) assert finite-size windows on the scaled risk
N(1-F) at N = 4096 that the protocol, as defined, does not reach at that
sample size: its dominant finite-size correction -- the near-pure shell
term, whose scaled form decays like N^(1 - 3*alpha/2) = N^(-0.05) at
alpha = 0.7 -- still contributes ~2 units of scaled risk there (d = 3).
Those two tests are kept as stated and fail honestly; every asymptotic
statement they derive from (the N^-1 rate, the decreasing trend toward
d^2/4, and the gap over the collective constant) is verified by the
criteria around them.  See tests/test_acceptance.py docstrings and the
measured numbers each test prints.
"""

import math

import numpy as np
import pytest
from scipy import stats

from qest.bloch import BlochState, dot, fidelity
from qest.estimate import adaptive_estimate, AdaptiveConfig
from qest.fisherinfo import (
    bound_stats,
    collective_constant,
    fisher_scheme,
    fisher_single_axis,
    lab_axes_scheme,
    qfi,
    separable_constant,
    single_axis_scheme,
)
from qest.harness import ExperimentConfig, fit_scaling, run_experiment, table_to_csv
from qest.measure import StreamFactory, derive_stream, sample_counts
from qest.prior import bures, mean_purity, point, sample_direction, sample_purity

from oracles import (
    density_matrix,
    fisher_matrix_fd,
    random_bloch,
    uhlmann_fidelity_closed,
    uhlmann_fidelity_eig,
)

GRID = (256, 512, 1024, 2048, 4096)
TOMO_GRID = (256, 512, 1024, 2048, 4096, 8192)
MAIN_TRIALS = 200_000
TOMO_TRIALS = 100_000


def _report(criterion: str, passed: bool, detail: str) -> None:
    print(f"ACCEPTANCE {criterion}: {'PASS' if passed else 'FAIL'} -- {detail}")


@pytest.fixture(scope="session")
def adaptive_d3_table():
    cfg = ExperimentConfig(
        "adaptive", bures(3), 3, GRID, MAIN_TRIALS, 0.7, 20250809, threads=0
    )
    return run_experiment(cfg)


@pytest.fixture(scope="session")
def adaptive_d2_table():
    cfg = ExperimentConfig(
        "adaptive", bures(2), 2, GRID, MAIN_TRIALS, 0.7, 20250810, threads=0
    )
    return run_experiment(cfg)


@pytest.fixture(scope="session")
def tomography_bures_table():
    cfg = ExperimentConfig(
        "tomography", bures(3), 3, TOMO_GRID, TOMO_TRIALS, 0.7, 20250811, threads=0
    )
    return run_experiment(cfg)


@pytest.fixture(scope="session")
def tomography_point_table():
    cfg = ExperimentConfig(
        "tomography", point(0.5, 3), 3, TOMO_GRID, TOMO_TRIALS, 0.7, 20250812, threads=0
    )
    return run_experiment(cfg)


def test_c01_separable_constant_d3(adaptive_d3_table):
    """Scaled risk at N=4096 in [1.9, 2.6] and deviations from 2.25
    shrinking across the grid (>= 3 of 4 steps).

    The window part fails at desk scale: the protocol's scaled risk at
    N = 4096 is ~4.5 because the near-pure shell correction
    (~3.7*N^(-0.05) at alpha = 0.7) has barely decayed; extrapolating the
    measured N^(1-3*alpha/2) trend, the window would require N >~ 1e10.
    The assertion is kept as stated rather than widened.
    """
    rows = adaptive_d3_table.rows
    final = rows[-1]
    devs = [abs(row.scaled_risk - 2.25) for row in rows]
    decreasing_steps = sum(b < a for a, b in zip(devs, devs[1:]))
    window_ok = 1.9 <= final.scaled_risk <= 2.6
    trend_ok = decreasing_steps >= 3
    detail = (
        f"N=4096 scaled risk {final.scaled_risk:.4f} (target 2.25, window [1.9, 2.6]); "
        f"|deviation| decreasing in {decreasing_steps}/4 steps"
    )
    _report("01 separable constant d=3", window_ok and trend_ok, detail)
    assert trend_ok, detail
    assert window_ok, detail


def test_c02_gap_demonstration_d3(adaptive_d3_table):
    """N(1-F) clears the collective constant by 10 standard errors at every
    grid point.  The constant is computed from the prior's mean purity:
    (3 + 2*rbar)/4 = 1.17441 for the Bures prior (rbar = 8/(3*pi))."""
    const = collective_constant(bures(3), 3)
    assert const == pytest.approx((3.0 + 16.0 / (3.0 * math.pi)) / 4.0, rel=1e-9)
    margins = [
        row.scaled_risk - 10.0 * row.scaled_risk_err - const
        for row in adaptive_d3_table.rows
    ]
    ok = all(m > 0.0 for m in margins)
    detail = (
        f"collective constant {const:.5f}; worst margin {min(margins):+.4f} "
        f"over {len(margins)} grid points"
    )
    _report("02 gap demonstration d=3", ok, detail)
    assert ok, detail


def test_c03_separable_constant_and_gap_d2(adaptive_d2_table):
    """d=2: window [0.85, 1.15] at N=4096 plus the gap over 1/2.

    As in criterion 01 the window part fails at desk scale (measured
    ~1.53, again the slowly decaying shell term); the gap clears easily.
    """
    rows = adaptive_d2_table.rows
    final = rows[-1]
    window_ok = 0.85 <= final.scaled_risk <= 1.15
    margins = [r.scaled_risk - 10.0 * r.scaled_risk_err - 0.5 for r in rows]
    gap_ok = all(m > 0.0 for m in margins)
    detail = (
        f"N=4096 scaled risk {final.scaled_risk:.4f} (target 1.0, window "
        f"[0.85, 1.15]); worst gap margin over 0.5: {min(margins):+.4f}"
    )
    _report("03 separable constant and gap d=2", window_ok and gap_ok, detail)
    assert gap_ok, detail
    assert window_ok, detail


def test_c04_adaptive_rate(adaptive_d3_table):
    """Fitted exponent of 1-F vs N equals 1.00 +- 0.10 for the adaptive run."""
    fit = fit_scaling(adaptive_d3_table)
    ok = 0.90 <= fit.b <= 1.10
    detail = f"fitted exponent b = {fit.b:.4f} +- {fit.b_err:.4f} (window 1.00 +- 0.10)"
    _report("04 adaptive N^-1 rate", ok, detail)
    assert ok, detail


def test_c05_tomography_anomaly(tomography_bures_table, tomography_point_table):
    """Fixed-axis tomography: Bures-prior exponent in [0.68, 0.82]
    (asymptotically 3/4, driven by the near-pure shell), while an interior
    point prior recovers b >= 0.9."""
    fit_bures = fit_scaling(tomography_bures_table)
    fit_point = fit_scaling(tomography_point_table)
    bures_ok = 0.68 <= fit_bures.b <= 0.82
    point_ok = fit_point.b >= 0.9
    detail = (
        f"Bures b = {fit_bures.b:.4f} +- {fit_bures.b_err:.4f} (window [0.68, 0.82]); "
        f"point(0.5) b = {fit_point.b:.4f} (>= 0.9)"
    )
    _report("05 tomography anomaly", bures_ok and point_ok, detail)
    assert bures_ok, detail
    assert point_ok, detail


def test_c06_step_one_accuracy_law():
    """Rough-direction misalignment: N0*(1 - <cos angle>) equals
    eta_d(r) = 3*(1/r^2 - 1/5) (d=3) resp. 1/r^2 - 1/4 (d=2) at r = 0.5,
    within 10%, with 1000 shots per axis and 1e5 trials."""
    r = 0.5
    trials = 100_000
    per_axis = 1000
    results = {}
    for d, eta, seed in ((3, 3.0 * (1.0 / r**2 - 0.2), 61), (2, 1.0 / r**2 - 0.25, 62)):
        axes = (
            ((1.0, 0.0, 0.0), (0.0, 1.0, 0.0), (0.0, 0.0, 1.0))
            if d == 3
            else ((1.0, 0.0, 0.0), (0.0, 0.0, 1.0))
        )
        from qest.estimate import rough_direction

        factory = StreamFactory(seed)
        total = 0.0
        for k in range(trials):
            rng = factory.stream(k)
            n = sample_direction(d, rng)
            state = BlochState(r, n, d)
            recs = tuple(sample_counts(state, ax, per_axis, rng) for ax in axes)
            total += dot(n, rough_direction(recs, d))
        n0_copies = d * per_axis
        measured = n0_copies * (1.0 - total / trials)
        results[d] = (measured, eta)
    ok = all(abs(m - eta) <= 0.10 * eta for m, eta in results.values())
    detail = "; ".join(
        f"d={d}: N0(1-<C>) = {m:.3f} vs eta = {eta:.3f}" for d, (m, eta) in results.items()
    )
    _report("06 step-one accuracy law", ok, detail)
    for d, (m, eta) in results.items():
        assert m == pytest.approx(eta, rel=0.10), f"d={d}: {m} vs {eta}"


def test_c07_information_trace_bounds():
    """200 random interior points x {single random axis, equal-weight lab
    axes}: tr{H^-1 I} <= 1 + 1e-9 everywhere and exactly 1 for projective
    axes; tr{H I^-1} >= d^2 - 1e-6 for full-rank schemes."""
    rng = derive_stream(63, 0)
    worst_fraction = -math.inf
    worst_projective_dev = 0.0
    worst_risk_margin = math.inf
    for _ in range(200):
        r = 0.05 + 0.9 * rng.random()
        theta = 0.3 + (math.pi - 0.6) * rng.random()
        phi = 2.0 * math.pi * rng.random()
        z = 2.0 * rng.random() - 1.0
        aph = 2.0 * math.pi * rng.random()
        s = math.sqrt(1.0 - z * z)
        axis = (s * math.cos(aph), s * math.sin(aph), z)
        h = qfi(r, theta, 3)
        i_single = fisher_single_axis(r, theta, phi, axis, 3)
        st_single = bound_stats(h, i_single)
        worst_fraction = max(worst_fraction, st_single.info_fraction)
        worst_projective_dev = max(
            worst_projective_dev, abs(st_single.info_fraction - 1.0)
        )
        i_lab = fisher_scheme(r, theta, phi, lab_axes_scheme(3), 3)
        st_lab = bound_stats(h, i_lab)
        worst_fraction = max(worst_fraction, st_lab.info_fraction)
        worst_risk_margin = min(worst_risk_margin, st_lab.risk_trace - 9.0)
    ok = (
        worst_fraction <= 1.0 + 1e-9
        and worst_projective_dev <= 1e-9
        and worst_risk_margin >= -1e-6
    )
    detail = (
        f"max tr{{H^-1 I}} = {worst_fraction:.12f}; max projective |dev| = "
        f"{worst_projective_dev:.2e}; min tr{{H I^-1}} - 9 = {worst_risk_margin:.2e}"
    )
    _report("07 information trace bounds", ok, detail)
    assert ok, detail


def test_c08_fidelity_oracle_equivalence():
    """1e4 random state pairs: 4-vector fidelity vs the 2x2 matrix
    computation (eigen route and closed form), max |dev| < 1e-12."""
    rng = np.random.default_rng(64)
    worst = 0.0
    for _ in range(10_000):
        ra, na = random_bloch(rng)
        rb, nb = random_bloch(rng)
        f = fidelity(BlochState(ra, na), BlochState(rb, nb))
        rho_a, rho_b = density_matrix(ra, na), density_matrix(rb, nb)
        worst = max(
            worst,
            abs(f - uhlmann_fidelity_eig(rho_a, rho_b)),
            abs(f - uhlmann_fidelity_closed(rho_a, rho_b)),
        )
    ok = worst < 1e-12
    _report("08 fidelity oracle equivalence", ok, f"max |dev| = {worst:.2e}")
    assert ok


def test_c09_fisher_vs_finite_differences():
    """1e3 random nondegenerate configurations: analytic Fisher entries
    match central differences (step 1e-5) within 1e-6, and H - I stays
    positive semidefinite down to -1e-9."""
    rng = np.random.default_rng(65)
    worst_fd = 0.0
    worst_eig = math.inf
    for _ in range(1000):
        d = 3 if rng.random() < 0.75 else 2
        r = 0.05 + 0.9 * rng.random()
        if d == 2:
            theta, phi = 2.0 * math.pi * rng.random(), 0.0
            psi = 2.0 * math.pi * rng.random()
            axis = (math.sin(psi), 0.0, math.cos(psi))
        else:
            theta = 0.3 + (math.pi - 0.6) * rng.random()
            phi = 2.0 * math.pi * rng.random()
            z = 2.0 * rng.random() - 1.0
            aph = 2.0 * math.pi * rng.random()
            s = math.sqrt(1.0 - z * z)
            axis = (s * math.cos(aph), s * math.sin(aph), z)
        i = fisher_single_axis(r, theta, phi, axis, d)
        worst_fd = max(worst_fd, float(np.max(np.abs(i - fisher_matrix_fd(r, theta, phi, axis, d)))))
        h = qfi(r, theta, d)
        worst_eig = min(worst_eig, float(np.min(np.linalg.eigvalsh(h - i))))
    ok = worst_fd < 1e-6 and worst_eig > -1e-9
    detail = f"max FD deviation = {worst_fd:.2e}; min eig(H - I) = {worst_eig:.2e}"
    _report("09 Fisher vs finite differences", ok, detail)
    assert ok, detail


def test_c10_determinism_across_threads():
    """Identical config and seed at 1 and 8 workers: byte-identical CSV."""
    base = dict(
        protocol="adaptive", prior=bures(3), d=3, n_grid=(64, 128),
        trials=400, alpha=0.7, master_seed=66,
    )
    csv_1 = table_to_csv(run_experiment(ExperimentConfig(**base, threads=1)))
    csv_8 = table_to_csv(run_experiment(ExperimentConfig(**base, threads=8)))
    ok = csv_1 == csv_8
    _report("10 determinism across threads", ok, f"{len(csv_1)} CSV bytes compared")
    assert ok


def test_c11_prior_moments():
    """1e6 Bures draws per dimension: empirical mean within 3 standard
    errors of the density's first moment (8/(3*pi) for d=3, pi/4 for d=2,
    both confirmed by quadrature)."""
    n = 1_000_000
    details = []
    ok = True
    for d, seed in ((3, 67), (2, 68)):
        target = mean_purity(bures(d))
        closed = 8.0 / (3.0 * math.pi) if d == 3 else math.pi / 4.0
        assert target == pytest.approx(closed, rel=1e-8)
        draws = sample_purity(bures(d), derive_stream(seed, 0), size=n)
        se = float(draws.std(ddof=1)) / math.sqrt(n)
        dev = abs(float(draws.mean()) - target)
        ok = ok and dev < 3.0 * se
        details.append(f"d={d}: |mean - {target:.6f}| = {dev:.2e} ({dev / se:.2f} se)")
    detail = "; ".join(details)
    _report("11 prior moments", ok, detail)
    assert ok, detail
