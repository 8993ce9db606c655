"""Quantum and classical Fisher information for qubit states, and the
trace bounds separating single-copy schemes from collective ones.

Everything is expressed in spherical coordinates theta_vec = (r, theta, phi)
(the phi row/column is dropped for d = 2).  The quantum Fisher information
matrix is

    H = diag[ 1/(1-r^2), r^2, r^2 sin^2(theta) ],

and a projective measurement along a unit axis a contributes the rank-1
classical matrix I = g g^T / (1 - (r n.a)^2) with
g = (n.a, r dn/dtheta.a, r dn/dphi.a).  Two scalars summarize how a scheme
compares with H:

* info_fraction = tr{H^-1 I}, which is <= 1 for any scheme built from
  single-copy projective measurements (and exactly 1 for each single axis);
* risk_trace   = tr{H I^-1}, which is therefore >= d^2, and which sets the
  asymptotic mean-fidelity risk via 1 - risk_trace/(4N).

Matrices are plain (d x d) numpy arrays.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import List, Optional, Tuple

import numpy as np

from .bloch import Vec3, dot, unit
from .prior import PriorSpec, mean_purity

_COND_LIMIT = 1e12
_POLE_TOL = 1e-12


@dataclass(frozen=True)
class SchemeSpec:
    """Convex combination of projective axes: ((axis, weight), ...)."""

    components: Tuple[Tuple[Vec3, float], ...]

    def __post_init__(self) -> None:
        if not self.components:
            raise ValueError("scheme needs at least one axis")
        total = 0.0
        for axis, weight in self.components:
            if weight < 0.0:
                raise ValueError(f"negative weight {weight}")
            if abs(math.sqrt(dot(axis, axis)) - 1.0) > 1e-9:
                raise ValueError(f"axis not unit length: {axis}")
            total += weight
        if abs(total - 1.0) > 1e-12:
            raise ValueError(f"weights sum to {total}, expected 1")


def single_axis_scheme(axis: Vec3) -> SchemeSpec:
    return SchemeSpec(((unit(axis), 1.0),))


def lab_axes_scheme(d: int) -> SchemeSpec:
    """Equal-weight scheme on the fixed lab axes (x, z for d=2; x, y, z for d=3)."""
    if d == 2:
        return SchemeSpec((((1.0, 0.0, 0.0), 0.5), ((0.0, 0.0, 1.0), 0.5)))
    w = 1.0 / 3.0
    return SchemeSpec(
        (((1.0, 0.0, 0.0), w), ((0.0, 1.0, 0.0), w), ((0.0, 0.0, 1.0), w))
    )


def direction(theta: float, phi: float, d: int) -> Vec3:
    """Unit direction at spherical coordinates (theta[, phi])."""
    if d == 2:
        return (math.sin(theta), 0.0, math.cos(theta))
    return (
        math.sin(theta) * math.cos(phi),
        math.sin(theta) * math.sin(phi),
        math.cos(theta),
    )


def qfi(r: float, theta: float, d: int) -> np.ndarray:
    """Quantum Fisher information matrix diag[1/(1-r^2), r^2, r^2 sin^2 theta].

    Only defined at interior points: the purity boundary r in {0, 1} and
    (for d=3) the coordinate poles sin(theta) = 0 raise.
    """
    if d not in (2, 3):
        raise ValueError(f"d must be 2 or 3, got {d}")
    if r <= 0.0 or r >= 1.0:
        raise ValueError("QFI singular at purity boundary")
    if d == 2:
        return np.diag([1.0 / (1.0 - r * r), r * r])
    st = math.sin(theta)
    if abs(st) < _POLE_TOL:
        raise ValueError("coordinate singularity at pole")
    return np.diag([1.0 / (1.0 - r * r), r * r, r * r * st * st])


def _gradient(r: float, theta: float, phi: float, axis: Vec3, d: int):
    """(n.a, dp+/dtheta-vec scaled) pieces for a projective axis."""
    if d == 2:
        n_dot = math.sin(theta) * axis[0] + math.cos(theta) * axis[2]
        dth = math.cos(theta) * axis[0] - math.sin(theta) * axis[2]
        return n_dot, (n_dot, r * dth)
    st, ct = math.sin(theta), math.cos(theta)
    sp, cp = math.sin(phi), math.cos(phi)
    n_dot = st * cp * axis[0] + st * sp * axis[1] + ct * axis[2]
    dth = ct * cp * axis[0] + ct * sp * axis[1] - st * axis[2]
    dph = -st * sp * axis[0] + st * cp * axis[1]
    return n_dot, (n_dot, r * dth, r * dph)


def fisher_single_axis(
    r: float, theta: float, phi: float, axis: Vec3, d: int
) -> np.ndarray:
    """Per-copy classical Fisher information of measuring sigma.axis.

    Rank 1: a two-outcome measurement informs along a single direction in
    parameter space.  Raises when an outcome probability vanishes (pure
    state measured along its own axis).
    """
    if d not in (2, 3):
        raise ValueError(f"d must be 2 or 3, got {d}")
    axis = unit(axis)
    n_dot, g = _gradient(r, theta, phi, axis, d)
    den = 1.0 - (r * n_dot) ** 2
    if den <= 0.0:
        raise ValueError("divergent Fisher information")
    g_arr = np.asarray(g)
    return np.outer(g_arr, g_arr) / den


def fisher_scheme(
    r: float, theta: float, phi: float, scheme: SchemeSpec, d: int
) -> np.ndarray:
    """Per-copy information of measuring fraction w_a of copies along axis a."""
    out = np.zeros((d, d))
    for axis, weight in scheme.components:
        if weight > 0.0:
            out += weight * fisher_single_axis(r, theta, phi, axis, d)
    return out


def _inv_sym(m: np.ndarray) -> Optional[np.ndarray]:
    """Closed-form inverse of a symmetric 2x2/3x3 matrix.

    Returns None when the condition number exceeds the guard (treated as
    numerically singular).
    """
    eig = np.linalg.eigvalsh(m)
    big = float(np.max(np.abs(eig)))
    small = float(np.min(np.abs(eig)))
    if big == 0.0 or small == 0.0 or big / small > _COND_LIMIT:
        return None
    if m.shape == (2, 2):
        det = m[0, 0] * m[1, 1] - m[0, 1] * m[1, 0]
        return np.array([[m[1, 1], -m[0, 1]], [-m[1, 0], m[0, 0]]]) / det
    a, b, c = m[0]
    _, e, f = m[1]
    i = m[2, 2]
    det = a * (e * i - f * f) - b * (b * i - f * c) + c * (b * f - e * c)
    adj = np.array(
        [
            [e * i - f * f, c * f - b * i, b * f - c * e],
            [c * f - b * i, a * i - c * c, b * c - a * f],
            [b * f - c * e, b * c - a * f, a * e - b * b],
        ]
    )
    return adj / det


@dataclass(frozen=True)
class BoundStats:
    """Trace statistics of a scheme against the quantum information matrix."""

    info_fraction: float  # tr{H^-1 I}, <= 1 for single-copy projective schemes
    risk_trace: float  # tr{H I^-1}, >= d^2; +inf when I is rank deficient


def bound_stats(h: np.ndarray, i: np.ndarray) -> BoundStats:
    """Compute (tr{H^-1 I}, tr{H I^-1}); H must be invertible."""
    h_inv = _inv_sym(h)
    if h_inv is None:
        raise ValueError("quantum information matrix is numerically singular")
    info_fraction = float(np.trace(h_inv @ i))
    i_inv = _inv_sym(i)
    if i_inv is None:
        risk_trace = math.inf
    else:
        risk_trace = float(np.trace(h @ i_inv))
    return BoundStats(info_fraction, risk_trace)


def predicted_fidelity(h: np.ndarray, i: np.ndarray, n_copies: int) -> float:
    """Asymptotic mean fidelity 1 - tr{H I^-1}/(4N) of a scheme at one point."""
    i_inv = _inv_sym(i)
    if i_inv is None:
        raise ValueError("information matrix is numerically singular")
    return 1.0 - float(np.trace(h @ i_inv)) / (4.0 * n_copies)


def separable_constant(d: int) -> float:
    """Large-N limit of N(1-F) attainable with single-copy measurements."""
    return d * d / 4.0


def collective_constant(prior: PriorSpec, d: int) -> float:
    """Large-N limit of N(1-F) for the optimal unrestricted joint measurement.

    (3 + 2 rbar)/4 with rbar the prior mean purity for d=3; 1/2 for d=2
    independently of the purity prior.
    """
    if d == 2:
        return 0.5
    return (3.0 + 2.0 * mean_purity(prior)) / 4.0


def collective_bound(prior: PriorSpec, d: int, n_copies: int) -> float:
    """Reference fidelity of the optimal collective protocol at sample size N."""
    return 1.0 - collective_constant(prior, d) / n_copies


def bound_sweep(d: int, sweeps: int, rng: np.random.Generator) -> List[dict]:
    """Random interior-point sweep of the trace bounds, one row per point.

    Each sweep draws r in [0.05, 0.95] and a pole-free direction, then
    evaluates a single random projective axis (info fraction must equal 1;
    rank 1, so no finite risk trace) and the equal-weight lab-axes scheme
    (info fraction <= 1, risk trace >= d^2).  The ok flag aggregates all
    checks for the verify-bounds command.
    """
    rows: List[dict] = []
    d2 = float(d * d)
    for k in range(sweeps):
        r = 0.05 + 0.9 * rng.random()
        if d == 2:
            theta = 2.0 * math.pi * rng.random()
            phi = 0.0
            psi = 2.0 * math.pi * rng.random()
            rand_axis = (math.sin(psi), 0.0, math.cos(psi))
        else:
            theta = 0.2 + (math.pi - 0.4) * rng.random()
            phi = 2.0 * math.pi * rng.random()
            z = 2.0 * rng.random() - 1.0
            a_phi = 2.0 * math.pi * rng.random()
            s = math.sqrt(max(0.0, 1.0 - z * z))
            rand_axis = (s * math.cos(a_phi), s * math.sin(a_phi), z)
        h = qfi(r, theta, d)
        single = bound_stats(h, fisher_scheme(r, theta, phi, single_axis_scheme(rand_axis), d))
        lab = bound_stats(h, fisher_scheme(r, theta, phi, lab_axes_scheme(d), d))
        ok = (
            abs(single.info_fraction - 1.0) <= 1e-9
            and lab.info_fraction <= 1.0 + 1e-9
            and lab.risk_trace >= d2 - 1e-6
        )
        rows.append(
            {
                "index": k,
                "d": d,
                "r": r,
                "theta": theta,
                "phi": phi,
                "single_info_fraction": single.info_fraction,
                "single_risk_trace": single.risk_trace,
                "lab_info_fraction": lab.info_fraction,
                "lab_risk_trace": lab.risk_trace,
                "ok": ok,
            }
        )
    return rows
