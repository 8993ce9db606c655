"""Estimation protocols: one-step adaptive LOCC scheme and fixed-axis tomography.

The adaptive protocol spends N0 = N^alpha copies (rounded up to a multiple
of d) on a rough direction estimate from fixed lab axes, then measures the
remaining copies along a frame rotated so its z-axis points at the rough
direction: N1 shots along z and along each of the d-1 transverse axes.
The outcome frequencies alpha_i give chi_i = 2*alpha_i - 1, from which the
estimate is R = chi_z, sin(theta-hat) = sqrt(chi_x^2 + chi_y^2)/R,
phi-hat = atan2(chi_y, chi_x), with the degenerate cases (chi_z <= 0,
transverse part exceeding R) resolved by clamping.

Tomography splits N evenly over the d fixed lab axes and projects the raw
frequency vector onto the unit ball.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional, Sequence, Tuple

from .bloch import (
    LAB_FRAME,
    BlochState,
    Frame,
    Vec3,
    fidelity,
    frame_from_z,
    frame_in_plane,
)
from .measure import RngStream, ShotRecord, sample_counts
from .prior import PriorSpec, sample_state

PROTOCOLS = ("adaptive", "tomography")

DEFAULT_ALPHA = 0.7  # above 2/3 the step-one boundary terms stay subdominant


@dataclass(frozen=True)
class AdaptiveConfig:
    """Copy budget for the adaptive protocol: total N, split exponent, dimension."""

    N: int
    alpha: float = DEFAULT_ALPHA
    d: int = 3

    def __post_init__(self) -> None:
        if not 0.5 < self.alpha < 1.0:
            raise ValueError(f"alpha must lie in (1/2, 1), got {self.alpha}")
        if self.d not in (2, 3):
            raise ValueError(f"d must be 2 or 3, got {self.d}")
        split_copies(self.N, self.alpha, self.d)  # validates N


@dataclass(frozen=True)
class Estimate:
    """Protocol output: purity R and unit direction, itself a Bloch state."""

    R: float
    n_hat: Vec3
    d: int = 3

    def __post_init__(self) -> None:
        # reuse the state validation (range, unit norm, planarity for d=2)
        BlochState(self.R, self.n_hat, self.d)

    def as_state(self) -> BlochState:
        return BlochState(self.R, self.n_hat, self.d)


def split_copies(N: int, alpha: float, d: int) -> Tuple[int, int, int]:
    """Split N copies into (N0, per_axis_step1, N1).

    N0 = d * ceil(N^alpha / d) copies feed step one (N0/d per lab axis);
    N1 = floor((N - N0)/d) copies go to each step-two axis; the <= d-1
    leftover copies are discarded.
    """
    if N < 1:
        raise ValueError("sample too small for adaptive split")
    per_axis = math.ceil(N**alpha / d)
    n0 = d * per_axis
    n1 = (N - n0) // d
    if n1 < 1:
        raise ValueError("sample too small for adaptive split")
    return n0, per_axis, n1


def rough_direction(records: Sequence[ShotRecord], d: int) -> Vec3:
    """Direction guess from step-one counts on the fixed lab axes.

    records are ordered (x, y, z) for d=3 and (x, z) for d=2; the raw
    vector has components 2*(n_plus/n_shots) - 1 per axis.  The all-zero
    vector falls back to z-hat.
    """
    if len(records) != d:
        raise ValueError(f"expected {d} records, got {len(records)}")
    shots = records[0].n_shots
    if any(rec.n_shots != shots for rec in records):
        raise ValueError("mismatched shot counts across axes")
    if shots == 0:
        raise ValueError("empty records")
    if d == 2:
        vx = 2.0 * records[0].n_plus / shots - 1.0
        vz = 2.0 * records[1].n_plus / shots - 1.0
        m = math.hypot(vx, vz)
        if m == 0.0:
            return (0.0, 0.0, 1.0)
        return (vx / m, 0.0, vz / m)
    vx = 2.0 * records[0].n_plus / shots - 1.0
    vy = 2.0 * records[1].n_plus / shots - 1.0
    vz = 2.0 * records[2].n_plus / shots - 1.0
    m = math.sqrt(vx * vx + vy * vy + vz * vz)
    if m == 0.0:
        return (0.0, 0.0, 1.0)
    return (vx / m, vy / m, vz / m)


def chi_from_counts(
    records: Tuple[ShotRecord, Optional[ShotRecord], ShotRecord],
    n1: int,
    d: int,
) -> Tuple[float, float, float]:
    """Outcome statistics chi = 2*alpha - 1 from the step-two counts.

    records are (x, y, z) in the adapted frame; y is None for d=2 and its
    chi component is reported as 0 (unused downstream).
    """
    if n1 < 1:
        raise ValueError("step-two shot count must be positive")
    rec_x, rec_y, rec_z = records
    present = (rec_x, rec_z) if d == 2 else (rec_x, rec_y, rec_z)
    if d == 3 and rec_y is None:
        raise ValueError("d=3 requires a y-axis record")
    if any(rec.n_shots != n1 for rec in present):
        raise ValueError("mismatched shot counts across axes")
    chi_x = 2.0 * rec_x.n_plus / n1 - 1.0
    chi_y = 0.0 if d == 2 else 2.0 * rec_y.n_plus / n1 - 1.0
    chi_z = 2.0 * rec_z.n_plus / n1 - 1.0
    return (chi_x, chi_y, chi_z)


def chi_to_estimate(
    chi: Tuple[float, float, float], frame: Frame, d: int
) -> Estimate:
    """Estimate (R, n_hat) from chi in the given frame, in lab coordinates.

    R = chi_z clamped to [0, 1].  The transverse fraction
    s = sqrt(chi_x^2 + chi_y^2)/R is clamped to 1 (pushing the direction
    into the transverse plane), and R = 0 yields the frame z-axis.  For
    d=2 the y-component is dropped and the sign of chi_x orients the
    in-plane angle.
    """
    chi_x, chi_y, chi_z = chi
    for c in (chi_x, chi_y, chi_z):
        if not -1.0 <= c <= 1.0:
            raise ValueError(f"chi component out of range: {c}")
    if d == 2:
        chi_y = 0.0
    R = min(max(chi_z, 0.0), 1.0)
    if R == 0.0:
        return Estimate(0.0, frame.z, d)
    t = math.hypot(chi_x, chi_y)
    if t == 0.0:
        return Estimate(R, frame.z, d)
    s = t / R
    if s > 1.0:
        s = 1.0
    ux = chi_x / t
    uy = chi_y / t
    c = math.sqrt(max(0.0, 1.0 - s * s))
    sx, sy, sz = s * ux, s * uy, c
    n_hat = (
        sx * frame.x[0] + sy * frame.y[0] + sz * frame.z[0],
        sx * frame.x[1] + sy * frame.y[1] + sz * frame.z[1],
        sx * frame.x[2] + sy * frame.y[2] + sz * frame.z[2],
    )
    return Estimate(R, n_hat, d)


def _compose(frame: Frame, cx: float, cy: float, cz: float) -> Vec3:
    """Vector with components (cx, cy, cz) in the given frame, in global
    coordinates.  Exact for the standard lab frame (multiplications by
    0.0/1.0 only)."""
    return (
        cx * frame.x[0] + cy * frame.y[0] + cz * frame.z[0],
        cx * frame.x[1] + cy * frame.y[1] + cz * frame.z[1],
        cx * frame.x[2] + cy * frame.y[2] + cz * frame.z[2],
    )


def _map_frame(lab: Frame, local: Frame) -> Frame:
    """Express a frame whose axes are given in lab components globally."""
    return Frame(
        _compose(lab, *local.x),
        _compose(lab, *local.y),
        _compose(lab, *local.z),
    )


def adaptive_estimate(
    cfg: AdaptiveConfig,
    true_state: BlochState,
    rng: RngStream,
    lab: Frame = LAB_FRAME,
) -> Estimate:
    """Run the two-step adaptive protocol against a (simulated) true state.

    The true state enters only through the binomial outcome sampling; the
    estimator sees counts alone.  Step one consumes draws in lab-axis
    order (x, y, z for d=3; x, z for d=2), step two in frame order
    (z, x[, y]).  A rotated lab frame may be supplied (for d=2 it must
    keep y-hat as its y axis so states stay in the x-z plane).
    """
    d = cfg.d
    n0, per_axis, n1 = split_copies(cfg.N, cfg.alpha, d)
    if d == 2:
        recs = (
            sample_counts(true_state, lab.x, per_axis, rng),
            sample_counts(true_state, lab.z, per_axis, rng),
        )
        # the rough components live in the lab basis; build the adapted
        # frame there and map it out, so the whole protocol co-rotates
        # with the lab frame
        local = frame_in_plane(rough_direction(recs, 2))
        frame = local if lab is LAB_FRAME else _map_frame(lab, local)
        rec_z = sample_counts(true_state, frame.z, n1, rng)
        rec_x = sample_counts(true_state, frame.x, n1, rng)
        chi = chi_from_counts((rec_x, None, rec_z), n1, 2)
        return chi_to_estimate(chi, frame, 2)
    recs = (
        sample_counts(true_state, lab.x, per_axis, rng),
        sample_counts(true_state, lab.y, per_axis, rng),
        sample_counts(true_state, lab.z, per_axis, rng),
    )
    local = frame_from_z(rough_direction(recs, 3))
    frame = local if lab is LAB_FRAME else _map_frame(lab, local)
    rec_z = sample_counts(true_state, frame.z, n1, rng)
    rec_x = sample_counts(true_state, frame.x, n1, rng)
    rec_y = sample_counts(true_state, frame.y, n1, rng)
    chi = chi_from_counts((rec_x, rec_y, rec_z), n1, 3)
    return chi_to_estimate(chi, frame, 3)


def ball_project(v: Vec3, d: int = 3) -> Estimate:
    """Project a raw frequency vector onto the unit ball.

    Inside the ball (R, n_hat) = (|v|, v/|v|); outside, R = 1; the zero
    vector maps to R = 0 along z-hat.
    """
    m = math.sqrt(v[0] * v[0] + v[1] * v[1] + v[2] * v[2])
    if m == 0.0:
        return Estimate(0.0, (0.0, 0.0, 1.0), d)
    return Estimate(min(m, 1.0), (v[0] / m, v[1] / m, v[2] / m), d)


def tomography_estimate(
    N: int,
    d: int,
    true_state: BlochState,
    rng: RngStream,
    lab: Frame = LAB_FRAME,
) -> Estimate:
    """Fixed-axis tomography: floor(N/d) shots per lab axis, ball projection."""
    if d not in (2, 3):
        raise ValueError(f"d must be 2 or 3, got {d}")
    if N < d:
        raise ValueError(f"need at least d={d} copies, got {N}")
    shots = N // d
    if d == 2:
        fx = sample_counts(true_state, lab.x, shots, rng).plus_fraction
        fz = sample_counts(true_state, lab.z, shots, rng).plus_fraction
        v = _compose(lab, 2.0 * fx - 1.0, 0.0, 2.0 * fz - 1.0)
    else:
        fx = sample_counts(true_state, lab.x, shots, rng).plus_fraction
        fy = sample_counts(true_state, lab.y, shots, rng).plus_fraction
        fz = sample_counts(true_state, lab.z, shots, rng).plus_fraction
        v = _compose(lab, 2.0 * fx - 1.0, 2.0 * fy - 1.0, 2.0 * fz - 1.0)
    return ball_project(v, d)


def run_trial(
    protocol: str,
    prior: PriorSpec,
    N: int,
    alpha: float,
    rng: RngStream,
    lab: Frame = LAB_FRAME,
) -> float:
    """One Monte Carlo sample: draw a state, estimate it, return the fidelity."""
    state = sample_state(prior, rng)
    if protocol == "adaptive":
        est = adaptive_estimate(AdaptiveConfig(N, alpha, prior.d), state, rng, lab)
    elif protocol == "tomography":
        est = tomography_estimate(N, prior.d, state, rng, lab)
    else:
        raise ValueError(f"unknown protocol {protocol!r}")
    return fidelity(state, est.as_state())
