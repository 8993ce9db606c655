"""Qubit states as Bloch vectors, fidelity in 4-vector form, measurement frames.

A qubit density matrix rho = (1 + r n.sigma)/2 is stored as a purity
``r`` in [0, 1] and a unit direction ``n``.  The Uhlmann fidelity between
two such states is a Euclidean dot product of the 4-vectors
(sqrt(1 - r^2), r*n), which is the only representation the estimation
code ever needs.  The model dimension flag ``d`` selects the full Bloch
ball (d = 3) or its x-z equatorial plane (d = 2, n_y fixed to 0).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Tuple

Vec3 = Tuple[float, float, float]

_UNIT_TOL = 1e-12

LAB_X: Vec3 = (1.0, 0.0, 0.0)
LAB_Y: Vec3 = (0.0, 1.0, 0.0)
LAB_Z: Vec3 = (0.0, 0.0, 1.0)


def dot(a: Vec3, b: Vec3) -> float:
    return a[0] * b[0] + a[1] * b[1] + a[2] * b[2]


def cross(a: Vec3, b: Vec3) -> Vec3:
    return (
        a[1] * b[2] - a[2] * b[1],
        a[2] * b[0] - a[0] * b[2],
        a[0] * b[1] - a[1] * b[0],
    )


def norm(a: Vec3) -> float:
    return math.sqrt(dot(a, a))


def unit(a: Vec3) -> Vec3:
    """Normalize a 3-vector; raises ValueError on the zero vector."""
    m = norm(a)
    if m == 0.0:
        raise ValueError("degenerate direction")
    return (a[0] / m, a[1] / m, a[2] / m)


@dataclass(frozen=True)
class BlochState:
    """Mixed qubit state (purity, direction) with model dimension d in {2, 3}."""

    r: float
    n: Vec3
    d: int = 3

    def __post_init__(self) -> None:
        if self.d not in (2, 3):
            raise ValueError(f"d must be 2 or 3, got {self.d}")
        if not 0.0 <= self.r <= 1.0:
            raise ValueError(f"purity out of range: {self.r}")
        if abs(norm(self.n) - 1.0) > _UNIT_TOL:
            raise ValueError(f"direction not unit length: {self.n}")
        if self.d == 2 and self.n[1] != 0.0:
            raise ValueError("d=2 states must lie in the x-z plane (n_y = 0)")


@dataclass(frozen=True)
class FourVector:
    """Unit 4-vector (sqrt(1 - r^2), r*n) attached to a Bloch state."""

    t: float
    v: Vec3

    def __post_init__(self) -> None:
        if self.t < 0.0:
            raise ValueError("time-like component must be nonnegative")
        if abs(self.t * self.t + dot(self.v, self.v) - 1.0) > _UNIT_TOL:
            raise ValueError("4-vector is not normalized")


def four_vector(s: BlochState) -> FourVector:
    """Map a state to the 4-vector in which fidelity is a dot product."""
    t = math.sqrt(max(0.0, 1.0 - s.r * s.r))
    return FourVector(t, (s.r * s.n[0], s.r * s.n[1], s.r * s.n[2]))


def fidelity(a: BlochState, b: BlochState) -> float:
    """Uhlmann fidelity (tr sqrt(sqrt(rho') rho sqrt(rho')))^2 of two qubit states.

    Evaluated as (1 + ra.rb)/2 with the 4-vectors ra, rb; clamped to [0, 1]
    against last-ulp rounding.
    """
    ta = math.sqrt(max(0.0, 1.0 - a.r * a.r))
    tb = math.sqrt(max(0.0, 1.0 - b.r * b.r))
    f = 0.5 * (1.0 + ta * tb + a.r * b.r * dot(a.n, b.n))
    if f < 0.0:
        return 0.0
    if f > 1.0:
        return 1.0
    return f


@dataclass(frozen=True)
class Frame:
    """Right-handed orthonormal triad of measurement axes."""

    x: Vec3
    y: Vec3
    z: Vec3

    def __post_init__(self) -> None:
        for v in (self.x, self.y, self.z):
            if abs(norm(v) - 1.0) > _UNIT_TOL:
                raise ValueError("frame axis not unit length")
        if (
            abs(dot(self.x, self.y)) > _UNIT_TOL
            or abs(dot(self.y, self.z)) > _UNIT_TOL
            or abs(dot(self.z, self.x)) > _UNIT_TOL
        ):
            raise ValueError("frame axes not orthogonal")
        c = cross(self.x, self.y)
        if norm((c[0] - self.z[0], c[1] - self.z[1], c[2] - self.z[2])) > _UNIT_TOL:
            raise ValueError("frame is not right-handed")


LAB_FRAME = Frame(LAB_X, LAB_Y, LAB_Z)


def frame_from_z(n0: Vec3) -> Frame:
    """Deterministic right-handed frame with z along n0.

    x is built by Gram-Schmidt of a helper axis against n0: the helper is
    x-hat unless |n0 . x-hat| > 0.9, in which case y-hat is used (keeps the
    construction numerically stable for every unit input); y = z x x.
    """
    m = norm(n0)
    if m == 0.0:
        raise ValueError("degenerate direction")
    z = (n0[0] / m, n0[1] / m, n0[2] / m)
    h = LAB_X if abs(z[0]) <= 0.9 else LAB_Y
    proj = dot(h, z)
    x = unit((h[0] - proj * z[0], h[1] - proj * z[1], h[2] - proj * z[2]))
    y = cross(z, x)
    return Frame(x, y, z)


def frame_in_plane(n0: Vec3) -> Frame:
    """Right-handed frame for planar (d = 2) states: z along n0 within the
    x-z plane, x the in-plane transverse axis, y = y-hat.

    The generic helper-axis rule of frame_from_z would leave the plane when
    n0 is close to +/- x-hat, so the planar protocol uses this instead.
    """
    if n0[1] != 0.0:
        raise ValueError("planar frame requires an in-plane direction (n_y = 0)")
    m = math.hypot(n0[0], n0[2])
    if m == 0.0:
        raise ValueError("degenerate direction")
    z = (n0[0] / m, 0.0, n0[2] / m)
    x = (z[2], 0.0, -z[0])
    return Frame(x, LAB_Y, z)
