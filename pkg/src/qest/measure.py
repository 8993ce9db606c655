"""Projective spin measurements on state copies, and reproducible RNG streams.

Measuring sigma.a on rho = (1 + r n.sigma)/2 gives outcome + with
probability (1 + r n.a)/2; a batch of shots is a single exact binomial
draw.  Streams are counter-based: a Philox generator keyed by
(master_seed, stream_index), so the draw sequence of any trial is a pure
function of those two integers regardless of scheduling or thread count.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .bloch import BlochState, Vec3, dot

RngStream = np.random.Generator

_U64 = 2**64


@dataclass(frozen=True)
class ShotRecord:
    """Outcome counts of n_shots projective measurements along one axis."""

    axis: Vec3
    n_shots: int
    n_plus: int

    def __post_init__(self) -> None:
        if not 0 <= self.n_plus <= self.n_shots:
            raise ValueError(
                f"invalid counts: {self.n_plus} plusses out of {self.n_shots}"
            )

    @property
    def plus_fraction(self) -> float:
        return self.n_plus / self.n_shots


def derive_stream(master_seed: int, stream_index: int) -> RngStream:
    """Independent, reproducible substream for one trial.

    Same (master_seed, stream_index) always yields the same sequence; the
    pair is the 128-bit Philox key, so distinct indices give statistically
    independent streams.
    """
    if not 0 <= master_seed < _U64:
        raise ValueError("master_seed must be in [0, 2**64)")
    if not 0 <= stream_index < _U64:
        raise ValueError("stream_index must be in [0, 2**64)")
    key = np.array([master_seed, stream_index], dtype=np.uint64)
    return np.random.Generator(np.random.Philox(key=key))


class StreamFactory:
    """Re-keys one Philox generator per trial instead of constructing anew.

    Produces sequences identical to derive_stream(master_seed, index) at a
    fraction of the setup cost.  The returned generator is only valid until
    the next stream() call, so each trial must finish its draws before the
    factory advances (one stream per trial, single owner).
    """

    def __init__(self, master_seed: int):
        if not 0 <= master_seed < _U64:
            raise ValueError("master_seed must be in [0, 2**64)")
        self._seed = master_seed
        self._bitgen = np.random.Philox(key=np.array([0, 0], dtype=np.uint64))
        self._gen = np.random.Generator(self._bitgen)
        self._state = self._bitgen.state

    def stream(self, stream_index: int) -> RngStream:
        if not 0 <= stream_index < _U64:
            raise ValueError("stream_index must be in [0, 2**64)")
        st = self._state
        inner = st["state"]
        inner["key"][0] = self._seed
        inner["key"][1] = stream_index
        inner["counter"][:] = 0
        st["buffer_pos"] = 4
        st["has_uint32"] = 0
        st["uinteger"] = 0
        self._bitgen.state = st
        return self._gen


def outcome_prob(s: BlochState, axis: Vec3) -> float:
    """Probability of the + outcome when measuring sigma.axis on s."""
    p = 0.5 * (1.0 + s.r * dot(s.n, axis))
    # exact inputs keep p in [0,1]; guard the last ulp for binomial sampling
    if p < 0.0:
        return 0.0
    if p > 1.0:
        return 1.0
    return p


def sample_counts(
    s: BlochState, axis: Vec3, n_shots: int, rng: RngStream
) -> ShotRecord:
    """Measure n_shots copies of s along axis; exact Binomial(n_shots, p+)."""
    if n_shots < 0:
        raise ValueError("n_shots must be nonnegative")
    if n_shots == 0:
        return ShotRecord(axis, 0, 0)
    n_plus = int(rng.binomial(n_shots, outcome_prob(s, axis)))
    return ShotRecord(axis, n_shots, n_plus)
