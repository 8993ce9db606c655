"""Desk-scale Monte Carlo benchmarks for separable qubit state estimation.

The package simulates two estimation protocols on N identical copies of a
qubit mixed state -- a one-step adaptive scheme built from projective
measurements, and fixed-axis tomography -- and compares their mean
fidelity against the asymptotic benchmark constants: d^2/(4N) for
single-copy (separable) measurements and the strictly smaller collective
constant, whose difference persists as N grows.  It also verifies the
Fisher-information trace bounds behind those constants.
"""

from .bloch import (
    LAB_FRAME,
    BlochState,
    FourVector,
    Frame,
    fidelity,
    four_vector,
    frame_from_z,
    frame_in_plane,
)
from .estimate import (
    AdaptiveConfig,
    Estimate,
    adaptive_estimate,
    ball_project,
    chi_from_counts,
    chi_to_estimate,
    rough_direction,
    run_trial,
    split_copies,
    tomography_estimate,
)
from .fisherinfo import (
    BoundStats,
    SchemeSpec,
    bound_stats,
    bound_sweep,
    collective_bound,
    collective_constant,
    fisher_scheme,
    fisher_single_axis,
    lab_axes_scheme,
    predicted_fidelity,
    qfi,
    separable_constant,
    single_axis_scheme,
)
from .harness import (
    ExperimentConfig,
    GapReport,
    RunRow,
    RunTable,
    ScalingFit,
    fit_scaling,
    gap_report,
    read_table_csv,
    run_experiment,
    write_summary_json,
    write_table_csv,
)
from .measure import RngStream, ShotRecord, StreamFactory, derive_stream, outcome_prob, sample_counts
from .prior import (
    PriorSpec,
    bures,
    bures_cdf,
    bures_density,
    mean_purity,
    parse_prior,
    point,
    sample_direction,
    sample_purity,
    sample_state,
    uniform,
)

__version__ = "0.1.0"
