"""ergodia: finite measure-preserving dynamical systems.

Ergodic-mean phenomenology on large finite probability spaces, uniform
integrability diagnostics, stabilization detection, and constructive finite
approximation of circle rotations and Bernoulli shifts.
"""

from .dynamics import (
    FinitePermutation,
    MeanSeries,
    Observable,
    apply_power,
    cycle_decomposition,
    ergodic_means_prefix,
    gamma_series,
    orbit_and_period,
    orbit_average,
)
from .integrability import (
    IntegrabilityProfile,
    average,
    family_profile,
    integrability_profile,
    small_set_mass,
    tail_mass,
)
from .stabilization import (
    DiscrepancyReport,
    StabilizationSegment,
    common_stabilization_segment,
    exceedance_fraction,
    means_at_horizon,
    reference_psi,
    stabilization_segment,
    stratified_start_points,
    sup_discrepancy,
)
from .approximation import (
    ApproximationReport,
    ClosedSet,
    PointEmbedding,
    TestFunction,
    circle_space,
    interval_space,
    make_transitive,
    map_mismatch_fraction,
    split_into_n_cycles,
    symbolic_space,
    synthesize_permutation,
    thickening_measure_error,
    weak_star_error,
)
from .systems import (
    RotationSystem,
    SymbolicSystem,
    block_density,
    build_bernoulli,
    build_drift_system,
    build_rotation,
    debruijn_sequence,
    debruijn_window_permutation,
    paper_observable,
    tent_function,
    three_point_average,
)

__version__ = "0.1.0"
