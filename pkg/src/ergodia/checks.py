"""Self-check suite: runs the library's structural invariants on fixtures.

Used by the CLI `check` subcommand; each check returns (name, ok, detail)
so failures can be reported as machine-readable JSON lines.
"""

from __future__ import annotations

from fractions import Fraction

import numpy as np

from .dynamics import FinitePermutation, Observable, ergodic_means_prefix, orbit_average
from .integrability import average, integrability_profile, tail_mass
from .rng import SplitMix64
from .stabilization import means_at_horizon, sup_discrepancy
from .systems import build_drift_system, debruijn_window_permutation, paper_observable

CheckResult = tuple[str, bool, str]


def _random_permutation(M: int, rng: SplitMix64) -> FinitePermutation:
    idx = np.arange(M, dtype=np.int64)
    for i in range(M - 1, 0, -1):  # Fisher-Yates with the documented PRNG
        j = rng.next_below(i + 1)
        idx[i], idx[j] = idx[j], idx[i]
    return FinitePermutation(idx, validate=False)


def check_bijection(image=None) -> CheckResult:
    """Every constructed permutation is a bijection (counting-sort check)."""
    if image is None:
        image = np.roll(np.arange(100), -1)
    try:
        FinitePermutation(image)
        return ("bijection", True, "image array is a permutation")
    except ValueError as e:
        return ("bijection", False, str(e))


def check_mean_recurrence(seed: int = 1) -> CheckResult:
    """n*A_n equals brute-force summation on a random (F, T, y) instance."""
    rng = SplitMix64(seed)
    M = 500
    T = _random_permutation(M, rng)
    F = Observable.from_values([rng.next_below(2001) - 1000 for _ in range(M)])
    y = rng.next_below(M)
    n = 200
    series = ergodic_means_prefix(F, T, y, n)
    z, total = y, 0.0
    for i in range(n):
        total += F(z)
        z = T(z)
    ok = abs(n * series.mean_at(n) - total) <= 1e-9 * max(1.0, abs(total))
    return ("mean-recurrence", ok, f"n*A_n={n * series.mean_at(n)}, brute={total}")


def check_exact_identities() -> CheckResult:
    """Exact rational-mode identities at M = 1e4: A_M = Av(F) on a cycle."""
    M = 10_000
    T, _ = build_drift_system(M)
    F = paper_observable("linear", M)
    series = ergodic_means_prefix(F, T, 3, M, exact=True)
    av = sum(F.exact(y) for y in range(M)) / M
    ok = series.exact_means[-1] == av
    return ("exact-transitive-average", ok, f"A_M={series.exact_means[-1]}, Av={av}")


def check_orbit_average() -> CheckResult:
    """Orbit averages are constant along orbits and match the horizon means."""
    rng = SplitMix64(7)
    M = 300
    T = _random_permutation(M, rng)
    F = Observable.from_values([rng.next_below(100) for _ in range(M)])
    for y in (0, 17, 123):
        p = T.period(y)
        series = ergodic_means_prefix(F, T, y, p)
        if abs(series.mean_at(p) - orbit_average(F, T, y)) > 1e-12:
            return ("orbit-average", False, f"mismatch at y={y}")
    return ("orbit-average", True, "A_p equals the orbit mean")


def check_tail_monotone() -> CheckResult:
    """Tail masses are nonincreasing and consistent with the decomposition."""
    rng = SplitMix64(11)
    F = Observable.from_values([rng.next_below(1000) - 500 for _ in range(400)])
    prof = integrability_profile(F)
    mono = bool((np.diff(prof.tail_masses) <= 1e-12).all())
    k = float(prof.thresholds[1])
    below = np.abs(F.values)[np.abs(F.values) <= k].sum() / F.size
    decomp = abs(average(Observable.from_values(np.abs(F.values))) - (tail_mass(F, k) + below)) < 1e-9
    return ("tail-monotone", mono and decomp, f"monotone={mono}, decomposition={decomp}")


def check_proof_bound() -> CheckResult:
    """|A_K - A_L| <= U + V at every sampled start point."""
    rng = SplitMix64(13)
    M = 2_000
    T = _random_permutation(M, rng)
    F = Observable.from_values([rng.next_below(200) - 100 for _ in range(M)])
    rep = sup_discrepancy(F, T, K=800, L=500)
    diffs = rep.diffs[rep.sample_points]
    ok = bool((diffs <= rep.u_bounds + rep.v_bounds + 1e-9).all())
    return ("discrepancy-proof-bound", ok, f"max slack={float(np.max(diffs - rep.u_bounds - rep.v_bounds))}")


def check_debruijn() -> CheckResult:
    """The de Bruijn window permutation is one cycle with distinct windows."""
    T = debruijn_window_permutation(2, 7)
    ok = len(T.cycles) == 1 and T.size == 128
    return ("debruijn-single-cycle", ok, f"cycles={len(T.cycles)}")


def run_all(fixture_image=None) -> list[CheckResult]:
    return [
        check_bijection(fixture_image),
        check_mean_recurrence(),
        check_exact_identities(),
        check_orbit_average(),
        check_tail_monotone(),
        check_proof_bound(),
        check_debruijn(),
    ]
