"""Core dynamics: permutations, orbits, prefix means, Gamma series."""

import numpy as np
import pytest
from fractions import Fraction
from hypothesis import given, settings, strategies as st

from ergodia.dynamics import (
    FinitePermutation,
    Observable,
    apply_power,
    cycle_decomposition,
    ergodic_means_prefix,
    gamma_series,
    orbit_and_period,
    orbit_average,
)
from ergodia.rng import SplitMix64


def random_permutation(M, seed):
    rng = SplitMix64(seed)
    idx = np.arange(M, dtype=np.int64)
    for i in range(M - 1, 0, -1):
        j = rng.next_below(i + 1)
        idx[i], idx[j] = idx[j], idx[i]
    return FinitePermutation(idx, validate=False)


# -- permutation structure -------------------------------------------------


def test_rejects_non_permutation():
    with pytest.raises(ValueError):
        FinitePermutation([0, 0, 1])
    with pytest.raises(ValueError):
        FinitePermutation([0, 1, 3])
    with pytest.raises(ValueError):
        FinitePermutation([-1, 0, 1])


def test_identity_cycles():
    T = FinitePermutation.identity(5)
    assert cycle_decomposition(T) == [[0], [1], [2], [3], [4]]
    assert all(T.period(y) == 1 for y in range(5))


def test_from_cycles_round_trip():
    T = FinitePermutation.from_cycles([[0, 3, 1], [2, 4]], size=6)
    assert T(0) == 3 and T(3) == 1 and T(1) == 0
    assert T(2) == 4 and T(4) == 2
    assert T(5) == 5
    # descending length, then smallest element
    assert [len(c) for c in T.cycles] == [3, 2, 1]


def test_cycle_order_tie_break():
    T = FinitePermutation.from_cycles([[4, 5], [0, 1], [2, 3]], size=6)
    assert [c[0] for c in T.cycles] == [0, 2, 4]


@given(st.integers(1, 200), st.integers(0, 2**32))
@settings(max_examples=50, deadline=None)
def test_cycles_partition(M, seed):
    T = random_permutation(M, seed)
    seen = np.concatenate(T.cycles)
    assert sorted(seen.tolist()) == list(range(M))
    # each cycle is consistent with the image array
    for cyc in T.cycles:
        for a, b in zip(cyc, np.roll(cyc, -1)):
            assert T(int(a)) == int(b)


@given(st.integers(2, 100), st.integers(0, 2**32), st.integers(0, 500))
@settings(max_examples=50, deadline=None)
def test_apply_power_matches_iteration(M, seed, n):
    T = random_permutation(M, seed)
    y = seed % M
    z = y
    for _ in range(n):
        z = T(z)
    assert apply_power(T, y, n) == z


def test_orbit_and_period():
    T = FinitePermutation.from_cycles([[0, 2, 4, 1]], size=5)
    orb, p = orbit_and_period(T, 4)
    assert p == 4
    assert orb == [4, 1, 0, 2]


def test_trajectory_wraps():
    T = FinitePermutation.from_cycles([[0, 1, 2]], size=3)
    assert T.trajectory(1, 7).tolist() == [1, 2, 0, 1, 2, 0, 1]


def test_out_of_range_start_rejected():
    T = FinitePermutation.identity(4)
    with pytest.raises(IndexError):
        apply_power(T, 4, 1)
    with pytest.raises(IndexError):
        T.trajectory(-1, 3)


# -- observables -----------------------------------------------------------


def test_observable_exact_integral_values():
    F = Observable.from_values([1.0, -3.0, 2.0])
    assert F.exact(1) == Fraction(-3)


def test_observable_exact_needs_rule_for_fractions():
    F = Observable.from_values([0.5])
    with pytest.raises(ValueError):
        F.exact(0)


def test_observable_values_read_only():
    F = Observable.from_values([1.0, 2.0])
    with pytest.raises(ValueError):
        F.values[0] = 9.0


# -- ergodic means ---------------------------------------------------------


def brute_mean(F, T, y, n):
    z, total = y, 0.0
    for _ in range(n):
        total += F(z)
        z = T(z)
    return total / n


@given(st.integers(2, 60), st.integers(0, 2**32), st.integers(1, 120))
@settings(max_examples=60, deadline=None)
def test_prefix_means_match_brute_force(M, seed, n_max):
    T = random_permutation(M, seed)
    rng = SplitMix64(seed ^ 0xABCDEF)
    F = Observable.from_values([rng.next_below(41) - 20 for _ in range(M)])
    y = seed % M
    series = ergodic_means_prefix(F, T, y, n_max)
    for n in (1, n_max // 2 + 1, n_max):
        assert series.mean_at(n) == pytest.approx(brute_mean(F, T, y, n), abs=1e-10)


def test_exact_mode_fractions():
    T = FinitePermutation.from_cycles([[0, 1, 2]], size=3)
    F = Observable.from_values([1.0, 0.0, 0.0])
    series = ergodic_means_prefix(F, T, 0, 3, exact=True)
    assert series.exact_means == (Fraction(1), Fraction(1, 2), Fraction(1, 3))


def test_mean_at_full_period_is_orbit_average():
    T = random_permutation(97, 5)
    rng = SplitMix64(6)
    F = Observable.from_values([rng.next_below(100) for _ in range(97)])
    for y in (0, 13, 96):
        p = T.period(y)
        series = ergodic_means_prefix(F, T, y, p)
        assert series.mean_at(p) == pytest.approx(orbit_average(F, T, y), abs=1e-12)


def test_means_constant_beyond_lcm_structure():
    # on a single cycle, A_{qM} = Av(F) exactly for every multiple of M
    M = 20
    T = FinitePermutation(np.roll(np.arange(M), -1), validate=False)
    F = Observable.from_values(np.arange(M, dtype=float))
    series = ergodic_means_prefix(F, T, 7, 3 * M)
    av = float(np.mean(F.values))
    for q in (1, 2, 3):
        assert series.mean_at(q * M) == pytest.approx(av, abs=1e-12)


# -- gamma series ----------------------------------------------------------


def test_gamma_series_columns():
    M = 100
    T = FinitePermutation(np.roll(np.arange(M), -1), validate=False)
    F = Observable.from_values(np.ones(M))
    pts, stride = gamma_series(F, T, 0, 0.5)
    assert stride == 1
    assert pts.shape == (50, 3)
    assert pts[0].tolist() == [1.0, 0.01, 1.0]
    assert pts[-1, 0] == 50


def test_gamma_series_stride_cap():
    M = 1000
    T = FinitePermutation(np.roll(np.arange(M), -1), validate=False)
    F = Observable.from_values(np.zeros(M))
    pts, stride = gamma_series(F, T, 0, 1.0, stride=7)
    assert stride == 7
    assert pts[:, 0].tolist() == list(range(7, 1001, 7))


def test_gamma_series_k_beyond_one():
    M = 50
    T = FinitePermutation(np.roll(np.arange(M), -1), validate=False)
    F = Observable.from_values(np.arange(M, dtype=float))
    pts, _ = gamma_series(F, T, 3, 2.0)
    assert pts[-1, 0] == 100
    assert pts[-1, 1] == pytest.approx(2.0)


def test_gamma_series_rejects_empty():
    T = FinitePermutation.identity(10)
    F = Observable.from_values(np.zeros(10))
    with pytest.raises(ValueError):
        gamma_series(F, T, 0, 0.01)
