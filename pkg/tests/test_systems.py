"""Model systems: drift, rotations, de Bruijn shifts, and observables."""

import numpy as np
import pytest
from fractions import Fraction
from math import gcd
from hypothesis import given, settings, strategies as st

from ergodia.dynamics import ergodic_means_prefix, orbit_average
from ergodia.systems import (
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


# -- drift and rotation ----------------------------------------------------


def test_drift_is_transitive():
    T, emb = build_drift_system(50)
    assert len(T.cycles) == 1
    assert T(49) == 0
    assert emb.embed(25) == pytest.approx(0.5)


def test_build_rotation_coprime_search():
    rot = build_rotation(10, 0.31)
    assert gcd(rot.P, 10) == 1
    assert rot.P == 3
    assert rot.defect == pytest.approx(0.01)


def test_build_rotation_even_tie():
    # t*M = 5 exactly but gcd(5, 10) != 1; nearest coprime is 3 or 7
    rot = build_rotation(10, 0.5)
    assert rot.P in (3, 7)
    assert gcd(rot.P, 10) == 1


def test_rotation_orbits_have_period_m_over_gcd():
    rot = build_rotation(12, 0.25, coprime_required=False)
    T = rot.permutation
    assert rot.P == 3
    assert all(len(c) == 4 for c in T.cycles)


def test_rotation_validation():
    with pytest.raises(ValueError):
        build_rotation(1, 0.5)
    with pytest.raises(ValueError):
        build_rotation(10, 1.5)


def test_published_rotation_presets():
    r1 = build_rotation(33334, 2.0 / 3.0)
    assert r1.P == 22225
    r2 = build_rotation(25001, float(1.0 / np.sqrt(2.0)))
    assert r2.P == 17677


# -- de Bruijn -------------------------------------------------------------


def all_windows_distinct(s, n, m):
    wins = set()
    L = len(s)
    for i in range(L):
        wins.add(tuple(s[(i + j) % L] for j in range(n)))
    return len(wins) == m**n


@pytest.mark.parametrize("m,n", [(2, 1), (2, 4), (2, 8), (3, 3), (4, 2), (5, 2)])
def test_debruijn_sequence_windows(m, n):
    s = debruijn_sequence(m, n)
    assert s.size == m**n
    assert all_windows_distinct(s.tolist(), n, m)
    # canonical rotation: starts with the all-zeros window
    assert s[:n].tolist() == [0] * n


def test_debruijn_sequence_validation():
    with pytest.raises(ValueError):
        debruijn_sequence(1, 3)
    with pytest.raises(ValueError):
        debruijn_sequence(2, 30)  # over the memory budget


@pytest.mark.parametrize("m,n", [(2, 3), (2, 6), (3, 3)])
def test_window_permutation_single_cycle(m, n):
    T = debruijn_window_permutation(m, n)
    assert T.size == m**n
    assert len(T.cycles) == 1


def test_window_permutation_follows_sequence():
    s = debruijn_sequence(2, 3)
    T = debruijn_window_permutation(2, 3, s)
    # the image of window i is window i+1 in the cyclic sequence
    def widx(i):
        return sum(int(s[(i + j) % 8]) << j for j in range(3))

    for i in range(8):
        assert T(widx(i)) == widx(i + 1)


# -- Bernoulli approximations ----------------------------------------------


def test_naive_shift_orbit_lengths():
    sysn = build_bernoulli(2, 2, "naive")
    # orbit lengths divide 2N+1 = 5, so the system is far from transitive
    lens = {len(c) for c in sysn.permutation.cycles}
    assert lens <= {1, 5}
    assert len(sysn.permutation.cycles) > 1


def test_naive_shift_rotates_word():
    sysn = build_bernoulli(2, 1, "naive")
    w = [1, 0, 1]
    y = sysn.index(w)
    assert sysn.word(sysn.permutation(y)).tolist() == [0, 1, 1]


def test_debruijn_shift_transitive_and_consistent():
    sysb = build_bernoulli(2, 2, "debruijn")
    T = sysb.permutation
    assert len(T.cycles) == 1
    # successor words overlap the source on the left-shifted window
    for y in range(sysb.M):
        w = sysb.word(y)
        w2 = sysb.word(T(y))
        assert (w2[:-1] == w[1:]).all()


def test_word_index_round_trip():
    sysb = build_bernoulli(3, 1, "naive")
    for y in (0, 5, 26):
        assert sysb.index(sysb.word(y)) == y


def test_build_bernoulli_validation():
    with pytest.raises(ValueError):
        build_bernoulli(2, 2, "magic")
    with pytest.raises(ValueError):
        build_bernoulli(2, 14)


# -- observables -----------------------------------------------------------


def test_ex01_values_and_average():
    F = paper_observable("ex01", 6)
    assert F.values.tolist() == [6.0, -6.0, 6.0, -6.0, 6.0, -6.0]
    assert F.exact(2) == Fraction(6)


def test_delta_values():
    F = paper_observable("delta", 5)
    assert F.values.tolist() == [5.0, 0.0, 0.0, 0.0, 0.0]


def test_ex03_block_structure():
    F = paper_observable("ex03", 100, K=10)
    # R = 10 blocks, even -> blocks 0,2,4,6,8 are ones
    assert F(0) == 1.0 and F(9) == 1.0
    assert F(10) == 0.0
    assert F(20) == 1.0
    assert float(np.mean(F.values)) == pytest.approx(0.5)


def test_ex03_partial_last_block_zeroed():
    # M = 95, K = 10: R = floor(9.5) -> 9 -> rounded down to 8
    F = paper_observable("ex03", 95, K=10)
    assert F(79) == 0.0  # block 7 odd
    assert F(85) == 0.0  # block 8 >= R
    assert F(65) == 1.0  # block 6 even and < R


def test_linear_and_tent():
    M = 1000
    Fl = paper_observable("linear", M)
    assert Fl.exact(250) == Fraction(1, 4)
    Ft = paper_observable("tent", M)
    assert Ft(0) == 0.0
    assert Ft(900) == pytest.approx(1.0)
    assert Ft(950) == pytest.approx(0.5)
    # integral of the tent is 1/2; grid average converges to it
    assert float(np.mean(Ft.values)) == pytest.approx(0.5, abs=2.0 / M)


def test_tent_exact_rule_matches_float():
    M = 90
    F = paper_observable("tent", M)
    for y in range(M):
        assert float(F.exact(y)) == pytest.approx(F(y), abs=1e-12)


def test_chi0_counts_symbol_at_origin():
    sysb = build_bernoulli(2, 1, "naive")
    F = paper_observable("chi0", sysb.M, N=1)
    for y in range(sysb.M):
        assert F(y) == float(sysb.word(y)[1] == 1)
    # exactly half the words have a 1 at position 0
    assert float(np.mean(F.values)) == 0.5


def test_chi0_orbit_average_debruijn():
    # transitive system: the single orbit average is the integral 1/2
    sysb = build_bernoulli(2, 3, "debruijn")
    F = paper_observable("chi0", sysb.M, N=3)
    assert orbit_average(F, sysb.permutation, 0) == pytest.approx(0.5)


def test_observable_validation():
    with pytest.raises(ValueError):
        paper_observable("ex03", 100)
    with pytest.raises(ValueError):
        paper_observable("chi0", 100, N=1)
    with pytest.raises(ValueError):
        paper_observable("nope", 10)


# -- helpers ---------------------------------------------------------------


def test_block_density_prefixes():
    # word positions -2..2 = [., ., 1, 0, 1]
    densities = block_density([0, 0, 1, 0, 1], 2)
    assert densities == [1.0, 0.5]
    with pytest.raises(ValueError):
        block_density([0, 0, 1, 0, 1], 3)


def test_block_density_matches_means():
    sysb = build_bernoulli(2, 4, "debruijn")
    F = paper_observable("chi0", sysb.M, N=4)
    T = sysb.permutation
    for y in (3, 100, 400):
        dens = block_density(sysb.word(y), 3)
        means = ergodic_means_prefix(F, T, y, 3).means
        assert np.allclose(dens, means)


def test_three_point_average():
    assert three_point_average(lambda x: 1.0, 0.3) == pytest.approx(1.0)
    got = three_point_average(tent_function, 0.5)
    expect = (tent_function(0.5 - 1 / 3) + tent_function(0.5) + tent_function(0.5 + 1 / 3)) / 3
    assert got == pytest.approx(expect)
