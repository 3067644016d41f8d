import cmath

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from nonrecurrent.quadratic import (
    critical_orbit_separation,
    exact_period_count,
    find_cycles,
    iterate,
    parse_parameter,
)


def test_parse_parameter():
    assert parse_parameter("-2,0") == -2
    assert parse_parameter("0.25") == 0.25
    assert parse_parameter("1+2i") == 1 + 2j
    with pytest.raises(ValueError):
        parse_parameter("nan,0")


def test_iterate_examples():
    o = iterate(0, 0, 20)
    assert not o.escaped and np.all(o.samples == 0)
    o = iterate(-2, 0, 6)
    assert list(o.samples) == [0, -2, 2, 2, 2, 2, 2]
    o = iterate(1j, 0, 7)
    assert list(o.samples[1:]) == [1j, -1 + 1j, -1j, -1 + 1j, -1j, -1 + 1j, -1j]


def test_iterate_escape():
    o = iterate(1, 0, 50)
    assert o.escaped and o.escape_index == 3  # 0, 1, 2, 5


@given(st.complex_numbers(max_magnitude=2.5), st.integers(1, 40))
def test_iterate_matches_loop(c, n):
    o = iterate(c, 0, n)
    z = 0j
    for k in range(1, len(o.samples)):
        z = z * z + c
        assert o.samples[k] == z


def test_separation_examples():
    assert critical_orbit_separation(-2, 1000).min_critical_distance == 2
    assert critical_orbit_separation(0, 10).min_critical_distance == 0
    d = critical_orbit_separation(1j, 1000)
    assert d.min_critical_distance == pytest.approx(1.0)
    assert d.stable


def test_exact_period_counts():
    # 2, 2, 6, 12, 30, 54 periodic points of exact period p
    assert [exact_period_count(p) for p in range(1, 7)] == [2, 2, 6, 12, 30, 54]


def test_fixed_points():
    s = find_cycles(0, 1)
    pts = sorted((cy.points[0].real, abs(cy.multiplier)) for cy in s.cycles)
    assert pts == pytest.approx([(0, 0), (1, 2)], abs=1e-9)
    s = find_cycles(-2, 1)
    got = sorted((cy.points[0].real, cy.multiplier.real) for cy in s.cycles)
    assert got == pytest.approx([(-1, -2), (2, 4)], abs=1e-9)


def test_superattracting_two_cycle():
    s = find_cycles(-1, 2)
    two = [cy for cy in s.cycles if cy.period == 2]
    assert len(two) == 1
    assert sorted(z.real for z in two[0].points) == pytest.approx([-1, 0], abs=1e-9)
    assert abs(two[0].multiplier) < 1e-9
    assert not s.all_repelling


@pytest.mark.parametrize("c", [0.3 + 0.6j, -1.2 + 0.2j, 1j, -0.1 + 0.9j, 0.5])
def test_cycle_coverage(c):
    s = find_cycles(c, 6)
    assert s.complete
    for cy in s.cycles:
        z = cy.points[0]
        for _ in range(cy.period):
            z = z * z + c
        assert abs(z - cy.points[0]) < 1e-8


@given(st.complex_numbers(max_magnitude=1.5))
@settings(max_examples=15, deadline=None)
def test_fixed_points_are_roots(c):
    # z^2 - z + c = 0
    s = find_cycles(c, 1)
    r = cmath.sqrt(1 - 4 * c)
    want = sorted([(1 + r) / 2, (1 - r) / 2], key=lambda z: (z.real, z.imag))
    got = sorted((cy.points[0] for cy in s.cycles), key=lambda z: (z.real, z.imag))
    if abs(r) > 1e-3:  # away from the double root at c = 1/4
        assert len(got) == 2
        assert np.allclose(got, want, atol=1e-8)
