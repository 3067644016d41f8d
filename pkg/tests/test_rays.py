import cmath
import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from nonrecurrent.circle import parse_angle, rat
from nonrecurrent.rays import (
    PotentialSchedule,
    TraceOptions,
    landing_estimate,
    landing_points,
    refine_param_landing,
    trace_dynamical_ray,
    trace_dynamical_rays,
    trace_param_ray,
)

RAW = TraceOptions(refine=False)


def green(c, z, n=60):
    """Escape-rate potential by brute iteration."""
    for k in range(n):
        if abs(z) > 1e100:
            return math.log(abs(z)) / 2**k
        z = z * z + c
    return math.log(abs(z)) / 2**n if abs(z) > 1 else 0.0


# --- parameter rays -----------------------------------------------------------------


@pytest.mark.parametrize("theta,want,tol", [(0, 0.25, 1e-6), (Fraction(1, 2), -2.0, 1e-4),
                                            (Fraction(1, 3), complex(-0.75, 0), 1e-3),
                                            (Fraction(2, 3), complex(-0.75, 0), 1e-3),
                                            (Fraction(1, 6), 1j, 1e-6)])
def test_param_ray_landings(theta, want, tol):
    r = trace_param_ray(rat(theta))
    assert abs(r.landing_estimate - want) < tol
    assert r.converged and not r.truncated


def test_param_ray_real_axis():
    # R_M(0) is (1/4, inf), R_M(1/2) is (-inf, -2)
    for theta, side in ((0, 1), (Fraction(1, 2), -1)):
        z = trace_param_ray(rat(theta), opts=RAW).positions
        assert np.abs(z.imag).max() < 1e-9
        assert np.all(side * (z.real - (0.25 if side > 0 else -2)) > -1e-9)


@pytest.mark.parametrize("spec", ["rat:1/7", "rat:3/10", "rule:triangular"])
def test_param_ray_potential_is_green(spec):
    # G_M(c) = G_c(c) along the whole trace
    r = trace_param_ray(parse_angle(spec), PotentialSchedule(G_floor=1e-3), RAW)
    for G, c, *_ in r.samples[:: max(1, len(r.samples) // 25)]:
        assert green(c, c) == pytest.approx(G, rel=1e-6)


def test_theta_star_param_ray(theta_star):
    r = trace_param_ray(theta_star)
    assert r.converged and r.tail_diameter < 1e-6
    assert abs(r.landing_estimate - complex(-1.2383925504773425, -0.4171463246724327)) < 1e-7


def test_rational_refinement_is_nearest_root():
    # c = i solves f_c^3(0) = f_c(0) via the period-2 Misiurewicz equation
    c, how = refine_param_landing(Fraction(1, 6), complex(0.01, 0.99))
    assert abs(c - 1j) < 1e-12 and how.startswith("misiurewicz")


# --- dynamical rays -----------------------------------------------------------------


def test_c0_rays_land_on_circle():
    ts = [Fraction(k, 17) for k in range(16)]
    rs = trace_dynamical_rays(0, [rat(t) for t in ts])
    for t, r in zip(ts, rs):
        assert abs(r.landing_estimate - cmath.exp(2j * math.pi * t)) < 1e-8


@given(st.floats(0, 1, exclude_max=True))
@settings(max_examples=10, deadline=None)
def test_c0_raw_rays_are_radial(t):
    # phi_0 is the identity: the point of potential G is exp(G + 2 pi i t)
    r = trace_dynamical_ray(0, rat(Fraction(t).limit_denominator(10**6)), PotentialSchedule(G_floor=1e-4), RAW)
    tt = float(Fraction(t).limit_denominator(10**6))
    for G, z, *_ in r.samples:
        assert abs(z - cmath.exp(G + 2j * math.pi * tt)) < 1e-10 * abs(z)


@pytest.mark.parametrize("t", [0, Fraction(1, 4), Fraction(1, 2)])
def test_chebyshev_landings(t):
    r = trace_dynamical_ray(-2, rat(t))
    assert abs(r.landing_estimate - 2 * math.cos(2 * math.pi * t)) < 1e-6


@pytest.mark.parametrize("t", [Fraction(1, 3), Fraction(1, 5), Fraction(7, 11)])
def test_chebyshev_raw_trace(t):
    # phi_{-2}^{-1}(w) = w + 1/w, so the ray is explicit at every potential
    r = trace_dynamical_ray(-2, rat(t), PotentialSchedule(G_floor=1e-5), RAW)
    for G, z, *_ in r.samples:
        w = cmath.exp(G + 2j * math.pi * t)
        assert abs(z - (w + 1 / w)) < 1e-9 * max(1, abs(z))


def test_dynamical_ray_lands_at_critical_value(theta_star):
    c = trace_param_ray(theta_star).landing_estimate
    z = trace_dynamical_ray(c, theta_star).landing_estimate
    assert abs(z - c) < 1e-6


def test_landing_points_batch_matches_single():
    angles = [rat(Fraction(k, 9)) for k in range(9)]
    c = -0.1 + 0.65j
    pts, ok = landing_points(c, angles)
    assert ok.all()
    for a, z in zip(angles, pts):
        assert abs(z - trace_dynamical_ray(c, a, opts=RAW).raw_landing) < 1e-9


def test_trace_is_deterministic():
    a = trace_param_ray(rat(3, 7)).to_json(with_samples=True)
    b = trace_param_ray(rat(3, 7)).to_json(with_samples=True)
    assert a == b


# --- landing estimate ----------------------------------------------------------------


def test_landing_estimate_examples():
    L = landing_estimate([1 + 1j] * 10, 1e-9, 8)
    assert L.tail_diameter == 0 and L.converged
    pts = [2.0**-k for k in range(20)]
    L = landing_estimate(pts, 1e-3, 8)
    assert L.tail_diameter == pytest.approx(2.0**-12 - 2.0**-19)
    assert L.converged
    assert not landing_estimate(pts, 1e-6, 8).converged
    assert not landing_estimate([0j] * 10, 1.0, 8, truncated=True).converged


def test_landing_estimate_needs_window():
    with pytest.raises(ValueError):
        landing_estimate([0j] * 3, 1e-6, 8)


def test_schedule_validation():
    with pytest.raises(ValueError):
        PotentialSchedule(G_start=1e-3, G_floor=1e-2)
    s = PotentialSchedule()
    G = s.potentials()
    assert G[0] == s.G_start and G[-1] == s.G_floor and np.all(np.diff(G) < 0)
