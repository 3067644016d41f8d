from fractions import Fraction

import pytest
from hypothesis import assume, given, settings
from hypothesis import strategies as st

from nonrecurrent.circle import orbit_type, parse_angle, rat
from nonrecurrent.symbolic import angle_nonrecurrence, itinerary, kneading, refute_periods

from conftest import triangular_bits


def oracle_itinerary(t: Fraction, theta: Fraction, n: int, side: str) -> str:
    """Itinerary of t +/- eps for an eps far below every gap that matters."""
    eps = Fraction(1, 2 ** (n + 4) * t.denominator * theta.denominator * 4)
    x = (t + eps if side == "+" else t - eps) % 1
    lo, hi = theta / 2, (theta + 1) / 2
    out = []
    for _ in range(n):
        out.append("1" if lo <= x <= hi else "0")
        x = (2 * x) % 1
    return "".join(out)


def truncated_star(n=400):
    return Fraction(int(triangular_bits(n), 2), 2**n)


# --- itineraries --------------------------------------------------------------


def test_itinerary_examples(theta_star):
    third = rat(1, 3)
    assert itinerary(third, third, 4, "+").symbols == "1010"
    assert itinerary(third, third, 4, "-").symbols == "1111"
    plus = itinerary(theta_star, theta_star, 64, "+").symbols
    minus = itinerary(theta_star, theta_star, 64, "-").symbols
    assert plus == minus


rationals = st.builds(Fraction, st.integers(1, 400), st.integers(2, 400)).map(lambda x: x % 1)


@given(rationals, rationals, st.sampled_from("+-"), st.integers(1, 24))
@settings(max_examples=150)
def test_itinerary_matches_perturbation_oracle(t, theta, side, n):
    assume(theta != 0)
    got = itinerary(rat(t), rat(theta), n, side).symbols
    assert got == oracle_itinerary(t, theta, n, side)


# --- kneading -----------------------------------------------------------------


def test_kneading_theta_star(theta_star):
    nu = kneading(theta_star, 6).symbols
    assert nu[0] == "1"
    # tau^k(theta*) against [theta*/2, (theta*+1)/2] with a long exact truncation
    T = truncated_star()
    assert nu == oracle_itinerary(T, T, 6, "+") == "101001"
    assert kneading(theta_star, 64).symbols == oracle_itinerary(T, T, 64, "+")


def test_kneading_periodic_flag():
    kp = kneading(rat(1, 3), 8)
    assert kp.periodic and kp.disagreement == 1


def test_kneading_of_zero_rejected():
    with pytest.raises(ValueError):
        kneading(rat(0), 4)


@given(rationals)
@settings(max_examples=100)
def test_disagreement_iff_periodic(theta):
    assume(theta != 0)
    pre, per = orbit_type(theta)
    kp = kneading(rat(theta), pre + per + 2, p_max=0)
    # a periodic angle comes back to itself, which sits on the boundary of L1
    if pre == 0:
        assert kp.periodic
    else:
        assert not kp.periodic


# --- period refutation ----------------------------------------------------------


def test_refute_examples():
    r = refute_periods("101010", 2)
    assert r.refuted == {1} and r.smallest_unrefuted == 2
    r = refute_periods("1001", 2)
    assert r.refuted == {1, 2} and r.all_refuted


def test_refute_bad_args():
    with pytest.raises(ValueError):
        refute_periods("101", 2)


@given(st.text("01", min_size=2, max_size=40), st.data())
def test_refute_brute_force(w, data):
    p_max = data.draw(st.integers(1, len(w) // 2))
    r = refute_periods(w, p_max)
    for p in range(1, p_max + 1):
        periodic = all(w[i] == w[i + p] for i in range(len(w) - p))
        assert (p not in r.refuted) == periodic


def test_theta_star_aperiodic_prefix(theta_star):
    kp = kneading(theta_star, 4096, p_max=1024)
    assert kp.refuted.all_refuted


# --- non-recurrence ---------------------------------------------------------------


def test_nonrecurrence_examples():
    c = angle_nonrecurrence(rat(1, 2), 3)
    assert c.periodic_collision == (1, 2)
    c = angle_nonrecurrence(rat(1, 3), 10)
    assert c.delta_hat == Fraction(1, 3) and c.periodic_collision == (0, 2)
    assert not c.ok


def test_theta_star_nonrecurrence(theta_star):
    c = angle_nonrecurrence(theta_star, 2000)
    assert c.ok and c.delta_hat >= Fraction(1, 16)
    # brute force on a long truncation: min_n dist(T, 2^n T)
    T = truncated_star(2100)
    brute = min(min((T * 2**n - T) % 1, (T - T * 2**n) % 1) for n in range(1, 2001))
    assert c.delta_hat <= brute
    assert brute - c.delta_hat < Fraction(1, 2**60)


@given(rationals, st.integers(1, 60))
@settings(max_examples=100)
def test_exact_nonrecurrence_brute_force(theta, N):
    assume(theta != 0)
    c = angle_nonrecurrence(rat(theta), N)
    seen, x, ds = {theta: 0}, theta, []
    collision = None
    for n in range(1, N + 1):
        x = (2 * x) % 1
        if x in seen:
            collision = (seen[x], n)
            break
        seen[x] = n
        ds.append(min((x - theta) % 1, (theta - x) % 1))
    assert c.periodic_collision == collision
    if ds:
        assert c.delta_hat == min(ds)


def test_streamed_rational_agrees_with_exact():
    s = parse_angle("rule:preperiodic:1:01")  # 0.1(01)... = 2/3
    e = rat(2, 3)
    assert kneading(s, 20).symbols == kneading(e, 20).symbols
