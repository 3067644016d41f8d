from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from nonrecurrent.circle import (
    AngleSpecError,
    DyadicInterval,
    Membership,
    RationalAngle,
    StreamedAngle,
    angles_equal,
    arc,
    bits,
    dist,
    double,
    halves,
    in_arc,
    orbit_type,
    parse_angle,
    rat,
    sigma,
    sigma_length,
)

from conftest import rational_bits, triangular_bits, triangular_value

fractions = st.builds(Fraction, st.integers(0, 10**6), st.integers(1, 10**6)).map(lambda x: x % 1)


# --- bits / double / halves -------------------------------------------------


def test_bits_examples(theta_star):
    assert bits(rat(1, 3), 4) == "0101"
    assert bits(rat(1, 2), 3) == "100"
    assert bits(theta_star, 10) == "1010010001"


def test_theta_star_matches_position_rule(theta_star):
    assert bits(theta_star, 300) == triangular_bits(300)
    assert abs(float(theta_star) - float(triangular_value())) < 1e-16
    assert float(theta_star) == pytest.approx(0.6416325606551538, abs=1e-15)


def test_double_examples(theta_star):
    assert double(rat(1, 3)).exact() == Fraction(2, 3)
    assert double(rat(2, 3)).exact() == Fraction(1, 3)
    assert bits(double(theta_star), 9) == "010010001"


def test_halves_examples(theta_star):
    assert {h.exact() for h in halves(rat(0))} == {0, Fraction(1, 2)}
    assert {h.exact() for h in halves(rat(1, 3))} == {Fraction(1, 6), Fraction(2, 3)}
    lo, hi = halves(theta_star)
    assert bits(lo, 41) == "0" + triangular_bits(40)
    assert bits(hi, 41) == "1" + triangular_bits(40)


@given(fractions, st.integers(1, 80))
def test_bits_agree_with_long_division(x, n):
    assert bits(RationalAngle(x), n) == rational_bits(x, n)


@given(fractions, st.integers(1, 60))
def test_double_is_left_shift(x, n):
    a = RationalAngle(x)
    assert bits(double(a), n) == bits(a, n + 1)[1:]


@given(fractions)
def test_halves_double_back(x):
    for h in halves(RationalAngle(x)):
        assert double(h).exact() == x


@given(st.text("01", min_size=1, max_size=8))
def test_streamed_periodic_equals_rational(word):
    if set(word) == {"1"}:
        with pytest.raises(AngleSpecError):
            parse_angle(f"rule:periodic:{word}")
        return
    s = parse_angle(f"rule:periodic:{word}")
    q = Fraction(int(word, 2), 2 ** len(word) - 1) % 1
    assert s.exact() == q
    assert bits(s, 50) == bits(rat(q), 50)


# --- dist ---------------------------------------------------------------------


def test_dist_examples(theta_star):
    assert dist(rat(1, 10), rat(9, 10)) == (Fraction(1, 5), Fraction(1, 5))
    assert dist(rat(1, 4), rat(3, 4)).lo == Fraction(1, 2)
    e = dist(theta_star, double(theta_star), precision=5)
    assert Fraction(5, 32) <= e.lo and e.hi <= Fraction(3, 8)
    # the true value sits inside the enclosure
    t = float(theta_star)
    true = min((2 * t - t) % 1, (t - 2 * t) % 1)
    assert float(e.lo) <= true <= float(e.hi)


@given(fractions, fractions)
def test_dist_symmetric_and_bounded(a, b):
    d = dist(rat(a), rat(b)).lo
    assert d == dist(rat(b), rat(a)).lo
    assert 0 <= d <= Fraction(1, 2)


@given(fractions, fractions, fractions)
def test_dist_triangle(a, b, c):
    ab, bc, ac = (dist(rat(x), rat(y)).lo for x, y in ((a, b), (b, c), (a, c)))
    assert ac <= ab + bc


@given(st.integers(4, 200))
def test_streamed_dist_enclosure_width(p):
    t = parse_angle("rule:triangular")
    e = dist(t, t.shift(3), precision=p)
    assert e.hi - e.lo <= Fraction(1, 2**p)


# --- arcs ---------------------------------------------------------------------


def test_sigma_examples():
    s = sigma(arc(Fraction(1, 10), Fraction(2, 5)))
    assert (s.a.exact(), s.b.exact()) == (Fraction(1, 5), Fraction(4, 5))
    assert s.length().lo == Fraction(3, 5)
    s = sigma(arc(Fraction(1, 10), Fraction(7, 10)))
    assert s.length().lo == Fraction(1, 5)
    pt = sigma(arc(Fraction(1, 4), Fraction(3, 4)))
    assert pt.exact() == Fraction(1, 2)


def test_degenerate_arc_rejected():
    with pytest.raises(ValueError):
        arc(Fraction(1, 3), Fraction(4, 3))


def test_in_arc_examples(theta_star):
    S = arc(Fraction(1, 6), Fraction(2, 3))
    assert in_arc(rat(1, 3), S) == Membership.INSIDE
    assert in_arc(rat(2, 3), S) == Membership.BOUNDARY
    # theta* ~ 0.6416 lies strictly between 1/2 and 3/4
    assert in_arc(theta_star, arc(Fraction(1, 2), Fraction(3, 4)), precision=8) == Membership.INSIDE
    assert in_arc(theta_star, arc(Fraction(3, 4), Fraction(1, 2)), precision=8) == Membership.OUTSIDE


def test_in_arc_undecided_at_low_precision(theta_star):
    # 0.6416... vs an endpoint 0.64 needs more than 4 digits
    assert in_arc(theta_star, arc(Fraction(16, 25), Fraction(3, 4)), precision=4) == Membership.UNDECIDED


@given(fractions, fractions, fractions)
def test_in_arc_matches_direct_comparison(t, a, b):
    if a == b:
        return
    got = in_arc(rat(t), arc(a, b))
    u, L = (t - a) % 1, (b - a) % 1
    want = Membership.BOUNDARY if u in (0, L) else (Membership.INSIDE if u < L else Membership.OUTSIDE)
    assert got == want


@given(fractions, fractions)
def test_sigma_length_law(a, b):
    if a == b:
        return
    S = arc(a, b)
    L = S.length().lo
    img = sigma(S)
    if L == Fraction(1, 2):
        assert not hasattr(img, "b")
        return
    assert img.length().lo == sigma_length(L)


# --- misc -----------------------------------------------------------------------


@pytest.mark.parametrize("spec", ["rat:", "rat:1/0", "bits:012", "rule:nope", "foo:1", "rule:periodic"])
def test_bad_specs(spec):
    with pytest.raises(AngleSpecError):
        parse_angle(spec)


def test_spec_roundtrip(theta_star):
    for s in ["rat:1/3", "rule:triangular", "rule:periodic:011", "rule:preperiodic:1:01"]:
        assert parse_angle(parse_angle(s).spec).spec == parse_angle(s).spec
    assert isinstance(theta_star, StreamedAngle)


def test_angles_equal_streamed_undecidable(theta_star):
    assert angles_equal(rat(1, 3), parse_angle("rule:periodic:01")) is True
    assert angles_equal(theta_star, theta_star) is True  # same rule
    near = rat(Fraction(int(triangular_bits(32), 2), 2**32))
    assert angles_equal(theta_star, near, precision=32) is None
    assert angles_equal(theta_star, near, precision=64) is False


def _brute_orbit_type(x):
    seen, n = {}, 0
    while x not in seen:
        seen[x] = n
        x = (2 * x) % 1
        n += 1
    return seen[x], n - seen[x]


@given(st.integers(0, 500), st.integers(1, 500))
@settings(max_examples=200)
def test_orbit_type_brute_force(p, q):
    x = Fraction(p, q) % 1
    assert orbit_type(x) == _brute_orbit_type(x)


def test_dyadic_interval(theta_star):
    d = DyadicInterval.of(theta_star, 10)
    assert d.prefix == "1010010001"
    assert float(d.lo) <= float(theta_star) <= float(d.hi)
