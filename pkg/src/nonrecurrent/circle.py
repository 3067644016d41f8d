"""Exact arithmetic on the circle T = R/Z.

Angles are either reduced rationals (:class:`RationalAngle`) or
deterministic binary-digit oracles (:class:`StreamedAngle`).  Nothing in
this module uses floating point except ``float(angle)`` for display and
for handing values to the ray tracer.

Binary expansions of dyadic rationals always use the terminating form,
so ``bits(rat(1, 2), 3) == "100"``.
"""

from __future__ import annotations

import enum
import math
import re
import threading
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, NamedTuple, Optional, Union

DEFAULT_PRECISION = 64
HALF = Fraction(1, 2)


class AngleSpecError(ValueError):
    """Malformed angle spec or bit-rule parameters."""


class UndecidedError(ArithmeticError):
    """A comparison could not be resolved at the requested precision."""


# ---------------------------------------------------------------------------
# bit rules
# ---------------------------------------------------------------------------


class BitRule:
    """A named rule producing binary digits ``bit(1), bit(2), ...``.

    The prefix cache is a pure memo: extending it never changes bits that
    were already handed out, so concurrent readers are safe.
    """

    spec = "rule"

    def __init__(self):
        self._lock = threading.Lock()
        self._memo = (0, 0)  # (integer of cached bits, number of bits)

    def bit(self, i: int) -> int:
        raise NotImplementedError

    def exact(self) -> Optional[Fraction]:
        return None

    def prefix(self, n: int) -> int:
        """First ``n`` bits as an integer (most significant first)."""
        value, length = self._memo
        if n > length:
            with self._lock:
                value, length = self._memo
                if n > length:
                    target = max(n, 2 * length, 64)
                    for i in range(length + 1, target + 1):
                        value = (value << 1) | self.bit(i)
                    self._memo = (value, target)
                    length = target
        return value >> (length - n)

    def __eq__(self, other):
        return isinstance(other, BitRule) and other.spec == self.spec

    def __hash__(self):
        return hash(self.spec)

    def __repr__(self):
        return f"{type(self).__name__}({self.spec!r})"


def _check_word(word: str, what: str) -> str:
    if not word or set(word) - {"0", "1"}:
        raise AngleSpecError(f"{what} must be a non-empty 0/1 word, got {word!r}")
    return word


class PeriodicRule(BitRule):
    def __init__(self, word: str):
        super().__init__()
        self.word = _check_word(word, "periodic word")
        if set(word) == {"1"}:
            raise AngleSpecError("periodic word of all ones is 0 with a non-terminating expansion")
        self.spec = f"rule:periodic:{word}"

    def bit(self, i):
        return int(self.word[(i - 1) % len(self.word)])

    def exact(self):
        return Fraction(int(self.word, 2), 2 ** len(self.word) - 1)


class PreperiodicRule(BitRule):
    def __init__(self, pre: str, word: str):
        super().__init__()
        self.pre = _check_word(pre, "preperiod") if pre else ""
        self.word = _check_word(word, "periodic word")
        if set(word) == {"1"}:
            raise AngleSpecError("periodic tail of all ones has a terminating expansion instead")
        self.spec = f"rule:preperiodic:{pre}:{word}"

    def bit(self, i):
        if i <= len(self.pre):
            return int(self.pre[i - 1])
        return int(self.word[(i - len(self.pre) - 1) % len(self.word)])

    def exact(self):
        tail = Fraction(int(self.word, 2), 2 ** len(self.word) - 1)
        head = int(self.pre, 2) if self.pre else 0
        return (head + tail) / 2 ** len(self.pre)


class ExplicitRule(BitRule):
    """A literal prefix followed by a constant fallback bit."""

    def __init__(self, prefix: str, fallback: int = 0):
        super().__init__()
        self.word = _check_word(prefix, "prefix")
        if fallback not in (0, 1):
            raise AngleSpecError(f"fallback bit must be 0 or 1, got {fallback!r}")
        self.fallback = fallback
        self.spec = f"rule:explicit:{prefix}:{fallback}" if fallback else f"bits:{prefix}"

    def bit(self, i):
        return int(self.word[i - 1]) if i <= len(self.word) else self.fallback

    def exact(self):
        return Fraction(int(self.word, 2) + self.fallback, 2 ** len(self.word))


class PositionsRule(BitRule):
    """Bit ``i`` is 1 exactly when ``predicate(i)`` holds."""

    def __init__(self, name: str, predicate: Callable[[int], bool]):
        super().__init__()
        self.name = name
        self.predicate = predicate
        self.spec = f"rule:{name}"

    def bit(self, i):
        return 1 if self.predicate(i) else 0


def is_triangular(i: int) -> bool:
    r = math.isqrt(8 * i + 1)
    return r * r == 8 * i + 1


POSITION_RULES: dict[str, Callable[[int], bool]] = {
    "triangular": is_triangular,
}


# ---------------------------------------------------------------------------
# angles
# ---------------------------------------------------------------------------


class Enclosure(NamedTuple):
    """Closed rational interval ``[lo, hi]``."""

    lo: Fraction
    hi: Fraction

    @property
    def width(self) -> Fraction:
        return self.hi - self.lo

    @property
    def is_exact(self) -> bool:
        return self.lo == self.hi

    def __contains__(self, x) -> bool:
        return self.lo <= x <= self.hi


class Angle:
    """Point of T = R/Z.  Subclasses are immutable."""

    __slots__ = ()

    def exact(self) -> Optional[Fraction]:
        raise NotImplementedError

    def bits_int(self, n: int) -> int:
        """``floor(angle * 2**n)``: the first ``n`` binary digits as an integer."""
        raise NotImplementedError

    def bits(self, n: int) -> str:
        if n < 1:
            raise ValueError("need n >= 1")
        return format(self.bits_int(n), f"0{n}b")

    def double(self) -> "Angle":
        raise NotImplementedError

    def shift(self, n: int) -> "Angle":
        a = self
        for _ in range(n):
            a = a.double()
        return a

    def halves(self) -> tuple["Angle", "Angle"]:
        raise NotImplementedError

    def enclosure(self, precision: int = DEFAULT_PRECISION) -> Enclosure:
        v = self.exact()
        if v is not None:
            return Enclosure(v, v)
        b = self.bits_int(precision)
        return Enclosure(Fraction(b, 1 << precision), Fraction(b + 1, 1 << precision))

    def __float__(self) -> float:
        v = self.exact()
        if v is not None:
            return float(v)
        return self.bits_int(64) / 2.0**64

    @property
    def spec(self) -> str:
        raise NotImplementedError


@dataclass(frozen=True)
class RationalAngle(Angle):
    value: Fraction

    def __post_init__(self):
        object.__setattr__(self, "value", Fraction(self.value) % 1)

    def exact(self):
        return self.value

    def bits_int(self, n):
        return (self.value.numerator << n) // self.value.denominator

    def double(self):
        return RationalAngle(2 * self.value)

    def shift(self, n):
        v = self.value
        return RationalAngle(Fraction((v.numerator << n) % v.denominator, v.denominator))

    def halves(self):
        return RationalAngle(self.value / 2), RationalAngle((self.value + 1) / 2)

    @property
    def spec(self):
        v = self.value
        return f"rat:{v.numerator}/{v.denominator}"

    def __repr__(self):
        return f"rat({self.value})"


@dataclass(frozen=True)
class StreamedAngle(Angle):
    """Angle whose digits are ``head`` followed by ``rule`` digits after ``offset``."""

    rule: BitRule
    head: str = ""
    offset: int = 0

    def exact(self):
        v = self.rule.exact()
        if v is None:
            return None
        v = Fraction((v.numerator << self.offset) % v.denominator, v.denominator)
        if self.head:
            v = (int(self.head, 2) + v) / 2 ** len(self.head)
        return v % 1

    def bits_int(self, n):
        h = len(self.head)
        if n <= h:
            return int(self.head[:n], 2) if n else 0
        m = n - h
        tail = self.rule.prefix(self.offset + m) & ((1 << m) - 1)
        return ((int(self.head, 2) if h else 0) << m) | tail

    def double(self):
        if self.head:
            return StreamedAngle(self.rule, self.head[1:], self.offset)
        return StreamedAngle(self.rule, "", self.offset + 1)

    def shift(self, n):
        h = len(self.head)
        if n <= h:
            return StreamedAngle(self.rule, self.head[n:], self.offset)
        return StreamedAngle(self.rule, "", self.offset + n - h)

    def halves(self):
        return (
            StreamedAngle(self.rule, "0" + self.head, self.offset),
            StreamedAngle(self.rule, "1" + self.head, self.offset),
        )

    @property
    def spec(self):
        s = self.rule.spec
        if self.offset:
            s = f"shift({s},{self.offset})"
        if self.head:
            s = f"prepend({self.head},{s})"
        return s

    def __repr__(self):
        return f"StreamedAngle({self.spec})"


AngleLike = Union[Angle, Fraction, int, str]


def rat(p, q=1) -> RationalAngle:
    return RationalAngle(Fraction(p, q))


def as_angle(x: AngleLike) -> Angle:
    if isinstance(x, Angle):
        return x
    if isinstance(x, str):
        return parse_angle(x)
    return RationalAngle(Fraction(x))


_RAT = re.compile(r"^-?\d+(/\d+)?$")
_WORD = re.compile(r"^[01]+$")


def parse_angle(spec: str) -> Angle:
    """Parse the angle mini-language.

    ``rat:p/q``, ``bits:<01-word>``, ``rule:triangular``,
    ``rule:periodic:<word>``, ``rule:preperiodic:<pre>:<word>`` and
    ``rule:explicit:<prefix>:<fallback>``.
    """
    spec = spec.strip()
    kind, _, rest = spec.partition(":")
    if kind == "rat":
        if not _RAT.match(rest):
            raise AngleSpecError(f"bad rational {rest!r} in {spec!r}")
        try:
            return RationalAngle(Fraction(rest))
        except ZeroDivisionError:
            raise AngleSpecError(f"zero denominator in {spec!r}") from None
    if kind == "bits":
        if not _WORD.match(rest):
            raise AngleSpecError(f"bad bit word in {spec!r}")
        return StreamedAngle(ExplicitRule(rest, 0))
    if kind == "rule":
        parts = rest.split(":")
        name, args = parts[0], parts[1:]
        if name in POSITION_RULES and not args:
            return StreamedAngle(PositionsRule(name, POSITION_RULES[name]))
        if name == "periodic" and len(args) == 1:
            return StreamedAngle(PeriodicRule(args[0]))
        if name == "preperiodic" and len(args) == 2:
            return StreamedAngle(PreperiodicRule(args[0], args[1]))
        if name == "explicit" and len(args) == 2 and args[1] in ("0", "1"):
            return StreamedAngle(ExplicitRule(args[0], int(args[1])))
        raise AngleSpecError(f"unknown rule or wrong arguments in {spec!r}")
    raise AngleSpecError(f"unknown angle spec {spec!r}")


# ---------------------------------------------------------------------------
# operations
# ---------------------------------------------------------------------------


def bits(theta: Angle, n: int) -> str:
    return theta.bits(n)


def double(theta: Angle) -> Angle:
    return theta.double()


def halves(theta: Angle) -> tuple[Angle, Angle]:
    return theta.halves()


def angles_equal(s: Angle, t: Angle, precision: int = DEFAULT_PRECISION) -> Optional[bool]:
    """True/False when decidable, None when only finitely many digits agree."""
    a, b = s.exact(), t.exact()
    if a is not None and b is not None:
        return a == b
    if s == t:
        return True
    if s.bits_int(precision) != t.bits_int(precision):
        # different digit prefixes mean different points unless one is a
        # dyadic written with a tail of ones; exact angles already use
        # the terminating form
        lo1, hi1 = s.enclosure(precision)
        lo2, hi2 = t.enclosure(precision)
        if hi1 < lo2 or hi2 < lo1:
            return False
    return None


def _circle_dist(x: Fraction) -> Fraction:
    x %= 1
    return min(x, 1 - x)


def dist(s: Angle, t: Angle, precision: int = DEFAULT_PRECISION) -> Enclosure:
    """Circle distance, exact for exact angles, else an enclosure of width <= 2**-precision."""
    if precision < 1:
        raise ValueError("precision must be >= 1")
    a, b = s.exact(), t.exact()
    if a is not None and b is not None:
        d = _circle_dist(b - a)
        return Enclosure(d, d)
    p = precision + 1
    es, et = s.enclosure(p), t.enclosure(p)
    centre = (et.lo + et.hi - es.lo - es.hi) / 2
    r = (es.width + et.width) / 2
    d = _circle_dist(centre)
    return Enclosure(max(Fraction(0), d - r), min(HALF, d + r))


@dataclass(frozen=True)
class Arc:
    """Closed counterclockwise arc from ``a`` to ``b``."""

    a: Angle
    b: Angle

    def __post_init__(self):
        if angles_equal(self.a, self.b) is True:
            raise ValueError("degenerate arc: endpoints coincide")

    def length(self, precision: int = DEFAULT_PRECISION) -> Enclosure:
        a, b = self.a.exact(), self.b.exact()
        if a is not None and b is not None:
            v = (b - a) % 1
            return Enclosure(v, v)
        p = precision + 1
        ea, eb = self.a.enclosure(p), self.b.enclosure(p)
        lo = eb.lo - ea.hi
        shift = math.floor(lo)
        return Enclosure(max(lo - shift, Fraction(0)), min(eb.hi - ea.lo - shift, Fraction(1)))

    def __repr__(self):
        return f"Arc({self.a!r}, {self.b!r})"


def arc(a: AngleLike, b: AngleLike) -> Arc:
    return Arc(as_angle(a), as_angle(b))


def sigma(S: Arc) -> Union[Arc, Angle]:
    """Image of ``S`` under doubling; collapses to a point when the endpoints identify."""
    a2, b2 = S.a.double(), S.b.double()
    same = angles_equal(a2, b2)
    if same is None:
        raise UndecidedError(f"cannot tell whether {S} collapses under doubling")
    return a2 if same else Arc(a2, b2)


def sigma_length(length: Fraction) -> Fraction:
    """Length law for the arc map: 2l below one half, 2l - 1 otherwise."""
    return 2 * length if length < HALF else 2 * length - 1


class Membership(str, enum.Enum):
    INSIDE = "inside"
    OUTSIDE = "outside"
    BOUNDARY = "boundary"
    UNDECIDED = "undecided"


def in_arc(t: Angle, S: Arc, precision: int = DEFAULT_PRECISION) -> Membership:
    if precision < 1:
        raise ValueError("precision must be >= 1")
    x, a, b = t.exact(), S.a.exact(), S.b.exact()
    if x is not None and a is not None and b is not None:
        u, L = (x - a) % 1, (b - a) % 1
        if u == 0 or u == L:
            return Membership.BOUNDARY
        return Membership.INSIDE if u < L else Membership.OUTSIDE
    et, ea = t.enclosure(precision), S.a.enclosure(precision)
    u_lo = et.lo - ea.hi
    u_hi = et.hi - ea.lo
    k = math.floor(u_lo)
    u_lo, u_hi = u_lo - k, u_hi - k
    L = S.length(precision)
    if u_hi >= 1:
        return Membership.UNDECIDED
    if 0 < u_lo and u_hi < L.lo:
        return Membership.INSIDE
    if u_lo > L.hi:
        return Membership.OUTSIDE
    return Membership.UNDECIDED


@dataclass(frozen=True)
class DyadicInterval:
    """``[index * 2**-depth, (index + 1) * 2**-depth]``."""

    depth: int
    index: int

    def __post_init__(self):
        if self.depth < 0 or not 0 <= self.index < (1 << self.depth):
            raise ValueError(f"index {self.index} out of range for depth {self.depth}")

    @property
    def lo(self) -> Fraction:
        return Fraction(self.index, 1 << self.depth)

    @property
    def hi(self) -> Fraction:
        return Fraction(self.index + 1, 1 << self.depth)

    @property
    def prefix(self) -> str:
        return format(self.index, f"0{self.depth}b") if self.depth else ""

    def contains(self, x: Fraction) -> bool:
        return self.lo <= x <= self.hi

    @classmethod
    def of(cls, theta: Angle, depth: int) -> "DyadicInterval":
        return cls(depth, theta.bits_int(depth))


def orbit_type(theta: Fraction) -> tuple[int, int]:
    """(preperiod, period) of a rational under doubling."""
    theta = Fraction(theta) % 1
    q = theta.denominator
    pre = (q & -q).bit_length() - 1
    odd = q >> pre
    if odd == 1:
        return pre, 1
    period, r = 1, 2 % odd
    while r != 1:
        r = (2 * r) % odd
        period += 1
    return pre, period
