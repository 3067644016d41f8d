"""Itineraries, kneading sequences and finite-depth non-recurrence certificates.

The circle is cut at the two preimages of ``theta``.  ``L1`` is the closed
half circle running counterclockwise from ``theta/2`` to ``(theta+1)/2``
(it contains ``theta``); ``L0`` is the other one.  A point sitting exactly on
a cut is resolved by the side it is approached from.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Optional

from .circle import (
    DEFAULT_PRECISION,
    Angle,
    Arc,
    Membership,
    RationalAngle,
    UndecidedError,
    angles_equal,
    dist,
    in_arc,
)

MAX_PRECISION = 4096


@dataclass(frozen=True)
class ItineraryWord:
    symbols: str
    base: Angle
    side: str
    start: Optional[Angle] = None

    @property
    def depth(self) -> int:
        return len(self.symbols)

    def __str__(self):
        return self.symbols


def _resolve(x: Angle, L1: Arc, side: str, precision: int, max_precision: int) -> str:
    p = precision
    while True:
        m = in_arc(x, L1, p)
        if m is Membership.INSIDE:
            return "1"
        if m is Membership.OUTSIDE:
            return "0"
        if m is Membership.BOUNDARY or p >= max_precision:
            if angles_equal(x, L1.a, p) is True:
                return "1" if side == "+" else "0"
            if angles_equal(x, L1.b, p) is True:
                return "0" if side == "+" else "1"
            if m is Membership.BOUNDARY:
                raise AssertionError("boundary verdict without matching endpoint")
            raise UndecidedError(f"cannot place {x!r} relative to the cut of {L1.a!r} at {p} bits")
        p *= 2


def partition_arc(theta: Angle) -> Arc:
    """The half circle ``L1`` running from ``theta/2`` to ``(theta+1)/2``."""
    lo, hi = theta.halves()
    return Arc(lo, hi)


def itinerary(t: Angle, theta: Angle, n: int, side: str = "+", *,
              precision: int = DEFAULT_PRECISION,
              max_precision: int = MAX_PRECISION) -> ItineraryWord:
    """First ``n`` symbols of the one-sided itinerary of ``t`` with respect to ``theta``."""
    if n < 1:
        raise ValueError("depth must be >= 1")
    if side not in ("+", "-"):
        raise ValueError(f"side must be '+' or '-', got {side!r}")
    L1 = partition_arc(theta)
    out = []
    x = t
    for _ in range(n):
        out.append(_resolve(x, L1, side, precision, max_precision))
        x = x.double()
    return ItineraryWord("".join(out), theta, side, t)


@dataclass(frozen=True)
class PeriodRefutation:
    refuted: frozenset
    smallest_unrefuted: Optional[int]
    p_max: int

    @property
    def all_refuted(self) -> bool:
        return self.smallest_unrefuted is None


def refute_periods(w: str, p_max: int) -> PeriodRefutation:
    """Periods ``p <= p_max`` contradicted by the finite word ``w``.

    Period ``p`` is refuted iff ``w[i] != w[i + p]`` for some ``i``.  A
    prefix can never certify aperiodicity, only rule periods out.
    """
    if p_max < 1 or 2 * p_max > len(w):
        raise ValueError(f"need 1 <= p_max <= len(w)/2, got p_max={p_max}, len={len(w)}")
    refuted = set()
    smallest = None
    for p in range(1, p_max + 1):
        if w[p:] != w[:-p]:
            refuted.add(p)
        elif smallest is None:
            smallest = p
    return PeriodRefutation(frozenset(refuted), smallest, p_max)


@dataclass(frozen=True)
class KneadingPrefix:
    word: ItineraryWord
    minus: str
    disagreement: Optional[int]
    refuted: Optional[PeriodRefutation] = field(default=None, compare=False)

    @property
    def symbols(self) -> str:
        return self.word.symbols

    @property
    def refuted_periods(self) -> frozenset:
        return self.refuted.refuted if self.refuted else frozenset()

    @property
    def periodic(self) -> bool:
        """A +/- disagreement means ``theta`` is periodic under doubling."""
        return self.disagreement is not None


def kneading(theta: Angle, n: int, *, precision: int = DEFAULT_PRECISION,
             p_max: Optional[int] = None) -> KneadingPrefix:
    if theta.exact() == 0:
        raise ValueError("the kneading sequence of 0 is undefined (0 is fixed)")
    plus = itinerary(theta, theta, n, "+", precision=precision)
    minus = itinerary(theta, theta, n, "-", precision=precision)
    bad = next((i for i, (a, b) in enumerate(zip(plus.symbols, minus.symbols)) if a != b), None)
    if p_max is None:
        p_max = n // 2
    ref = refute_periods(plus.symbols, p_max) if p_max >= 1 else None
    return KneadingPrefix(plus, minus.symbols, bad, ref)


@dataclass(frozen=True)
class NonrecurrenceCertificate:
    horizon: int
    delta_hat: Fraction
    argmin: Optional[int]
    periodic_collision: Optional[tuple[int, int]]
    undecided: bool = False
    precision: int = DEFAULT_PRECISION

    @property
    def ok(self) -> bool:
        return self.periodic_collision is None and not self.undecided and self.delta_hat > 0


def _exact_nonrecurrence(theta: Angle, N: int) -> NonrecurrenceCertificate:
    v = theta.exact()
    seen = {v: 0}
    best, argmin, collision = None, None, None
    x = v
    for n in range(1, N + 1):
        x = (2 * x) % 1
        if x in seen:
            collision = (seen[x], n)
            break
        seen[x] = n
        d = dist(theta, RationalAngle(x)).lo
        if best is None or d < best:
            best, argmin = d, n
    return NonrecurrenceCertificate(N, best if best is not None else Fraction(0), argmin, collision)


def _windows(theta: Angle, N: int, P: int) -> list[int]:
    B = theta.bits_int(N + P)
    mask = (1 << P) - 1
    return [(B >> (N - n)) & mask for n in range(N + 1)]


def angle_nonrecurrence(theta: Angle, N: int, precision: int = DEFAULT_PRECISION, *,
                        max_precision: int = 1024) -> NonrecurrenceCertificate:
    """Certified lower bound on ``min dist(theta, tau^n theta)`` for ``1 <= n <= N``.

    For exact angles the orbit is followed exactly and the first coincidence
    ``tau^m theta == tau^n theta`` is reported; the bound covers the distinct
    orbit points before it.  For streamed angles both the bound and the
    distinctness of the orbit points are certified from digit windows, and
    ``undecided`` is set when two windows cannot be separated.
    """
    if N < 1:
        raise ValueError("horizon must be >= 1")
    if theta.exact() is not None:
        return _exact_nonrecurrence(theta, N)

    P = precision
    W = _windows(theta, N, P)
    full = 1 << P
    best, argmin = None, None
    for n in range(1, N + 1):
        D = (W[n] - W[0]) % full
        d = min(D, full - D)
        lo = Fraction(max(d - 1, 0), full)
        if best is None or lo < best:
            best, argmin = lo, n

    # distinctness: only neighbours in sorted order can overlap
    undecided = False
    order = sorted(range(N + 1), key=W.__getitem__)
    suspects = []
    for i in range(len(order)):
        a, b = order[i], order[(i + 1) % len(order)]
        if a != b and (W[b] - W[a]) % full <= 1:
            suspects.append((min(a, b), max(a, b)))
    for m, n in suspects:
        p = P
        while p < max_precision:
            p *= 2
            wm = theta.shift(m).bits_int(p)
            wn = theta.shift(n).bits_int(p)
            if (wn - wm) % (1 << p) > 1 and (wm - wn) % (1 << p) > 1:
                break
        else:
            undecided = True
    return NonrecurrenceCertificate(N, best, argmin, None, undecided, P)
