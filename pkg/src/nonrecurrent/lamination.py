"""Finite-depth classes of the lamination generated by an angle.

The realization set of an itinerary prefix ``w`` is built by backward
induction ``X_k = L_{w_k} ∩ τ^{-1}(X_{k+1})`` starting from the full circle.
Its components shrink to the points of the class as the depth grows;
persistence of components between depth ``n/2`` and ``n`` is the
convergence diagnostic.

All arc arithmetic here is exact (``Fraction``).  A streamed angle is
replaced by its ``P``-digit truncation and the result is cross-checked
against the upper truncation.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Optional, Sequence, Union

from .circle import (
    DEFAULT_PRECISION,
    HALF,
    Angle,
    DyadicInterval,
    Enclosure,
    RationalAngle,
    UndecidedError,
    orbit_type,
    sigma_length,
)
from .symbolic import itinerary, kneading

ARC_CAP = 4096
MERGE_GUARD = 8


class ArcCapError(RuntimeError):
    def __init__(self, cap, depth_reached):
        super().__init__(f"more than {cap} arcs per level; stopped {depth_reached} levels deep")
        self.cap = cap
        self.depth_reached = depth_reached


class ConvergenceError(RuntimeError):
    pass


class PreconditionError(ValueError):
    pass


# ---------------------------------------------------------------------------
# exact arcs
# ---------------------------------------------------------------------------


@dataclass(frozen=True, order=True)
class Span:
    """Closed counterclockwise arc ``[start, start + length]``; a point when length is 0."""

    start: Fraction
    length: Fraction

    @property
    def end(self) -> Fraction:
        return self.start + self.length

    @property
    def is_full(self) -> bool:
        return self.length >= 1

    @property
    def midpoint(self) -> Fraction:
        return (self.start + self.length / 2) % 1

    def contains(self, x: Fraction) -> bool:
        return self.is_full or (x - self.start) % 1 <= self.length

    def covers(self, other: "Span") -> bool:
        if self.is_full:
            return True
        return (other.start - self.start) % 1 + other.length <= self.length

    def preimages(self) -> tuple["Span", "Span"]:
        s, l = self.start / 2, self.length / 2
        return Span(s, l), Span(s + HALF, l)

    def double(self) -> "Span":
        if self.length >= HALF:
            return FULL
        return Span((2 * self.start) % 1, 2 * self.length)

    def dyadic(self) -> DyadicInterval:
        """Smallest dyadic interval containing the arc."""
        if self.is_full or self.end > 1:
            return DyadicInterval(0, 0)
        a, b = self.start, self.end
        d = 0
        while True:
            ia = math.floor(a * 2 ** (d + 1))
            ib = math.floor(b * 2 ** (d + 1)) if b < 1 else 2 ** (d + 1) - 1
            if ia != ib and not (b * 2 ** (d + 1) == ib and ib == ia + 1):
                return DyadicInterval(d, math.floor(a * 2**d))
            d += 1
            if d > 4096:
                return DyadicInterval(d, math.floor(a * 2**d))

    def __repr__(self):
        return f"Span({self.start}, +{self.length})"


FULL = Span(Fraction(0), Fraction(1))


def span(a, b) -> Span:
    a, b = Fraction(a) % 1, Fraction(b) % 1
    return Span(a, (b - a) % 1)


def point(x) -> Span:
    return Span(Fraction(x) % 1, Fraction(0))


def intersect(u: Span, v: Span) -> list[Span]:
    """Positive-length pieces of ``u ∩ v``."""
    if u.is_full:
        return [v] if v.length > 0 else []
    if v.is_full:
        return [u] if u.length > 0 else []
    d = (v.start - u.start) % 1
    out = []
    for off in (d, d - 1):
        lo = max(Fraction(0), off)
        hi = min(u.length, off + v.length)
        if hi > lo:
            out.append(Span((u.start + lo) % 1, hi - lo))
    return out


def merge_spans(spans: Iterable[Span], gap: Fraction = Fraction(0)) -> list[Span]:
    """Union of closed arcs, joining pieces whose gap is at most ``gap``."""
    spans = sorted(spans)
    if not spans:
        return []
    if any(s.is_full for s in spans):
        return [FULL]
    out = [spans[0]]
    for s in spans[1:]:
        cur = out[-1]
        if s.start <= cur.end + gap:
            out[-1] = Span(cur.start, max(cur.end, s.end) - cur.start)
        else:
            out.append(s)
    while len(out) > 1 and out[-1].end + gap >= out[0].start + 1:
        last, first = out.pop(), out.pop(0)
        merged = Span(last.start, max(last.end, first.end + 1) - last.start)
        out.append(merged)
        # the merged arc may now swallow arcs at the front
        while len(out) > 1 and out[0].end + 1 <= merged.end:
            out.pop(0)
    if len(out) == 1 and out[0].length >= 1:
        return [FULL]
    return out


# ---------------------------------------------------------------------------
# pullback
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class ItineraryArcSystem:
    """Levels ``X_0 .. X_n`` of the pullback of ``word`` (``levels[k]`` is ``X_k``)."""

    word: str
    theta_model: Fraction
    model_error: Fraction
    levels: tuple

    @property
    def depth(self) -> int:
        return len(self.word)

    @property
    def base(self) -> tuple:
        return self.levels[0]


def theta_model(theta: Angle, precision: int) -> tuple[Fraction, Fraction]:
    """Exact value, or the ``precision``-digit truncation and its error bound."""
    v = theta.exact()
    if v is not None:
        return v, Fraction(0)
    return Fraction(theta.bits_int(precision), 1 << precision), Fraction(1, 1 << precision)


def pullback_spans(word: str, model: Fraction, cap: int = ARC_CAP) -> list[list[Span]]:
    n = len(word)
    L = {"1": Span(model / 2, HALF), "0": Span((model + 1) / 2, HALF)}
    levels = [[FULL]]
    X = [FULL]
    for k in range(n - 1, -1, -1):
        half = L[word[k]]
        pieces = []
        for s in X:
            if s.is_full:
                pieces.append(half)
                continue
            for p in s.preimages():
                pieces.extend(intersect(p, half))
        X = merge_spans(pieces)
        if len(X) > cap:
            raise ArcCapError(cap, n - k)
        levels.append(X)
    levels.reverse()
    return levels


def pullback(w: str, theta: Angle, *, precision: Optional[int] = None,
             cap: int = ARC_CAP) -> ItineraryArcSystem:
    if not w or set(w) - {"0", "1"}:
        raise ValueError(f"need a non-empty 0/1 word, got {w!r}")
    P = precision if precision is not None else len(w) + DEFAULT_PRECISION
    model, err = theta_model(theta, P)
    levels = pullback_spans(w, model, cap)
    return ItineraryArcSystem(w, model, err, tuple(tuple(x) for x in levels))


# ---------------------------------------------------------------------------
# classes
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class Cluster:
    span: Span
    exact: Optional[Fraction] = None

    @property
    def representative(self) -> Fraction:
        return self.exact if self.exact is not None else self.span.midpoint

    @property
    def width(self) -> Fraction:
        return self.span.length

    def contains(self, x: Fraction) -> bool:
        return self.span.contains(x)

    def to_json(self) -> dict:
        d = self.span.dyadic()
        return {
            "prefix": d.prefix,
            "enclosure": [_dec(self.span.start), _dec(self.span.end % 1 if self.span.end != 1 else 1)],
            "width": _dec(self.span.length),
            "exact": None if self.exact is None else f"{self.exact.numerator}/{self.exact.denominator}",
        }


def _dec(x: Fraction) -> str:
    return f"{float(x):.17g}"


@dataclass(frozen=True)
class LaminationClass:
    clusters: tuple
    depth: int
    converged: bool
    role: str = "generic"
    word: str = ""
    own: Optional[int] = None
    persistent_coarse: Optional[int] = None
    diagnostics: dict = field(default_factory=dict, compare=False)
    pieces: tuple = field(default=(), compare=False, repr=False)

    def __len__(self):
        return len(self.clusters)

    @property
    def spans(self) -> list[Span]:
        return [c.span for c in self.clusters]

    def angles(self) -> list[Fraction]:
        return [c.representative for c in self.clusters]

    def to_json(self) -> dict:
        return {
            "role": self.role,
            "depth": self.depth,
            "converged": self.converged,
            "clusters": [c.to_json() for c in self.clusters],
        }


def resolution(depth: int) -> Fraction:
    return Fraction(1, 2 ** (depth + MERGE_GUARD))


def cluster_gap(depth: int) -> Fraction:
    """Pieces closer than this are read as one cluster at the given depth."""
    return Fraction(1, 2 ** ((depth + 1) // 2))


def _pieces(word: str, model: Fraction, cap: int) -> list[Span]:
    return merge_spans(pullback_spans(word, model, cap)[0], resolution(len(word)))


def _components(word: str, model: Fraction, cap: int) -> list[Span]:
    return merge_spans(_pieces(word, model, cap), cluster_gap(len(word)))


def class_of_word(word: str, theta: Angle, role: str = "generic", *,
                  cap: int = ARC_CAP, precision: Optional[int] = None,
                  check: bool = True) -> LaminationClass:
    """Components of the realization set of ``word`` plus the persistence diagnostic."""
    n = len(word)
    P = precision if precision is not None else n + DEFAULT_PRECISION
    model, err = theta_model(theta, P)
    pieces = _pieces(word, model, cap)
    comps = merge_spans(pieces, cluster_gap(n))
    diag = {"model_error": err}
    converged = False
    coarse_count = None
    if check and n >= 2:
        h = n // 2
        coarse = _components(word[:h], model, cap)
        persistent = [c for c in coarse if any(c.covers(d) for d in comps)]
        coarse_count = len(persistent)
        converged = len(comps) == len(persistent)
        if err:
            # the true angle lies within err of the model; both truncations must agree
            other = _components(word, model + err, cap)
            stable = len(other) == len(comps) and all(
                abs(a.start - b.start) <= 4 * err + resolution(n) for a, b in zip(comps, other))
            diag["model_stable"] = stable
            converged = converged and stable
    return LaminationClass(tuple(Cluster(s) for s in comps), n, converged, role, word,
                           None, coarse_count, diag, tuple(pieces))


def _screen(theta: Angle):
    v = theta.exact()
    if v is not None:
        pre, _ = orbit_type(v)
        if pre == 0:
            raise PreconditionError(f"{theta.spec} is periodic under doubling")


def simplest_between(lo: Fraction, hi: Fraction) -> Fraction:
    """Fraction with the smallest denominator in ``[lo, hi]``."""
    fl = math.floor(lo)
    if lo == fl:
        return Fraction(fl)
    if fl + 1 <= hi:
        return Fraction(fl + 1)
    return fl + 1 / simplest_between(1 / (hi - fl), 1 / (lo - fl))


def _same_itinerary(x: Fraction, theta: Fraction) -> bool:
    """Exact comparison of the full itineraries of two rationals of the same orbit type."""
    px, qx = orbit_type(x)
    pt, qt = orbit_type(theta)
    n = max(px, pt) + qx * qt // math.gcd(qx, qt)
    a = itinerary(RationalAngle(x), RationalAngle(theta), n, "+").symbols
    b = itinerary(RationalAngle(x), RationalAngle(theta), n, "-").symbols
    c = itinerary(RationalAngle(theta), RationalAngle(theta), n, "+").symbols
    return a == b == c


def _recover_exact(s: Span, theta: Fraction) -> Optional[Fraction]:
    if s.end <= 1:
        cand = simplest_between(s.start, s.end) % 1
    else:
        cand = min((simplest_between(s.start, Fraction(1)), simplest_between(Fraction(0), s.end - 1)),
                   key=lambda f: f.denominator) % 1
    # a partner of theta has a denominator of the same shape: 2^k times a divisor of 2^p - 1
    pre, per = orbit_type(theta)
    q = cand.denominator
    k = (q & -q).bit_length() - 1
    if k > pre + 1 or pow(2, per, q >> k) != 1 % (q >> k):
        return None
    return cand if _same_itinerary(cand, theta) else None


def characteristic_class(theta: Angle, depth: int = 64, *, cap: int = ARC_CAP) -> LaminationClass:
    """Finite-depth characteristic class: the components carrying the kneading itinerary of ``theta``."""
    _screen(theta)
    nu = kneading(theta, depth, p_max=0).symbols
    cls = class_of_word(nu, theta, "characteristic", cap=cap)
    v = theta.exact()
    P = depth + DEFAULT_PRECISION
    lo, hi = theta.enclosure(P)
    own = next((i for i, c in enumerate(cls.clusters) if c.contains(lo) and c.contains(hi)), None)
    clusters = list(cls.clusters)
    if v is not None:
        for i, c in enumerate(clusters):
            ex = v if i == own else _recover_exact(c.span, v)
            clusters[i] = Cluster(c.span, ex)
    converged = cls.converged and own is not None and len(clusters) <= 2
    cls.diagnostics["cluster_count"] = len(clusters)
    return LaminationClass(tuple(clusters), depth, converged, "characteristic", nu, own,
                           cls.persistent_coarse, cls.diagnostics, cls.pieces)


def image_class(theta: Angle, k: int, depth: int = 64, *, cap: int = ARC_CAP) -> LaminationClass:
    """Finite-depth class of ``tau^k`` applied to the characteristic class."""
    nu = kneading(theta, k + depth, p_max=0).symbols
    return class_of_word(nu[k:k + depth], theta, "forward-image", cap=cap,
                         precision=k + depth + DEFAULT_PRECISION)


def critical_class(theta, depth: int = 64, *, strict: bool = True) -> LaminationClass:
    """Full preimage of the characteristic class (``theta`` may also be a computed class)."""
    A = theta if isinstance(theta, LaminationClass) else characteristic_class(theta, depth)
    if strict and not A.converged:
        raise ConvergenceError("characteristic class did not converge")
    clusters = []
    for c in A.clusters:
        s1, s2 = c.span.preimages()
        e1 = e2 = None
        if c.exact is not None:
            e1, e2 = c.exact / 2, (c.exact + 1) / 2
        clusters += [Cluster(s1, e1), Cluster(s2, e2)]
    clusters.sort(key=lambda c: c.span)
    pieces = sorted(p for s in A.pieces for p in s.preimages())
    return LaminationClass(tuple(clusters), A.depth + 1, A.converged, "critical", "",
                           pieces=tuple(pieces))


# ---------------------------------------------------------------------------
# class-level properties
# ---------------------------------------------------------------------------


SpanLike = Union[Span, Cluster, Fraction, int]


def _as_spans(x) -> list[Span]:
    if isinstance(x, LaminationClass):
        return list(x.pieces) or x.spans
    out = []
    for item in x:
        if isinstance(item, Span):
            out.append(item)
        elif isinstance(item, Cluster):
            out.append(item.span)
        elif isinstance(item, Angle):
            v = item.exact()
            if v is None:
                raise TypeError("streamed angles need an enclosure; pass a Span")
            out.append(point(v))
        else:
            out.append(point(item))
    return out


def unlinked(A, B) -> bool:
    """True iff the convex hulls of ``A`` and ``B`` are disjoint.

    Equivalent to all of ``B`` sitting in one complementary gap of ``A``.
    Shared endpoints are allowed.  Overlapping pieces raise
    :class:`UndecidedError`.
    """
    a = sorted(_as_spans(A))
    b = _as_spans(B)
    if not a or not b:
        return True
    gaps = []
    for i, s in enumerate(a):
        nxt = a[(i + 1) % len(a)]
        start = s.end % 1
        length = (nxt.start - s.end) % 1
        if len(a) == 1:
            length = 1 - s.length
        gaps.append(Span(start, length))
    where = set()
    for s in b:
        hits = [i for i, g in enumerate(gaps) if g.covers(s)]
        if not hits:
            raise UndecidedError(f"{s} overlaps the hull vertices of the other class")
        where.add(hits[0])
    return len(where) == 1


def double_spans(spans: Sequence[Span], depth: int) -> list[Span]:
    """Doubled arcs merged exactly as depth ``depth`` clusters are."""
    return merge_spans([s.double() for s in spans], resolution(depth))


def nested_in(fine, coarse) -> bool:
    cs = _as_spans(coarse)
    return all(any(c.covers(f) for c in cs) for f in _as_spans(fine))


@dataclass(frozen=True)
class ClassSeparation:
    horizon: int
    delta_class: Fraction
    argmin: Optional[int]
    wandering_ok: bool
    members: int
    depth: int


def _member_windows(theta: Angle, A: LaminationClass, N: int, P: int) -> list[list[tuple[int, int]]]:
    """Integer windows ``[lo, hi]`` at scale ``2**P`` for ``tau^n`` of each member, n = 0..N."""
    full = 1 << P
    out = []
    for i, c in enumerate(A.clusters):
        rows = []
        if c.exact is not None:
            x = c.exact
            for _ in range(N + 1):
                w = math.floor(x * full)
                rows.append((w, w if x * full == w else w + 1))
                x = (2 * x) % 1
        elif i == A.own:
            B = theta.bits_int(N + P)
            for n in range(N + 1):
                w = (B >> (N - n)) & (full - 1)
                rows.append((w, w + 1))
        else:
            s = c.span
            for n in range(N + 1):
                width = s.length * 2**n
                if width * 256 >= 1:
                    raise UndecidedError(f"cluster too wide to follow {n} doublings")
                lo = (s.start * 2**n) % 1
                rows.append((math.floor(lo * full), math.ceil((lo + width) * full)))
        out.append(rows)
    return out


def _window_dist_lo(a: tuple[int, int], b: tuple[int, int], full: int) -> int:
    """Lower bound (scaled) on the circle distance between two windows."""
    ca2 = a[0] + a[1]
    cb2 = b[0] + b[1]
    D = (cb2 - ca2) % (2 * full)
    d2 = min(D, 2 * full - D)
    r2 = (a[1] - a[0]) + (b[1] - b[0])
    return max(0, (d2 - r2) // 2)


def _windows_disjoint(W, full: int) -> bool:
    """No window of one step meets a window of another step."""
    items = sorted((w[0], w[1], n) for rows in W for n, w in enumerate(rows))
    items.append((items[0][0] + full, items[0][1] + full, items[0][2]))
    reach, owner = items[0][1], items[0][2]
    for lo, hi, n in items[1:]:
        if lo <= reach and n != owner:
            return False
        if hi > reach:
            reach, owner = hi, n
    return True


def class_orbit_separation(theta: Angle, depth: int = 64, N: int = 512, *,
                           precision: int = DEFAULT_PRECISION,
                           max_precision: int = 1024) -> ClassSeparation:
    """Certified ``min dist(A, tau^n A)`` over ``1 <= n <= N`` and a wandering check."""
    A = characteristic_class(theta, depth)
    if not A.converged:
        raise ConvergenceError(f"characteristic class of {theta.spec} did not converge at depth {depth}")
    needs_depth = any(c.exact is None and i != A.own for i, c in enumerate(A.clusters))
    if needs_depth and depth < N + precision + MERGE_GUARD:
        deep = characteristic_class(theta, N + precision + MERGE_GUARD)
        if len(deep) != len(A):
            raise ConvergenceError("cluster count changed under deeper pullback")
        A = deep
    exact = all(c.exact is not None for c in A.clusters)
    P = precision
    while True:
        full = 1 << P
        W = _member_windows(theta, A, N, P)
        wandering = exact or _windows_disjoint(W, full)
        if wandering or P >= max_precision:
            break
        P *= 2
    best, argmin = None, None
    for n in range(1, N + 1):
        d = min(_window_dist_lo(W[i][0], W[j][n], full)
                for i in range(len(W)) for j in range(len(W)))
        if best is None or d < best:
            best, argmin = d, n
    if exact:
        seen = {}
        for c in A.clusters:
            x = c.exact
            for n in range(N + 1):
                if seen.setdefault(x, n) != n:
                    wandering = False
                x = (2 * x) % 1
    return ClassSeparation(N, Fraction(best, full), argmin, wandering, len(A), A.depth)


@dataclass(frozen=True)
class ShortestArc:
    ok: Optional[bool]
    vacuous: bool
    s1_plus: Optional[Enclosure]
    min_length: Optional[Enclosure]
    argmin: Optional[tuple[int, str]]


def _double_len(e: Enclosure) -> Enclosure:
    if e.lo < HALF <= e.hi and not (e.lo == e.hi):
        raise UndecidedError("arc length straddles 1/2")
    return Enclosure(sigma_length(e.lo), sigma_length(e.hi))


def arc_lengths(first: Enclosure, N: int) -> list[Enclosure]:
    """``|S_1|, ..., |S_N|`` following the arc-map length law."""
    out = [first]
    for _ in range(N - 1):
        out.append(_double_len(out[-1]))
    return out


def shortest_arc_check(theta: Angle, N: int = 512, depth: int = 64) -> ShortestArc:
    """Is the shorter arc cut out by a two-point characteristic class the shortest of its images?"""
    A = characteristic_class(theta, depth)
    if not A.converged:
        raise ConvergenceError(f"characteristic class of {theta.spec} did not converge")
    if len(A) == 1:
        return ShortestArc(True, True, None, None, None)
    if any(c.exact is None for i, c in enumerate(A.clusters) if i != A.own):
        A = characteristic_class(theta, max(depth, N + DEFAULT_PRECISION + MERGE_GUARD))
        if len(A) != 2:
            raise ConvergenceError("cluster count changed under deeper pullback")
    own = A.own
    other = A.clusters[1 - own]
    P = A.depth + DEFAULT_PRECISION
    t = theta.enclosure(P)
    if other.exact is not None:
        eta = Enclosure(other.exact, other.exact)
    else:
        eta = Enclosure(other.span.start, other.span.end)
    lo = eta.lo - t.hi
    k = math.floor(lo)
    first = Enclosure(lo - k, eta.hi - t.lo - k)
    if first.lo < HALF <= first.hi and first.lo != first.hi:
        raise UndecidedError("the two members are nearly antipodal")
    plus = first if first.hi < HALF else Enclosure(1 - first.hi, 1 - first.lo)
    minus = Enclosure(1 - plus.hi, 1 - plus.lo)
    seq_p, seq_m = arc_lengths(plus, N), arc_lengths(minus, N)
    ok: Optional[bool] = True
    best, arg = None, None
    for n in range(1, N):
        for sign, e in (("+", seq_p[n]), ("-", seq_m[n])):
            if best is None or e.lo < best.lo:
                best, arg = e, (n + 1, sign)
            if e.hi < plus.lo:
                ok = False
            elif e.lo < plus.hi and ok:
                ok = None
    return ShortestArc(ok, False, plus, best, arg)
