"""External rays of f_c and parameter rays of the Mandelbrot set.

Rays are parametrized by the log-potential ``G``.  At each ``G`` we pick the
smallest ``n`` with ``2^n G >= ln R`` and solve

    f_c^n(z) = exp(2^n G + 2 pi i tau^n t)            (dynamical ray)
    f_c^n(c) = exp(2^n G + 2 pi i tau^n theta)        (parameter ray, F_0 = c)

by Newton's method, starting from the previous sample.  Many rays are traced
at once as numpy lanes; a lane whose Newton solve fails is retried with the
potential step split in half, up to ``max_halvings`` times.
"""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, replace
from fractions import Fraction
from typing import Iterable, Optional, Sequence

import numpy as np

from .circle import Angle, as_angle, orbit_type

LN2 = math.log(2)
TWO_PI = 2 * math.pi
JUMP_FACTOR = 8.0
EPS = np.finfo(float).eps


@dataclass(frozen=True)
class PotentialSchedule:
    G_start: float = math.log(100)
    k: int = 8
    G_floor: float = 2.0**-22 * LN2
    max_steps: int = 100_000

    def __post_init__(self):
        if not self.G_start > self.G_floor > 0:
            raise ValueError("need G_start > G_floor > 0")
        if self.k < 1:
            raise ValueError("k must be >= 1")

    def potentials(self) -> np.ndarray:
        steps = math.ceil(self.k * math.log2(self.G_start / self.G_floor))
        steps = min(steps, self.max_steps)
        G = self.G_start * 2.0 ** (-np.arange(steps) / self.k)
        G = G[G > self.G_floor]
        return np.append(G, self.G_floor)

    def depth(self, ln_R: float) -> int:
        """Largest iteration count used along the trace."""
        return max(0, math.ceil(math.log2(ln_R / self.G_floor)))


@dataclass(frozen=True)
class TraceOptions:
    newton_tol: float = 1e-12
    max_newton: int = 60
    max_halvings: int = 6
    R_work: float = 1e6
    landing_tol: float = 1e-6
    window: int = 8
    critical_guard: float = 1e-6
    refine: bool = True
    refine_tol: float = 1e-14

    @property
    def ln_R(self) -> float:
        return math.log(self.R_work)


def iterations_for(G, ln_R: float):
    """Smallest ``n >= 0`` with ``2^n G >= ln_R``."""
    n = np.ceil(np.log2(ln_R / np.asarray(G, dtype=float)))
    return np.maximum(n, 0).astype(int)


class _AngleTable:
    """Float values of ``tau^m t`` for a batch of angles, read from their bit streams."""

    def __init__(self, angles: Sequence[Angle], depth: int):
        self.angles = list(angles)
        self.depth = depth
        rows = []
        for a in self.angles:
            v = a.exact()
            if v is not None:
                x, row = v, []
                for _ in range(depth + 1):
                    row.append(float(x))
                    x = (2 * x) % 1
            else:
                B = a.bits_int(depth + 53)
                mask = (1 << 53) - 1
                row = [((B >> (depth - m)) & mask) / 2.0**53 for m in range(depth + 1)]
            rows.append(row)
        self.table = np.array(rows, dtype=float).reshape(len(self.angles), depth + 1)

    @property
    def bits_consumed(self) -> int:
        return self.depth + 53

    def __call__(self, m: int) -> np.ndarray:
        return self.table[:, m]


def _targets(G, n, frac):
    return np.exp(2.0**n * G + TWO_PI * 1j * frac)


def _orbit(z, n, c, param):
    """``F_n``, its derivative (in ``c`` for parameter rays, in ``z`` otherwise)
    and ``max_j |F_j / dF_j|``, which sets the round-off floor of a Newton step."""
    F = z.copy()
    dF = np.ones_like(z)
    cc = z if param else c
    worst = np.abs(F)
    for _ in range(n):
        dF = 2 * F * dF + (1 if param else 0)
        F = F * F + cc
        worst = np.maximum(worst, np.abs(F) / np.abs(dF))
    return F, dF, worst


def _solve(z, G, n, frac_n, c, param, opts):
    """Newton at potential ``G``; returns (z, ok, residual, iters)."""
    T = _targets(G, n, frac_n)
    ok = np.zeros(z.shape, bool)
    iters = np.zeros(z.shape, int)
    res = np.full(z.shape, np.inf)
    active = np.ones(z.shape, bool)
    with np.errstate(all="ignore"):
        for it in range(opts.max_newton):
            idx = np.nonzero(active)[0]
            if idx.size == 0:
                break
            F, dF, worst = _orbit(z[idx], n, None if c is None else c[idx], param)
            step = (F - T[idx]) / dF
            z[idx] = z[idx] - step
            iters[idx] = it + 1
            r = np.abs(step) / np.maximum(1.0, np.abs(z[idx]))
            # round-off floor of the solve: near critical points or deep in
            # the iteration the tolerance may be out of reach in double precision
            floor = 4 * EPS * worst
            bad = ~np.isfinite(r)
            done = ((r <= opts.newton_tol) | (np.abs(step) <= floor)) & ~bad
            res[idx[done]] = r[done]
            ok[idx[done]] = True
            active[idx[done | bad]] = False
    return z, ok, res, iters


def _trace_lanes(kind: str, c, angles: Sequence[Angle], sched: PotentialSchedule,
                 opts: TraceOptions):
    param = kind == "param"
    Gs = sched.potentials()
    ns = iterations_for(Gs, opts.ln_R)
    halving_depth = int(ns.max()) + opts.max_halvings + 2
    table = _AngleTable(angles, halving_depth)
    L = len(angles)
    z = np.exp(Gs[0] + TWO_PI * 1j * table(0))
    if not param:
        z = z.astype(complex)
    cvec = None if param else np.full(L, complex(c))
    alive = np.ones(L, bool)
    samples = [[] for _ in range(L)]
    min_abs = np.full(L, np.inf)
    step_prev = np.full(L, np.inf)

    def attempt(idx, z0, G, depth):
        """Move lanes ``idx`` from their current potential to ``G``; returns mask of success."""
        n = int(iterations_for(G, opts.ln_R))
        cc = None if param else cvec[idx]
        zn, ok, res, iters = _solve(z0.copy(), G, n, table(n)[idx], cc, param, opts)
        # a jump onto another branch of the inverse shows up as a sudden long move
        ok &= np.abs(zn - z0) <= JUMP_FACTOR * step_prev[idx] + 1e-10 * np.maximum(1.0, np.abs(z0))
        return zn, ok, res, iters

    G_prev = None
    for j, G in enumerate(Gs):
        idx = np.nonzero(alive)[0]
        if idx.size == 0:
            break
        zn, ok, res, iters = attempt(idx, z[idx], G, 0)
        if not ok.all() and G_prev is not None:
            # split the step for the failing lanes
            bad = idx[~ok]
            for b in bad:
                zb, okb, rb, ib = _halve(kind, b, z[b], G_prev, G, opts.max_halvings, attempt)
                k = np.searchsorted(idx, b)
                zn[k], ok[k], res[k], iters[k] = zb, okb, rb, ib
        for k, i in enumerate(idx):
            if ok[k]:
                if G_prev is not None:
                    step_prev[i] = abs(zn[k] - z[i])
                z[i] = zn[k]
                samples[i].append((float(G), complex(zn[k]), float(res[k]), int(iters[k])))
                min_abs[i] = min(min_abs[i], abs(zn[k]))
            else:
                alive[i] = False
        G_prev = G
    n_max = int(ns.max())
    return samples, alive, min_abs, table, n_max


def _halve(kind, lane, z0, G0, G1, levels, attempt):
    """Reach ``G1`` from ``G0`` by repeatedly splitting the potential step."""
    idx = np.array([lane])
    for h in range(1, levels + 1):
        parts = 2**h
        z = np.array([z0])
        ok = True
        for s in range(1, parts + 1):
            G = G0 * (G1 / G0) ** (s / parts)
            z, okv, res, iters = attempt(idx, z, G, h)
            if not okv[0]:
                ok = False
                break
        if ok:
            return z[0], True, res[0], iters[0]
    return z0, False, np.inf, 0


# ---------------------------------------------------------------------------
# results
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class Landing:
    estimate: complex
    tail_diameter: float
    converged: bool


def landing_estimate(samples, tol: float, window: int, *, reached_floor: bool = True,
                     truncated: bool = False) -> Landing:
    """Last position and the diameter of the last ``window`` positions."""
    if len(samples) < window or window < 1:
        raise ValueError(f"need at least {window} samples")
    pts = np.array([s[1] if isinstance(s, tuple) else s for s in samples[-window:]], dtype=complex)
    diam = float(np.abs(pts[:, None] - pts[None, :]).max())
    ok = diam < tol and reached_floor and not truncated
    return Landing(complex(pts[-1]), diam, ok)


@dataclass(frozen=True)
class RayTraceResult:
    kind: str
    angle: str
    parameter: Optional[complex]
    samples: tuple
    raw_landing: complex
    landing_estimate: complex
    tail_diameter: float
    converged: bool
    truncated: bool
    angle_bits_consumed: int
    refinement: Optional[str] = None
    refinement_shift: float = 0.0
    critical_approach: float = math.inf
    critical_flag: bool = False

    @property
    def potentials(self) -> np.ndarray:
        return np.array([s[0] for s in self.samples])

    @property
    def positions(self) -> np.ndarray:
        return np.array([s[1] for s in self.samples], dtype=complex)

    @property
    def residuals(self) -> np.ndarray:
        return np.array([s[2] for s in self.samples])

    @property
    def final_potential(self) -> float:
        return self.samples[-1][0] if self.samples else math.nan

    def to_json(self, with_samples: bool = False) -> dict:
        d = {
            "kind": self.kind,
            "angle": self.angle,
            "parameter": None if self.parameter is None else [self.parameter.real, self.parameter.imag],
            "landing": [self.landing_estimate.real, self.landing_estimate.imag],
            "raw_landing": [self.raw_landing.real, self.raw_landing.imag],
            "refinement": self.refinement,
            "refinement_shift": self.refinement_shift,
            "tail_diameter": self.tail_diameter,
            "final_potential": self.final_potential,
            "samples": len(self.samples),
            "converged": self.converged,
            "truncated": self.truncated,
            "angle_bits_consumed": self.angle_bits_consumed,
            "critical_approach": None if math.isinf(self.critical_approach) else self.critical_approach,
            "critical_flag": self.critical_flag,
        }
        if with_samples:
            d["trace"] = [[G, z.real, z.imag, r, it] for G, z, r, it in self.samples]
        return d

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["potential", "re", "im", "residual", "iters"])
        for G, z, r, it in self.samples:
            w.writerow([repr(G), repr(z.real), repr(z.imag), repr(r), it])
        return buf.getvalue()


def _finish(kind, angle, c, samples, alive, min_abs, bits, sched, opts, refine_fn) -> RayTraceResult:
    truncated = not alive
    reached = bool(samples) and samples[-1][0] <= sched.G_floor * (1 + 1e-12)
    if len(samples) >= opts.window:
        land = landing_estimate(samples, opts.landing_tol, opts.window,
                                reached_floor=reached, truncated=truncated)
    else:
        last = samples[-1][1] if samples else complex("nan")
        land = Landing(last, math.inf, False)
    raw = land.estimate
    est, how, shift = raw, None, 0.0
    if refine_fn is not None and opts.refine and samples and not truncated:
        r = refine_fn(raw)
        if r is not None:
            est, how = r
            shift = abs(est - raw)
    converged = land.converged or (how is not None and reached)
    guard = kind == "dynamical" and min_abs < opts.critical_guard
    return RayTraceResult(kind, angle.spec, c, tuple(samples), raw, est, land.tail_diameter,
                          converged, truncated, bits, how, shift, float(min_abs), bool(guard))


def trace_param_ray(theta, sched: PotentialSchedule = PotentialSchedule(),
                    opts: TraceOptions = TraceOptions()) -> RayTraceResult:
    """Parameter ray ``R_M(theta)`` from ``G_start`` down to ``G_floor``."""
    theta = as_angle(theta)
    samples, alive, min_abs, table, _ = _trace_lanes("param", None, [theta], sched, opts)
    v = theta.exact()
    refine = (lambda c0: refine_param_landing(v, c0, opts.refine_tol)) if v is not None else None
    return _finish("param", theta, None, samples[0], bool(alive[0]), min_abs[0],
                   table.bits_consumed, sched, opts, refine)


def trace_dynamical_rays(c: complex, angles: Iterable, sched: PotentialSchedule = PotentialSchedule(),
                         opts: TraceOptions = TraceOptions()) -> list[RayTraceResult]:
    """Dynamical rays of ``f_c`` at many angles, traced together."""
    angles = [as_angle(a) for a in angles]
    if not angles:
        return []
    c = complex(c)
    samples, alive, min_abs, table, _ = _trace_lanes("dynamical", c, angles, sched, opts)
    out = []
    for i, a in enumerate(angles):
        v = a.exact()
        refine = (lambda z0, v=v: refine_dynamical_landing(c, v, z0, opts.refine_tol)) if v is not None else None
        out.append(_finish("dynamical", a, c, samples[i], bool(alive[i]), min_abs[i],
                           table.bits_consumed, sched, opts, refine))
    return out


def trace_dynamical_ray(c: complex, t, sched: PotentialSchedule = PotentialSchedule(),
                        opts: TraceOptions = TraceOptions()) -> RayTraceResult:
    return trace_dynamical_rays(c, [t], sched, opts)[0]


def landing_points(c: complex, angles: Sequence, sched: PotentialSchedule = PotentialSchedule(),
                   opts: TraceOptions = TraceOptions(), chunk: int = 4096) -> tuple[np.ndarray, np.ndarray]:
    """Raw landing estimates (last samples) and a per-ray ok flag, for large batches."""
    opts = replace(opts, refine=False)
    pts, ok = [], []
    for s in range(0, len(angles), chunk):
        part = [as_angle(a) for a in angles[s:s + chunk]]
        samples, alive, _, _, _ = _trace_lanes("dynamical", complex(c), part, sched, opts)
        for smp, a in zip(samples, alive):
            reached = bool(smp) and smp[-1][0] <= sched.G_floor * (1 + 1e-12)
            pts.append(smp[-1][1] if smp else complex("nan"))
            ok.append(bool(a) and reached)
    return np.array(pts, dtype=complex), np.array(ok, bool)


def shadow_critical_orbit(c: complex, theta, N: int, sched: PotentialSchedule = PotentialSchedule(),
                          opts: TraceOptions = TraceOptions()) -> tuple[np.ndarray, np.ndarray]:
    """``f_c^n(0)`` for ``n = 1..N`` read off as landing points of the rays at ``tau^(n-1) theta``.

    When ``theta`` is a characteristic angle of ``f_c`` the critical value is
    the landing point of the ray at ``theta``, and the orbit follows the
    doubled angles.  This stays meaningful when ``c`` is only known to double
    precision and the forward orbit is numerically unstable.
    """
    theta = as_angle(theta)
    angles = [theta.shift(m) for m in range(N)]
    return landing_points(c, angles, sched, opts)


# ---------------------------------------------------------------------------
# landing refinement for rational angles
# ---------------------------------------------------------------------------


def _newton_1d(f, z0, tol, iters=80):
    z = complex(z0)
    for _ in range(iters):
        F, dF = f(z)
        if dF == 0 or not np.isfinite(F):
            return None
        step = F / dF
        z -= step
        if not np.isfinite(z):
            return None
        if abs(step) <= tol * max(1.0, abs(z)):
            return z
    return z if abs(f(z)[0]) < 1e-8 else None


def _misiurewicz(l: int, p: int):
    """``F_{l+p}(c) - F_l(c)`` with ``F_0 = c``."""
    def f(c):
        F, dF = c, 1.0 + 0j
        Fl = dFl = None
        for j in range(l + p + 1):
            if j == l:
                Fl, dFl = F, dF
            if j == l + p:
                break
            dF = 2 * F * dF + 1
            F = F * F + c
        return F - Fl, dF - dFl
    return f


def _root_system(k: int, omega: complex, z0: complex, c0: complex, tol: float, iters=100):
    """Solve ``f^k(z) = z`` and ``(f^k)'(z) = omega`` for ``(z, c)``."""
    z, c = complex(z0), complex(c0)
    for _ in range(iters):
        w, A, B, Az, Ac = z, 1 + 0j, 0j, 0j, 0j
        for _ in range(k):
            Az, Ac = 2 * A * A + 2 * w * Az, 2 * B * A + 2 * w * Ac
            A, B = 2 * w * A, 2 * w * B + 1
            w = w * w + c
        F1, F2 = w - z, A - omega
        J = np.array([[A - 1, B], [Az, Ac]])
        try:
            dz, dc = np.linalg.solve(J, [F1, F2])
        except np.linalg.LinAlgError:
            return None
        z, c = z - dz, c - dc
        if not (np.isfinite(z) and np.isfinite(c)):
            return None
        if abs(dz) + abs(dc) <= tol * max(1.0, abs(c)):
            return z, c
    return None


def _divisors(p):
    return [k for k in range(1, p + 1) if p % k == 0]


def refine_param_landing(theta: Fraction, c0: complex, tol: float = 1e-14):
    """Snap a raw parameter-ray endpoint to the exact landing equation of a rational angle.

    Preperiodic angles land at Misiurewicz parameters (``f^{l+p}(c) = f^l(c)``);
    periodic ones at roots of hyperbolic components, where some ``k``-cycle
    with ``k | p`` has a primitive ``(p/k)``-th root of unity as multiplier.
    The solution nearest to ``c0`` wins.
    """
    l, p = orbit_type(theta)
    if l + p > 64:
        return None
    if l > 0:
        c = _newton_1d(_misiurewicz(l, p), c0, tol)
        return (c, f"misiurewicz(l={l},p={p})") if c is not None else None
    # periodic: seed the cycle point from the dynamical ray at theta
    z_seeds = []
    try:
        r = trace_dynamical_ray(c0, theta, opts=TraceOptions(refine=False))
        z_seeds.append(r.landing_estimate)
    except Exception:  # pragma: no cover - seeding is best effort
        pass
    best = None
    for k in _divisors(p):
        q = p // k
        for j in range(q):
            if math.gcd(j, q) != 1:
                continue
            omega = complex(np.exp(TWO_PI * 1j * j / q))
            for z0 in z_seeds:
                zz = z0
                for _ in range(p):
                    sol = _root_system(k, omega, zz, c0, tol)
                    if sol is not None and (best is None or abs(sol[1] - c0) < abs(best[0] - c0)):
                        best = (sol[1], f"root(k={k},omega={j}/{q})")
                    zz = zz * zz + c0
    return best


def refine_dynamical_landing(c: complex, t: Fraction, z0: complex, tol: float = 1e-14):
    """Snap a raw dynamical-ray endpoint to the (pre)periodic point the ray lands at."""
    l, p = orbit_type(t)
    if l + p > 256:
        return None

    def f(z):
        F, dF = z, 1.0 + 0j
        Fl = dFl = None
        for j in range(l + p + 1):
            if j == l:
                Fl, dFl = F, dF
            if j == l + p:
                break
            dF = 2 * F * dF
            F = F * F + c
        return F - Fl, dF - dFl

    z = _newton_1d(f, z0, tol)
    return (z, f"preperiodic(l={l},p={p})" if l else f"periodic(p={p})") if z is not None else None
