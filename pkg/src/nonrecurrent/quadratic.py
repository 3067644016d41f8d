"""Orbits of f_c(z) = z^2 + c: escape, critical-orbit separation and cycles."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

R_ESC = 4.0


def parse_parameter(text) -> complex:
    """``"re,im"``, ``"re+imj"`` or a number."""
    if isinstance(text, (int, float, complex)):
        c = complex(text)
    else:
        s = str(text).strip().replace(" ", "")
        if "," in s:
            re_, im_ = s.split(",", 1)
            c = complex(float(re_), float(im_))
        else:
            c = complex(s.replace("i", "j"))
    if not (math.isfinite(c.real) and math.isfinite(c.imag)):
        raise ValueError(f"parameter must be finite, got {text!r}")
    return c


@dataclass(frozen=True)
class Orbit:
    samples: np.ndarray
    escaped: bool
    escape_index: Optional[int]


def iterate(c: complex, z0: complex, n: int, r_esc: float = R_ESC) -> Orbit:
    """``z0, f(z0), ..., f^n(z0)``, cut short once ``|z| > r_esc``."""
    if n < 1:
        raise ValueError("n must be >= 1")
    c, z = complex(c), complex(z0)
    out = [z]
    if abs(z) > r_esc:
        return Orbit(np.array(out), True, 0)
    for k in range(1, n + 1):
        try:
            z = z * z + c
        except OverflowError:
            return Orbit(np.array(out), True, k)
        if not (abs(z) <= r_esc):  # also catches nan/inf
            out.append(z)
            return Orbit(np.array(out), True, k)
        out.append(z)
    return Orbit(np.array(out), False, None)


@dataclass(frozen=True)
class OrbitDiagnostics:
    horizon: int
    min_critical_distance: float
    argmin: Optional[int]
    escaped: bool
    escape_index: Optional[int]
    coarse_horizon: int = 0
    coarse_min: float = float("nan")
    drift: float = float("nan")
    drift_factor: float = 2.0

    @property
    def stable(self) -> bool:
        return (not self.escaped and self.min_critical_distance > 0
                and self.drift <= self.drift_factor)

    def to_json(self) -> dict:
        return {
            "horizon": self.horizon,
            "delta_param": self.min_critical_distance,
            "argmin": self.argmin,
            "coarse_horizon": self.coarse_horizon,
            "delta_param_coarse": self.coarse_min,
            "drift": self.drift,
            "escaped": self.escaped,
            "escape_index": self.escape_index,
            "stable": self.stable,
        }


def separation_of_orbit(values: np.ndarray, horizon: int, drift_factor: float = 2.0,
                        escaped: bool = False, escape_index: Optional[int] = None) -> OrbitDiagnostics:
    """Separation diagnostics for ``values[n-1] = f^n(0)``, n = 1..len(values)."""
    a = np.abs(np.asarray(values, dtype=complex))
    if a.size == 0:
        return OrbitDiagnostics(horizon, float("nan"), None, escaped, escape_index)
    coarse = max(1, horizon // 10)
    i = int(np.argmin(a))
    m = float(a[i])
    mc = float(a[:coarse].min())
    drift = mc / m if m > 0 else math.inf
    return OrbitDiagnostics(horizon, m, i + 1, escaped, escape_index, coarse, mc, drift, drift_factor)


def critical_orbit_separation(c: complex, N: int, drift_factor: float = 2.0,
                              r_esc: float = R_ESC) -> OrbitDiagnostics:
    """``min |f^n(0)|`` over ``1 <= n <= N``, plus the same at ``N // 10`` for drift."""
    orb = iterate(c, 0, N, r_esc)
    d = separation_of_orbit(orb.samples[1:], N, drift_factor, orb.escaped, orb.escape_index)
    return d


# ---------------------------------------------------------------------------
# cycles
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class Cycle:
    period: int
    points: tuple
    multiplier: complex

    @property
    def repelling(self) -> bool:
        return abs(self.multiplier) > 1

    def to_json(self) -> dict:
        return {
            "period": self.period,
            "points": [[p.real, p.imag] for p in self.points],
            "multiplier": [self.multiplier.real, self.multiplier.imag],
            "abs_multiplier": abs(self.multiplier),
            "repelling": self.repelling,
        }


def mobius(n: int) -> int:
    out, k = 1, 2
    while k * k <= n:
        if n % k == 0:
            n //= k
            if n % k == 0:
                return 0
            out = -out
        k += 1
    return -out if n > 1 else out


def exact_period_count(p: int) -> int:
    """Number of points of exact period ``p`` for a generic quadratic polynomial."""
    return sum(mobius(p // d) * 2**d for d in range(1, p + 1) if p % d == 0)


@dataclass
class CycleSearch:
    c: complex
    p_max: int
    cycles: list = field(default_factory=list)
    found: dict = field(default_factory=dict)
    expected: dict = field(default_factory=dict)

    @property
    def complete(self) -> bool:
        return all(self.found.get(p, 0) >= self.expected[p] for p in self.expected)

    @property
    def all_repelling(self) -> bool:
        return all(cy.repelling for cy in self.cycles)

    def to_json(self) -> dict:
        return {
            "p_max": self.p_max,
            "cycles": [cy.to_json() for cy in self.cycles],
            "coverage": {str(p): [self.found.get(p, 0), self.expected[p]] for p in sorted(self.expected)},
            "complete": self.complete,
            "all_repelling_up_to_p": self.all_repelling and self.complete,
        }


def _fp(z, c, p):
    """``f^p(z)`` and its derivative, elementwise."""
    d = np.ones_like(z)
    for _ in range(p):
        d = 2 * z * d
        z = z * z + c
    return z, d


def _newton(z, c, p, iters, tol):
    with np.errstate(all="ignore"):
        for _ in range(iters):
            w, d = _fp(z, c, p)
            step = (w - z) / (d - 1)
            big = np.abs(step) > 0.5
            step[big] *= 0.5 / np.abs(step[big])
            z = z - step
            z[~np.isfinite(z)] = np.nan
            if np.nanmax(np.abs(step), initial=0.0) < tol:
                break
        w, _ = _fp(z, c, p)
        ok = np.isfinite(z) & (np.abs(w - z) <= 1e3 * tol * np.maximum(1, np.abs(z)))
    return z[ok]


def _julia_seeds(c, count, rng):
    """Points near the Julia set by random inverse iteration."""
    z = np.full(count, 0.5 + 0.5j) + 0.1 * rng.standard_normal(count)
    for _ in range(40):
        z = np.sqrt(z - c) * rng.choice([-1, 1], count)
    return z


def find_cycles(c: complex, p_max: int = 6, grid: int = 64, radius: float = 2.0,
                tol: float = 1e-10, max_iter: int = 200, seed: int = 0) -> CycleSearch:
    """All cycles of period ``<= p_max`` reachable by damped Newton from a seed grid."""
    if not 1 <= p_max <= 8:
        raise ValueError("p_max must be between 1 and 8")
    if tol <= 0:
        raise ValueError("tol must be positive")
    c = complex(c)
    xs = np.linspace(-radius, radius, grid)
    Z = (xs[None, :] + 1j * xs[:, None]).ravel()
    Z = Z[np.abs(Z) <= radius]
    rng = np.random.default_rng(seed)
    Z = np.concatenate([Z, _julia_seeds(c, Z.size // 2, rng)])
    res = CycleSearch(c, p_max)
    merge = max(1e-7, 1e3 * tol)
    for p in range(1, p_max + 1):
        res.expected[p] = exact_period_count(p) // p
        roots = _newton(Z.copy(), c, p, max_iter, tol)
        pts = []
        for z in roots:
            # drop lower periods
            w, lower = z, False
            for k in range(1, p):
                w = w * w + c
                if p % k == 0 and abs(w - z) < merge:
                    lower = True
                    break
            if not lower and all(abs(z - q) > merge for q in pts):
                pts.append(complex(z))
        seen = []
        for z in pts:
            if any(abs(z - q) < merge for cy in seen for q in cy):
                continue
            orb = [z]
            for _ in range(p - 1):
                orb.append(orb[-1] ** 2 + c)
            seen.append(orb)
        for orb in seen:
            start = min(range(p), key=lambda i: (round(orb[i].real, 9), round(orb[i].imag, 9)))
            orb = orb[start:] + orb[:start]
            mult = complex(np.prod([2 * z for z in orb]))
            res.cycles.append(Cycle(p, tuple(orb), mult))
        res.found[p] = len(seen)
    return res
