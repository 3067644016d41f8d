"""End-to-end checks of the landing theorem for non-recurrent angles.

``verify_forward`` starts from an angle and asks whether its parameter ray
lands at a non-recurrent parameter having the angle as a characteristic
angle.  ``verify_converse`` starts from a parameter and a list of candidate
angles.  Both collect every piece of evidence they can and only then reduce it
to a verdict: ``pass`` needs every check to pass, a failed check gives
``fail``, and anything unconverged or undecided gives ``inconclusive``.
"""

from __future__ import annotations

import json
import math
import random
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field, fields
from fractions import Fraction
from typing import Any, Optional, Sequence

import numpy as np

from .circle import Angle, RationalAngle, UndecidedError, as_angle, orbit_type, parse_angle
from .lamination import (
    ConvergenceError,
    PreconditionError,
    characteristic_class,
    class_orbit_separation,
    critical_class,
    shortest_arc_check,
)
from .quadratic import critical_orbit_separation, find_cycles, separation_of_orbit
from .rays import (
    PotentialSchedule,
    TraceOptions,
    shadow_critical_orbit,
    trace_dynamical_ray,
    trace_dynamical_rays,
    trace_param_ray,
)
from .symbolic import angle_nonrecurrence, kneading

SCHEMA_VERSION = "1.0"
PASS, FAIL, INCONCLUSIVE = "pass", "fail", "inconclusive"

PREAMBLE = (
    "Finite-depth evidence, not a proof: every check runs to a stated horizon, "
    "depth or tolerance. The converse direction is only tested at parameters "
    "supplied by the caller or reached by a forward run."
)


@dataclass(frozen=True)
class Config:
    angle_horizon: int = 2000
    kneading_depth: int = 4096
    period_max: int = 1024
    class_depth: int = 64
    class_horizon: int = 512
    orbit_horizon: int = 10_000
    drift_factor: float = 2.0
    cycle_p_max: int = 6
    cycle_grid: int = 64
    char_tol: float = 1e-4
    param_tol: float = 1e-4
    G_start: float = math.log(100)
    subdivisions: int = 8
    G_floor: float = 2.0**-22 * math.log(2)
    newton_tol: float = 1e-12
    landing_tol: float = 1e-6
    controls: int = 8
    control_max_denominator: int = 2**16
    seed: int = 0
    workers: int = 1

    @classmethod
    def from_mapping(cls, data: dict) -> "Config":
        known = {f.name for f in fields(cls)}
        unknown = set(data) - known
        if unknown:
            raise ValueError(f"unknown config keys: {sorted(unknown)}")
        return cls(**data)

    @property
    def schedule(self) -> PotentialSchedule:
        return PotentialSchedule(self.G_start, self.subdivisions, self.G_floor)

    @property
    def options(self) -> TraceOptions:
        return TraceOptions(newton_tol=self.newton_tol, landing_tol=self.landing_tol)


# ---------------------------------------------------------------------------
# small helpers
# ---------------------------------------------------------------------------


def _frac(x: Optional[Fraction]):
    if x is None:
        return None
    return {"exact": f"{x.numerator}/{x.denominator}", "approx": float(x)}


def _cx(z) -> Optional[list]:
    if z is None:
        return None
    z = complex(z)
    return [z.real, z.imag]


def _check(status: str, reason: str = "", **data) -> dict:
    d = {"status": status}
    if reason:
        d["reason"] = reason
    d.update(data)
    return d


def combine(checks: dict) -> tuple[str, list[str]]:
    """Fail dominates inconclusive, which dominates pass."""
    reasons = []
    verdict = PASS
    for name, chk in checks.items():
        st = chk["status"]
        if st == FAIL:
            verdict = FAIL
            reasons.append(f"{name}: {chk.get('reason', 'failed')}")
        elif st == INCONCLUSIVE:
            if verdict == PASS:
                verdict = INCONCLUSIVE
            reasons.append(f"{name}: {chk.get('reason', 'inconclusive')}")
    return verdict, reasons


@dataclass
class TheoremReport:
    direction: str
    angle_spec: Optional[str] = None
    parameter: Optional[list] = None
    angle_certificate: dict = field(default_factory=dict)
    class_summary: dict = field(default_factory=dict)
    param_landing: dict = field(default_factory=dict)
    dynamical_landing: dict = field(default_factory=dict)
    param_certificate: dict = field(default_factory=dict)
    cycles: dict = field(default_factory=dict)
    candidates: list = field(default_factory=list)
    verdict: str = INCONCLUSIVE
    reasons: list = field(default_factory=list)

    def to_json(self) -> dict:
        d = asdict(self)
        d["schema_version"] = SCHEMA_VERSION
        return d

    def dumps(self) -> str:
        return dumps(self.to_json())


def _clean(x):
    if isinstance(x, float):
        return x if math.isfinite(x) else None
    if isinstance(x, (np.floating,)):
        return _clean(float(x))
    if isinstance(x, (np.integer,)):
        return int(x)
    if isinstance(x, (np.bool_,)):
        return bool(x)
    if isinstance(x, dict):
        return {str(k): _clean(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_clean(v) for v in x]
    return x


def dumps(obj) -> str:
    return json.dumps(_clean(obj), sort_keys=True, indent=2) + "\n"


# ---------------------------------------------------------------------------
# stages
# ---------------------------------------------------------------------------


def _angle_stage(theta: Angle, cfg: Config) -> dict:
    cert = angle_nonrecurrence(theta, cfg.angle_horizon)
    out = {
        "horizon": cfg.angle_horizon,
        "delta_angle": _frac(cert.delta_hat),
        "argmin": cert.argmin,
        "periodic_collision": list(cert.periodic_collision) if cert.periodic_collision else None,
        "undecided": cert.undecided,
    }
    if theta.exact() == 0:
        out["check"] = _check(FAIL, "0 is a fixed point")
        return out
    depth = cfg.kneading_depth
    nu = kneading(theta, depth, p_max=min(cfg.period_max, depth // 2))
    out["kneading"] = {
        "depth": depth,
        "prefix": nu.symbols[:64],
        "plus_minus_disagreement": nu.disagreement,
        "p_max": nu.refuted.p_max if nu.refuted else 0,
        "all_periods_refuted": bool(nu.refuted and nu.refuted.all_refuted),
        "smallest_unrefuted_period": nu.refuted.smallest_unrefuted if nu.refuted else None,
    }
    if cert.periodic_collision is not None:
        m, n = cert.periodic_collision
        out["check"] = _check(FAIL, f"orbit is eventually periodic (tau^{m} = tau^{n})")
    elif nu.periodic:
        out["check"] = _check(FAIL, "theta is periodic (itineraries disagree)")
    elif cert.undecided:
        out["check"] = _check(INCONCLUSIVE, "orbit points not separated at working precision")
    elif cert.delta_hat <= 0:
        out["check"] = _check(INCONCLUSIVE, "no positive separation bound")
    elif not out["kneading"]["all_periods_refuted"]:
        out["check"] = _check(FAIL, f"kneading prefix admits period {nu.refuted.smallest_unrefuted}")
    else:
        out["check"] = _check(PASS)
    return out


def _class_stage(theta: Angle, cfg: Config) -> tuple[dict, Optional[Any]]:
    out: dict = {"depth": cfg.class_depth}
    try:
        A = characteristic_class(theta, cfg.class_depth)
    except PreconditionError as e:
        out["check"] = _check(FAIL, str(e))
        return out, None
    half = characteristic_class(theta, cfg.class_depth // 2)
    out["A"] = A.to_json()
    out["A_count"] = len(A)
    out["A_count_half_depth"] = len(half)
    out["converged"] = A.converged
    checks = {}
    if not A.converged:
        checks["convergence"] = _check(INCONCLUSIVE if len(A) <= 2 else FAIL,
                                       f"{len(A)} clusters, not persistent from depth {cfg.class_depth // 2}")
    elif len(half) != len(A):
        checks["convergence"] = _check(INCONCLUSIVE, "cluster count changed between half and full depth")
    else:
        checks["convergence"] = _check(PASS)
    if A.converged:
        C = critical_class(A)
        out["C_count"] = len(C)
        try:
            sep = class_orbit_separation(theta, cfg.class_depth, cfg.class_horizon)
            out["delta_class"] = _frac(sep.delta_class)
            out["delta_class_argmin"] = sep.argmin
            out["wandering_ok"] = sep.wandering_ok
            if not sep.wandering_ok:
                checks["wandering"] = _check(FAIL, "forward images of the class meet")
            elif sep.delta_class <= 0:
                checks["wandering"] = _check(INCONCLUSIVE, "class separation not certified")
            else:
                checks["wandering"] = _check(PASS)
        except (UndecidedError, ConvergenceError) as e:
            checks["wandering"] = _check(INCONCLUSIVE, str(e))
        try:
            sa = shortest_arc_check(theta, cfg.class_horizon, cfg.class_depth)
            out["shortest_arc_ok"] = sa.ok
            out["shortest_arc_vacuous"] = sa.vacuous
            checks["shortest_arc"] = _check({True: PASS, False: FAIL, None: INCONCLUSIVE}[sa.ok],
                                            "" if sa.ok else "S1+ is not the shortest arc")
        except (UndecidedError, ConvergenceError) as e:
            checks["shortest_arc"] = _check(INCONCLUSIVE, str(e))
    status, reasons = combine(checks)
    out["checks"] = checks
    out["check"] = _check(status, "; ".join(reasons))
    return out, A


def _orbit_stage(c: complex, theta: Optional[Angle], cfg: Config) -> dict:
    """Critical-orbit separation; falls back to ray landings when the forward orbit blows up."""
    N = cfg.orbit_horizon
    fwd = critical_orbit_separation(c, N, cfg.drift_factor)
    out = {"forward": fwd.to_json()}
    if not fwd.escaped:
        out["method"] = "forward-iteration"
        diag = fwd
    elif abs(c) > 2:
        out["method"] = "forward-iteration"
        out["check"] = _check(FAIL, "|c| > 2, the critical orbit escapes")
        return out
    elif theta is None:
        out["method"] = "forward-iteration"
        out["check"] = _check(INCONCLUSIVE, f"forward orbit left the escape disk at step {fwd.escape_index} "
                                            "and no characteristic angle is known")
        return out
    else:
        # the forward orbit of a double-precision c is unstable; read f^n(0) off
        # the landing points of the rays at tau^(n-1) theta instead
        pts, ok = shadow_critical_orbit(c, theta, N, cfg.schedule, cfg.options)
        diag = separation_of_orbit(pts, N, cfg.drift_factor)
        out["method"] = "ray-landing"
        out["shadow"] = diag.to_json()
        out["shadow"]["failed_rays"] = int((~ok).sum())
        if not ok.all():
            out["check"] = _check(INCONCLUSIVE, f"{int((~ok).sum())} orbit rays did not reach the floor")
            return out
    out["delta_param"] = diag.min_critical_distance
    out["drift"] = diag.drift
    if diag.min_critical_distance <= 0:
        out["check"] = _check(FAIL, "critical orbit returns to 0")
    elif diag.drift > cfg.drift_factor:
        out["check"] = _check(FAIL, f"separation drifts by {diag.drift:.3g} between horizons")
    else:
        out["check"] = _check(PASS)
    return out


def _cycle_stage(c: complex, cfg: Config) -> dict:
    res = find_cycles(c, cfg.cycle_p_max, grid=cfg.cycle_grid, seed=cfg.seed)
    out = res.to_json()
    bad = [cy for cy in res.cycles if not cy.repelling]
    if bad:
        worst = min(bad, key=lambda cy: abs(cy.multiplier))
        out["check"] = _check(FAIL, f"non-repelling cycle of period {worst.period} "
                                    f"(|multiplier| = {abs(worst.multiplier):.6g})")
    elif not res.complete:
        out["check"] = _check(INCONCLUSIVE, "cycle search did not find every expected cycle")
    else:
        out["check"] = _check(PASS)
    return out


def _param_stage(theta: Angle, cfg: Config):
    r = trace_param_ray(theta, cfg.schedule, cfg.options)
    out = r.to_json()
    if r.truncated:
        out["check"] = _check(INCONCLUSIVE, "parameter ray trace truncated")
    elif not r.converged:
        out["check"] = _check(INCONCLUSIVE, f"tail diameter {r.tail_diameter:.3g} above tolerance")
    else:
        out["check"] = _check(PASS)
    return out, r


def _dyn_stage(c: complex, theta: Angle, cfg: Config) -> dict:
    r = trace_dynamical_ray(c, theta, cfg.schedule, cfg.options)
    out = r.to_json()
    d = abs(r.landing_estimate - c)
    out["distance_to_c"] = d
    out["char_tol"] = cfg.char_tol
    if r.truncated:
        out["check"] = _check(INCONCLUSIVE, "dynamical ray trace truncated")
    elif d < cfg.char_tol:
        out["check"] = _check(PASS)
    elif not r.converged:
        out["check"] = _check(INCONCLUSIVE, f"ray did not settle; lands {d:.3g} from c")
    else:
        out["check"] = _check(FAIL, f"ray lands {d:.3g} from the critical value")
    return out


# ---------------------------------------------------------------------------
# pipelines
# ---------------------------------------------------------------------------


def verify_forward(spec, cfg: Config = Config()) -> TheoremReport:
    """Angle to parameter: screening, combinatorics, rays, orbit and cycles."""
    theta = parse_angle(spec) if isinstance(spec, str) else as_angle(spec)
    rep = TheoremReport("forward", angle_spec=theta.spec)
    checks = {}

    rep.angle_certificate = _angle_stage(theta, cfg)
    checks["hypothesis"] = rep.angle_certificate["check"]
    if theta.exact() == 0:
        rep.verdict, rep.reasons = combine(checks)
        return rep

    rep.class_summary, _ = _class_stage(theta, cfg)
    checks["lamination"] = rep.class_summary["check"]

    rep.param_landing, pr = _param_stage(theta, cfg)
    checks["parameter_ray"] = rep.param_landing["check"]
    c = pr.landing_estimate
    rep.parameter = _cx(c)
    if not np.isfinite(c):
        checks["landing"] = _check(INCONCLUSIVE, "no landing estimate")
        rep.verdict, rep.reasons = combine(checks)
        return rep

    rep.dynamical_landing = _dyn_stage(c, theta, cfg)
    checks["characteristic"] = rep.dynamical_landing["check"]
    char = rep.dynamical_landing["check"]["status"] == PASS
    rep.param_certificate = _orbit_stage(c, theta if char else None, cfg)
    checks["non_recurrent_parameter"] = rep.param_certificate["check"]
    rep.cycles = _cycle_stage(c, cfg)
    checks["repelling_cycles"] = rep.cycles["check"]
    rep.verdict, rep.reasons = combine(checks)
    return rep


def control_angles(n: int, seed: int, max_den: int = 2**16) -> list[RationalAngle]:
    """``n`` seeded random rationals with denominator at most ``max_den``."""
    rng = random.Random(seed)
    out = []
    while len(out) < n:
        q = rng.randint(3, max_den)
        p = rng.randrange(1, q)
        x = Fraction(p, q)
        if x.denominator > 2:
            out.append(RationalAngle(x))
    return out


def _candidate_angle(item) -> Angle:
    return parse_angle(item) if isinstance(item, str) else as_angle(item)


def verify_converse(c, candidates: Sequence, cfg: Config = Config(), *,
                    controls: Sequence = ()) -> TheoremReport:
    """Parameter to angles: which candidates are characteristic, and do their parameter rays land at ``c``?"""
    c = complex(c)
    rep = TheoremReport("converse", parameter=_cx(c))
    checks = {}
    cand = [(_candidate_angle(a), "candidate") for a in candidates]
    cand += [(_candidate_angle(a), "control") for a in controls]
    rays = trace_dynamical_rays(c, [a for a, _ in cand], cfg.schedule, cfg.options)
    char_angles = []
    for (a, role), r in zip(cand, rays):
        d = abs(r.landing_estimate - c)
        item = {
            "angle": a.spec,
            "role": role,
            "dynamical_landing": _cx(r.landing_estimate),
            "distance_to_c": d,
            "characteristic": bool(d < cfg.char_tol and not r.truncated),
            "trace_converged": r.converged,
        }
        v = a.exact()
        if v is not None:
            pre, _ = orbit_type(v)
            if pre == 0 or v == 0:
                item["flag"] = "angle is periodic, so it is not a non-recurrent angle"
            else:
                item["flag"] = "angle is rational, so it is not a non-recurrent angle"
        if item["characteristic"]:
            char_angles.append((a, item))
        rep.candidates.append(item)

    # screening of c itself
    theta0 = char_angles[0][0] if char_angles else None
    rep.param_certificate = _orbit_stage(c, theta0, cfg)
    rep.cycles = _cycle_stage(c, cfg)
    checks["non_recurrent_parameter"] = rep.param_certificate["check"]
    checks["repelling_cycles"] = rep.cycles["check"]

    n_char = len(char_angles)
    if n_char == 0:
        checks["characteristic"] = _check(INCONCLUSIVE, "no candidate lands at c; candidate list insufficient")
    elif n_char > 2:
        checks["characteristic"] = _check(FAIL, f"{n_char} characteristic angles")
    else:
        checks["characteristic"] = _check(PASS, count=n_char)
    bad_controls = [it["angle"] for _, it in char_angles if it["role"] == "control"]
    if bad_controls:
        checks["controls"] = _check(FAIL, f"control angles landed at c: {bad_controls}")

    for a, item in char_angles:
        pr = trace_param_ray(a, cfg.schedule, cfg.options)
        d = abs(pr.landing_estimate - c)
        item["param_landing"] = _cx(pr.landing_estimate)
        item["param_distance"] = d
        item["param_ok"] = bool(d < cfg.param_tol)
        key = f"parameter_ray[{a.spec}]"
        if d < cfg.param_tol:
            checks[key] = _check(PASS)
        elif pr.converged:
            checks[key] = _check(FAIL, f"parameter ray lands {d:.3g} from c")
        else:
            checks[key] = _check(INCONCLUSIVE, f"parameter ray unconverged, {d:.3g} from c")
    rep.verdict, rep.reasons = combine(checks)
    return rep


def converse_from_forward(fwd: TheoremReport, cfg: Config = Config()) -> Optional[TheoremReport]:
    """Chain a converse run on the landing point and class of a forward run."""
    if fwd.parameter is None:
        return None
    c = complex(*fwd.parameter)
    cands = [fwd.angle_spec]
    A = fwd.class_summary.get("A")
    if A:
        for cl in A["clusters"]:
            ex = cl.get("exact")
            if ex is not None:
                spec = f"rat:{ex}"
                if spec != fwd.angle_spec and parse_angle(spec) != parse_angle(fwd.angle_spec):
                    cands.append(spec)
            elif not _contains_angle(cl, fwd.angle_spec):
                cands.append(f"bits:{cl['prefix'] or '0'}1")
    ctrl = control_angles(cfg.controls, cfg.seed, cfg.control_max_denominator)
    return verify_converse(c, cands, cfg, controls=ctrl)


def _contains_angle(cluster: dict, spec: str) -> bool:
    lo, hi = (float(x) for x in cluster["enclosure"])
    t = float(parse_angle(spec))
    return lo - 1e-15 <= t <= hi + 1e-15


# ---------------------------------------------------------------------------
# batch
# ---------------------------------------------------------------------------


def load_config(path) -> dict:
    with open(path) as fh:
        return json.load(fh)


def batch(conf: dict) -> list[dict]:
    """Forward runs over ``conf["angles"]``, optionally chained with converse runs.

    Recognized keys: ``angles`` (list of angle specs), ``converse`` (bool) and
    any :class:`Config` field, either at top level or under ``"config"``.
    """
    conf = dict(conf)
    angles = conf.pop("angles", [])
    converse = bool(conf.pop("converse", False))
    settings = dict(conf.pop("config", {}))
    settings.update(conf)
    cfg = Config.from_mapping(settings)

    def one(spec):
        try:
            fwd = verify_forward(spec, cfg)
            item = {"forward": fwd.to_json()}
            if converse:
                conv = converse_from_forward(fwd, cfg)
                item["converse"] = conv.to_json() if conv else None
            return item
        except Exception as e:  # one bad item must not sink the batch
            return {"forward": {"angle_spec": spec, "verdict": FAIL,
                                "reasons": [f"error: {type(e).__name__}: {e}"],
                                "schema_version": SCHEMA_VERSION}}

    if cfg.workers > 1:
        with ThreadPoolExecutor(cfg.workers) as ex:
            return list(ex.map(one, angles))
    return [one(s) for s in angles]


def batch_document(conf: dict) -> dict:
    items = batch(conf)
    return {"schema_version": SCHEMA_VERSION, "preamble": PREAMBLE, "reports": items}


def exit_code(verdicts: Sequence[str]) -> int:
    if any(v == FAIL for v in verdicts):
        return 1
    if any(v == INCONCLUSIVE for v in verdicts):
        return 2
    return 0
