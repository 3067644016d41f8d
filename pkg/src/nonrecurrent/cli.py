"""Command line front end.

    nonrecurrent angle info rat:1/3
    nonrecurrent kneading rule:triangular --depth 32
    nonrecurrent lamination rule:triangular --depth 64 --svg classes.svg
    nonrecurrent trace param-ray rat:0 --floor 1e-6 --json
    nonrecurrent trace dyn-ray rat:1/3 --c 0,0
    nonrecurrent verify forward --angle rule:triangular
    nonrecurrent verify converse --c -2,0 --candidates rat:1/2
    nonrecurrent verify batch --config batch.json
    nonrecurrent render plane --out m.ppm --ray rat:1/3
    nonrecurrent render chords rule:triangular --out chords.svg

Every command prints plain text, or JSON with ``--json``.  ``--config`` reads
a JSON object whose keys are harness settings (see ``harness.Config``);
command-line flags win over it.  Exit codes: 0 ok / all pass, 1 some verdict
failed, 2 some verdict inconclusive, 64 usage error, 70 computation error
(details as JSON on stderr).
"""

from __future__ import annotations

import argparse
import json
import sys
from dataclasses import replace

from . import harness
from .circle import AngleSpecError, UndecidedError, orbit_type, parse_angle
from .harness import Config, dumps
from .lamination import characteristic_class, critical_class, image_class
from .quadratic import parse_parameter
from .rays import trace_dynamical_ray, trace_param_ray
from .render import ChordDiagram, Overlay, RenderSpec, OVERLAY_COLORS, render_chords, render_plane, save_image
from .symbolic import kneading

EX_USAGE = 64
EX_SOFTWARE = 70


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        sys.stderr.write(f"{self.prog}: error: {message}\n")
        raise SystemExit(EX_USAGE)


def _common(p):
    p.add_argument("--json", action="store_true", help="machine-readable output")
    p.add_argument("--seed", type=int, default=None, help="seed for every random choice")
    p.add_argument("--config", default=None, help="JSON file of harness settings")


def _trace_flags(p):
    p.add_argument("--floor", type=float, default=None, help="stop potential G_floor")
    p.add_argument("--start", type=float, default=None, help="start potential G_start")
    p.add_argument("--k", type=int, default=None, help="steps per halving of the potential")
    p.add_argument("--csv", default=None, help="write the samples to this CSV file")
    p.add_argument("--samples", action="store_true", help="include samples in the JSON output")


def build_parser() -> argparse.ArgumentParser:
    top = _Parser(prog="nonrecurrent", description="Non-recurrent angles, laminations and rays.")
    sub = top.add_subparsers(dest="cmd", parser_class=_Parser)
    sub.required = True

    angle = sub.add_parser("angle", help="angle utilities")
    asub = angle.add_subparsers(dest="sub", parser_class=_Parser)
    asub.required = True
    info = asub.add_parser("info", help="value, binary expansion and orbit type")
    info.add_argument("angle")
    info.add_argument("--bits", type=int, default=32)
    _common(info)

    kn = sub.add_parser("kneading", help="kneading sequence prefix and period refutation")
    kn.add_argument("angle")
    kn.add_argument("--depth", type=int, default=64)
    kn.add_argument("--pmax", type=int, default=None)
    _common(kn)

    lam = sub.add_parser("lamination", help="characteristic, critical and image classes")
    lam.add_argument("angle")
    lam.add_argument("--depth", type=int, default=64)
    lam.add_argument("--images", type=int, default=0, help="also compute tau^k(A) for k = 1..N")
    lam.add_argument("--svg", default=None, help="write a chord diagram")
    _common(lam)

    tr = sub.add_parser("trace", help="ray tracing")
    tsub = tr.add_subparsers(dest="sub", parser_class=_Parser)
    tsub.required = True
    pr = tsub.add_parser("param-ray", help="parameter ray of the Mandelbrot set")
    pr.add_argument("angle")
    _trace_flags(pr)
    _common(pr)
    dr = tsub.add_parser("dyn-ray", help="external ray of f_c")
    dr.add_argument("angle")
    dr.add_argument("--c", required=True, help="parameter as re,im")
    _trace_flags(dr)
    _common(dr)

    ver = sub.add_parser("verify", help="theorem checks")
    vsub = ver.add_subparsers(dest="sub", parser_class=_Parser)
    vsub.required = True
    vf = vsub.add_parser("forward", help="angle to parameter")
    vf.add_argument("--angle", required=True)
    vf.add_argument("--converse", action="store_true", help="chain a converse run on the landing point")
    _common(vf)
    vc = vsub.add_parser("converse", help="parameter to characteristic angles")
    vc.add_argument("--c", required=True)
    vc.add_argument("--candidates", nargs="+", required=True)
    vc.add_argument("--controls", type=int, default=None, help="number of seeded control angles")
    _common(vc)
    vb = vsub.add_parser("batch", help="forward runs over a family of angles")
    vb.add_argument("--batch", dest="batch_file", default=None,
                    help="batch file (defaults to --config)")
    vb.add_argument("--out", default=None)
    _common(vb)

    rd = sub.add_parser("render", help="figures")
    rsub = rd.add_subparsers(dest="sub", parser_class=_Parser)
    rsub.required = True
    rp = rsub.add_parser("plane", help="escape-time picture with rays")
    rp.add_argument("--c", default=None, help="draw the dynamical plane of this parameter")
    rp.add_argument("--center", default=None)
    rp.add_argument("--width", type=float, default=None)
    rp.add_argument("--size", default="600x400")
    rp.add_argument("--max-iter", type=int, default=500)
    rp.add_argument("--ray", action="append", default=[], help="angle of a ray to overlay")
    rp.add_argument("--out", required=True, help=".ppm, or .png with Pillow")
    _common(rp)
    rc = rsub.add_parser("chords", help="chord diagram of the classes of an angle")
    rc.add_argument("angle")
    rc.add_argument("--depth", type=int, default=64)
    rc.add_argument("--images", type=int, default=3)
    rc.add_argument("--out", required=True)
    _common(rc)
    return top


# ---------------------------------------------------------------------------


def _read_json(path) -> dict:
    try:
        data = harness.load_config(path)
    except OSError as e:
        raise UsageError(f"cannot read {path}: {e.strerror}") from e
    except json.JSONDecodeError as e:
        raise UsageError(f"{path} is not valid JSON: {e}") from e
    if not isinstance(data, dict):
        raise UsageError(f"{path} must hold a JSON object")
    return data


def _config(args) -> Config:
    data = {}
    if getattr(args, "config", None) and not (args.cmd == "verify" and args.sub == "batch"):
        data = _read_json(args.config)
        data.pop("angles", None)
        data.pop("converse", None)
        data.update(data.pop("config", {}))
    try:
        cfg = Config.from_mapping(data)
    except (TypeError, ValueError) as e:
        raise UsageError(str(e)) from e
    if getattr(args, "seed", None) is not None:
        cfg = replace(cfg, seed=args.seed)
    return cfg


def _sched(args, cfg: Config):
    s = cfg.schedule
    kw = {}
    if getattr(args, "floor", None) is not None:
        kw["G_floor"] = args.floor
    if getattr(args, "start", None) is not None:
        kw["G_start"] = args.start
    if getattr(args, "k", None) is not None:
        kw["k"] = args.k
    return replace(s, **kw) if kw else s


def _angle(text):
    try:
        return parse_angle(text)
    except AngleSpecError as e:
        raise UsageError(str(e)) from e


def _param(text):
    try:
        return parse_parameter(text)
    except ValueError as e:
        raise UsageError(str(e)) from e


def _emit(args, data: dict, text: str):
    if args.json:
        sys.stdout.write(dumps(data))
    else:
        sys.stdout.write(text.rstrip("\n") + "\n")


def cmd_angle_info(args, cfg):
    th = _angle(args.angle)
    v = th.exact()
    data = {"angle": th.spec, "bits": th.bits(args.bits)}
    if v is not None:
        pre, per = orbit_type(v)
        if v == 0:
            pre, per = 0, 1
        data.update(value=f"{v.numerator}/{v.denominator}", approx=float(v), preperiod=pre, period=per)
    else:
        data.update(value=None, approx=float(th), preperiod=None, period=None)
    lines = [f"angle     {th.spec}"]
    if v is not None:
        lines.append(f"value     {data['value']}  (~{float(v):.17g})")
        kind = "periodic" if data["preperiod"] == 0 else "preperiodic"
        lines.append(f"orbit     {kind}, preperiod {data['preperiod']}, period {data['period']}")
    else:
        lines.append(f"value     ~{data['approx']:.17g} (streamed)")
    lines.append(f"binary    0.{data['bits']}...")
    _emit(args, data, "\n".join(lines))
    return 0


def cmd_kneading(args, cfg):
    th = _angle(args.angle)
    if th.exact() == 0:
        raise UsageError("the kneading sequence of 0 is undefined")
    pmax = args.pmax if args.pmax is not None else args.depth // 2
    kp = kneading(th, args.depth, p_max=pmax)
    ref = kp.refuted
    data = {
        "angle": th.spec,
        "depth": args.depth,
        "kneading": kp.symbols,
        "minus": kp.minus,
        "plus_minus_disagreement": kp.disagreement,
        "p_max": pmax,
        "all_periods_refuted": bool(ref and ref.all_refuted),
        "smallest_unrefuted_period": ref.smallest_unrefuted if ref else None,
    }
    text = [kp.symbols]
    if kp.disagreement is not None:
        text.append(f"+/- itineraries differ at index {kp.disagreement}: theta is periodic")
    if ref:
        text.append("all periods <= %d refuted" % pmax if ref.all_refuted
                    else f"smallest unrefuted period: {ref.smallest_unrefuted}")
    _emit(args, data, "\n".join(text))
    return 0


def _classes(th, depth, images):
    A = characteristic_class(th, depth)
    out = [A]
    if A.converged:
        out.append(critical_class(A))
    for k in range(1, images + 1):
        out.append(image_class(th, k, depth))
    return out


def cmd_lamination(args, cfg):
    th = _angle(args.angle)
    classes = _classes(th, args.depth, args.images)
    data = {"angle": th.spec, "classes": [c.to_json() for c in classes]}
    lines = []
    for c in classes:
        lines.append(f"{c.role} (depth {c.depth}, {len(c)} cluster(s), converged={c.converged})")
        for cl in c.clusters:
            ex = f" = {cl.exact}" if cl.exact is not None else ""
            lines.append(f"  [{float(cl.span.start):.17g}, +{float(cl.span.length):.3g}]{ex}")
    if args.svg:
        d = ChordDiagram(title=f"classes of {th.spec}")
        for c in classes:
            d.add(c)
        with open(args.svg, "w") as fh:
            fh.write(render_chords(d))
        data["svg"] = args.svg
    _emit(args, data, "\n".join(lines))
    return 0


def _trace_out(args, r):
    if args.csv:
        with open(args.csv, "w") as fh:
            fh.write(r.to_csv())
    data = r.to_json(with_samples=args.samples)
    z = r.landing_estimate
    text = (f"{r.kind} ray {r.angle}\n"
            f"landing   {z.real:.15g} {z.imag:+.15g}i\n"
            f"raw       {r.raw_landing.real:.15g} {r.raw_landing.imag:+.15g}i"
            f"{'  (refined: ' + r.refinement + ')' if r.refinement else ''}\n"
            f"tail      {r.tail_diameter:.3g} at G = {r.final_potential:.3g}, "
            f"converged={r.converged}, truncated={r.truncated}")
    _emit(args, data, text)
    return 0


def cmd_trace(args, cfg):
    th = _angle(args.angle)
    sched = _sched(args, cfg)
    if args.sub == "param-ray":
        return _trace_out(args, trace_param_ray(th, sched, cfg.options))
    return _trace_out(args, trace_dynamical_ray(_param(args.c), th, sched, cfg.options))


def _report_text(rep: dict) -> str:
    lines = [f"{rep.get('direction', 'forward')} {rep.get('angle_spec') or rep.get('parameter')}: "
             f"{rep['verdict'].upper()}"]
    for r in rep.get("reasons", []):
        lines.append(f"  - {r}")
    return "\n".join(lines)


def cmd_verify(args, cfg):
    if args.sub == "forward":
        _angle(args.angle)
        rep = harness.verify_forward(args.angle, cfg)
        docs = [rep.to_json()]
        if args.converse:
            conv = harness.converse_from_forward(rep, cfg)
            if conv is not None:
                docs.append(conv.to_json())
        data = {"schema_version": harness.SCHEMA_VERSION, "preamble": harness.PREAMBLE, "reports": docs}
        _emit(args, data, "\n".join(_report_text(d) for d in docs))
        return harness.exit_code([d["verdict"] for d in docs])
    if args.sub == "converse":
        c = _param(args.c)
        for s in args.candidates:
            _angle(s)
        n = args.controls if args.controls is not None else cfg.controls
        ctrl = harness.control_angles(n, cfg.seed, cfg.control_max_denominator)
        rep = harness.verify_converse(c, args.candidates, cfg, controls=ctrl).to_json()
        data = {"schema_version": harness.SCHEMA_VERSION, "preamble": harness.PREAMBLE, "reports": [rep]}
        _emit(args, data, _report_text(rep))
        return harness.exit_code([rep["verdict"]])
    path = args.batch_file or args.config
    if not path:
        raise UsageError("verify batch needs --config (or --batch) naming a JSON batch file")
    conf = _read_json(path)
    if args.seed is not None:
        conf["seed"] = args.seed
    try:
        Config.from_mapping({**conf.get("config", {}),
                             **{k: v for k, v in conf.items() if k not in ("angles", "converse", "config")}})
    except (TypeError, ValueError) as e:
        raise UsageError(str(e)) from e
    doc = harness.batch_document(conf)
    verdicts = []
    for item in doc["reports"]:
        verdicts.append(item["forward"]["verdict"])
        if item.get("converse"):
            verdicts.append(item["converse"]["verdict"])
    if args.out:
        with open(args.out, "w") as fh:
            fh.write(dumps(doc))
    if args.json:
        sys.stdout.write(dumps(doc))
    else:
        for item in doc["reports"]:
            print(_report_text(item["forward"]))
            if item.get("converse"):
                print(_report_text(item["converse"]))
    return harness.exit_code(verdicts)


def _size(text):
    try:
        w, h = (int(x) for x in text.lower().split("x"))
    except ValueError as e:
        raise UsageError(f"size must look like 600x400, got {text!r}") from e
    return w, h


def cmd_render(args, cfg):
    if args.sub == "chords":
        th = _angle(args.angle)
        classes = _classes(th, args.depth, args.images)
        d = ChordDiagram(title=f"classes of {th.spec}")
        for c in classes:
            d.add(c)
        svg = render_chords(d)
        with open(args.out, "w") as fh:
            fh.write(svg)
        _emit(args, {"out": args.out, "classes": len(classes)}, f"wrote {args.out}")
        return 0
    c = _param(args.c) if args.c else None
    plane = "dynamical" if c is not None else "parameter"
    center = _param(args.center) if args.center else (0j if c is not None else complex(-0.5, 0))
    width = args.width or (4.0 if c is not None else 3.0)
    overlays = []
    sched = cfg.schedule
    for i, spec in enumerate(args.ray):
        th = _angle(spec)
        r = trace_param_ray(th, sched, cfg.options) if c is None else trace_dynamical_ray(c, th, sched, cfg.options)
        color = OVERLAY_COLORS[i % len(OVERLAY_COLORS)]
        overlays.append(Overlay(tuple(r.positions), color))
        overlays.append(Overlay((r.landing_estimate,), color, "points"))
    spec = RenderSpec(plane, c, center, width, _size(args.size), args.max_iter, tuple(overlays))
    img = render_plane(spec)
    save_image(img, args.out)
    _emit(args, {"out": args.out, "pixels": list(spec.pixels), "plane": plane}, f"wrote {args.out}")
    return 0


COMMANDS = {"angle": cmd_angle_info, "kneading": cmd_kneading, "lamination": cmd_lamination,
            "trace": cmd_trace, "verify": cmd_verify, "render": cmd_render}


_VALUE_FLAGS = ("--c", "--center")


def _glue_negative(argv):
    """Let ``--c -2,0`` through: argparse would read ``-2,0`` as a flag."""
    out, it = [], iter(argv)
    for tok in it:
        if tok in _VALUE_FLAGS:
            nxt = next(it, None)
            if nxt is not None and nxt.startswith("-"):
                out.append(f"{tok}={nxt}")
                continue
            out.append(tok)
            if nxt is not None:
                out.append(nxt)
        else:
            out.append(tok)
    return out


def main(argv=None) -> int:
    parser = build_parser()
    argv = _glue_negative(sys.argv[1:] if argv is None else list(argv))
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return int(e.code) if isinstance(e.code, int) else EX_USAGE
    try:
        cfg = _config(args)
        return COMMANDS[args.cmd](args, cfg)
    except UsageError as e:
        parser.print_usage(sys.stderr)
        sys.stderr.write(f"nonrecurrent: error: {e}\n")
        return EX_USAGE
    except (OSError, ValueError, UndecidedError, ArithmeticError, RuntimeError) as e:
        sys.stderr.write(json.dumps({"error": str(e), "type": type(e).__name__}) + "\n")
        return EX_SOFTWARE


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
