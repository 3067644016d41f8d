"""Escape-time pictures with ray overlays, and chord diagrams of classes."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Optional, Sequence, Union

import numpy as np

from .lamination import LaminationClass
from .quadratic import R_ESC

INTERIOR = (0, 0, 0)
OVERLAY_COLORS = [(255, 255, 255), (255, 64, 64), (64, 200, 255), (255, 210, 0), (120, 255, 120)]


@dataclass(frozen=True)
class Overlay:
    points: tuple
    color: tuple = (255, 255, 255)
    kind: str = "path"  # or "points"


@dataclass(frozen=True)
class RenderSpec:
    plane: str = "parameter"
    c: Optional[complex] = None
    center: complex = complex(-0.5, 0)
    width: float = 3.0
    pixels: tuple = (600, 400)
    max_iter: int = 500
    overlays: tuple = ()

    def __post_init__(self):
        if self.plane not in ("parameter", "dynamical"):
            raise ValueError("plane must be 'parameter' or 'dynamical'")
        if self.plane == "dynamical" and self.c is None:
            raise ValueError("a dynamical plane needs c")
        if self.width <= 0:
            raise ValueError("viewport width must be positive")
        if min(self.pixels) < 1:
            raise ValueError("resolution must be positive")
        if self.max_iter < 1:
            raise ValueError("max_iter must be >= 1")

    @property
    def height(self) -> float:
        w, h = self.pixels
        return self.width * h / w

    def grid(self) -> np.ndarray:
        """Complex coordinate of every pixel centre, row 0 at the top."""
        w, h = self.pixels
        x = self.center.real + (np.arange(w) + 0.5 - w / 2) * (self.width / w)
        y = self.center.imag - (np.arange(h) + 0.5 - h / 2) * (self.width / w)
        return x[None, :] + 1j * y[:, None]

    def to_pixel(self, z) -> tuple[np.ndarray, np.ndarray]:
        """Fractional (column, row) of points ``z``."""
        w, h = self.pixels
        z = np.asarray(z, dtype=complex)
        col = (z.real - self.center.real) * (w / self.width) + w / 2 - 0.5
        row = -(z.imag - self.center.imag) * (w / self.width) + h / 2 - 0.5
        return col, row


def escape_counts(spec: RenderSpec) -> np.ndarray:
    """Iteration at which each pixel's orbit leaves the disk of radius 4; -1 if it never does."""
    g = spec.grid()
    if spec.plane == "parameter":
        c = g
        z = np.zeros_like(g)
    else:
        c = np.full_like(g, spec.c)
        z = g.copy()
    counts = np.full(g.shape, -1, dtype=np.int64)
    alive = np.ones(g.shape, bool)
    with np.errstate(all="ignore"):
        for k in range(1, spec.max_iter + 1):
            z[alive] = z[alive] ** 2 + c[alive]
            out = alive & ~(np.abs(z) <= R_ESC)
            counts[out] = k
            alive &= ~out
            if not alive.any():
                break
    return counts


def colorize(counts: np.ndarray, max_iter: int) -> np.ndarray:
    """Fixed palette: interior black, exterior banded by log escape time."""
    img = np.zeros(counts.shape + (3,), dtype=np.uint8)
    ext = counts >= 0
    t = np.log1p(counts[ext]) / math.log1p(max_iter)
    img[ext, 0] = (255 * np.clip(1.6 * t, 0, 1)).astype(np.uint8)
    img[ext, 1] = (255 * np.clip(1.6 * t - 0.4, 0, 1)).astype(np.uint8)
    img[ext, 2] = (120 + 135 * np.clip(t, 0, 1)).astype(np.uint8)
    img[~ext] = INTERIOR
    return img


def _draw_segment(img, x0, y0, x1, y1, color):
    h, w = img.shape[:2]
    n = int(max(abs(x1 - x0), abs(y1 - y0))) + 1
    if n > 4 * (w + h):  # wildly off-screen segment
        return
    xs = np.rint(np.linspace(x0, x1, n + 1)).astype(int)
    ys = np.rint(np.linspace(y0, y1, n + 1)).astype(int)
    keep = (xs >= 0) & (xs < w) & (ys >= 0) & (ys < h)
    img[ys[keep], xs[keep]] = color


def draw_overlays(img: np.ndarray, spec: RenderSpec) -> np.ndarray:
    h, w = img.shape[:2]
    for ov in spec.overlays:
        pts = np.array(ov.points, dtype=complex)
        if pts.size == 0:
            continue
        col, row = spec.to_pixel(pts)
        if ov.kind == "points":
            for x, y in zip(col, row):
                xi, yi = int(round(x)), int(round(y))
                for dx in (-1, 0, 1):
                    for dy in (-1, 0, 1):
                        if 0 <= xi + dx < w and 0 <= yi + dy < h:
                            img[yi + dy, xi + dx] = ov.color
        else:
            for i in range(len(pts) - 1):
                _draw_segment(img, col[i], row[i], col[i + 1], row[i + 1], ov.color)
    return img


def render_plane(spec: RenderSpec) -> np.ndarray:
    """RGB image (uint8, rows top to bottom)."""
    img = colorize(escape_counts(spec), spec.max_iter)
    return draw_overlays(img, spec)


def encode_ppm(img: np.ndarray) -> bytes:
    h, w = img.shape[:2]
    return b"P6\n%d %d\n255\n" % (w, h) + np.ascontiguousarray(img, dtype=np.uint8).tobytes()


def save_image(img: np.ndarray, path: str) -> str:
    """Write PPM, or PNG when the name ends in .png and Pillow is installed."""
    if str(path).lower().endswith(".png"):
        try:
            from PIL import Image
        except ImportError as e:
            raise RuntimeError("PNG output needs Pillow; install the 'png' extra or use .ppm") from e
        Image.fromarray(img, "RGB").save(path, format="PNG")
        return path
    with open(path, "wb") as fh:
        fh.write(encode_ppm(img))
    return path


# ---------------------------------------------------------------------------
# chord diagrams
# ---------------------------------------------------------------------------

ROLE_STYLE = {
    "characteristic": ("#c0392b", 2.0),
    "critical": ("#2166ac", 1.6),
    "forward-image": ("#555555", 1.0),
    "generic": ("#000000", 1.0),
}

ClassLike = Union[LaminationClass, Sequence]


@dataclass
class ChordDiagram:
    classes: list = field(default_factory=list)  # (members, role) pairs
    size: int = 440
    radius: float = 200.0
    title: str = ""

    def add(self, cls: ClassLike, role: Optional[str] = None) -> "ChordDiagram":
        if isinstance(cls, LaminationClass):
            members = cls.angles()
            role = role or cls.role
        else:
            members = [Fraction(x) if not isinstance(x, float) else x for x in cls]
        self.classes.append((list(members), role or "generic"))
        return self


def _xy(t, cx, r):
    a = 2 * math.pi * float(t)
    return cx + r * math.cos(a), cx - r * math.sin(a)


def render_chords(d: ChordDiagram) -> str:
    """SVG document; identical input gives identical bytes."""
    cx, r = d.size / 2, d.radius
    out = [
        '<?xml version="1.0" encoding="UTF-8"?>',
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{d.size}" height="{d.size}" '
        f'viewBox="0 0 {d.size} {d.size}">',
    ]
    if d.title:
        out.append(f"<title>{_esc(d.title)}</title>")
    out.append(f'<circle cx="{cx:.6f}" cy="{cx:.6f}" r="{r:.6f}" fill="none" stroke="#999999" stroke-width="1"/>')
    for members, role in d.classes:
        color, width = ROLE_STYLE.get(role, ROLE_STYLE["generic"])
        pts = [_xy(t, cx, r) for t in sorted(float(m) % 1 for m in members)]
        attrs = f'stroke="{color}" stroke-width="{width}" data-role="{_esc(role)}"'
        if len(pts) == 2:
            (x0, y0), (x1, y1) = pts
            out.append(f'<line x1="{x0:.6f}" y1="{y0:.6f}" x2="{x1:.6f}" y2="{y1:.6f}" {attrs}/>')
        elif len(pts) > 2:
            path = " ".join(f"{x:.6f},{y:.6f}" for x, y in pts)
            out.append(f'<polygon points="{path}" fill="none" {attrs}/>')
        for x, y in pts:
            out.append(f'<circle cx="{x:.6f}" cy="{y:.6f}" r="2.5" fill="{color}"/>')
    out.append("</svg>")
    return "\n".join(out) + "\n"


def _esc(s: str) -> str:
    return s.replace("&", "&amp;").replace("<", "&lt;").replace(">", "&gt;").replace('"', "&quot;")


def chords_cross(a: Sequence, b: Sequence) -> bool:
    """Do the chords (a0, a1) and (b0, b1) cross inside the disk?"""
    a0, a1 = sorted(float(x) % 1 for x in a)
    inside = [a0 < float(x) % 1 < a1 for x in b]
    on_end = [float(x) % 1 in (a0, a1) for x in b]
    if any(on_end):
        return False
    return inside[0] != inside[1]
