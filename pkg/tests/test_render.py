import xml.etree.ElementTree as ET
from fractions import Fraction

import numpy as np
import pytest

from nonrecurrent.lamination import characteristic_class, critical_class, image_class, unlinked
from nonrecurrent.render import (
    ChordDiagram,
    Overlay,
    RenderSpec,
    chords_cross,
    encode_ppm,
    escape_counts,
    render_chords,
    render_plane,
    save_image,
)

SVG = "{http://www.w3.org/2000/svg}"


def one_pixel(c, max_iter=500):
    return escape_counts(RenderSpec("parameter", center=complex(c), width=1e-9, pixels=(1, 1), max_iter=max_iter))[0, 0]


def test_pixel_classification():
    assert one_pixel(0) == -1
    assert one_pixel(1) == 3  # 0, 1, 2, 5
    assert one_pixel(-2) == -1


def test_escape_counts_match_loop():
    spec = RenderSpec("dynamical", c=-0.12 + 0.75j, center=0j, width=3, pixels=(24, 16), max_iter=60)
    counts = escape_counts(spec)
    for (i, j), z in np.ndenumerate(spec.grid()):
        k, want = 0, -1
        while k < 60:
            z = z * z + spec.c
            k += 1
            if abs(z) > 4:
                want = k
                break
        assert counts[i, j] == want


def test_grid_and_pixel_map_agree():
    spec = RenderSpec(pixels=(40, 30))
    g = spec.grid()
    col, row = spec.to_pixel(g)
    assert np.allclose(col, np.arange(40)[None, :]) and np.allclose(row, np.arange(30)[:, None])


def test_overlay_drawn():
    spec = RenderSpec(center=0j, width=4, pixels=(50, 50), max_iter=20,
                      overlays=(Overlay((1 + 1j, -1 - 1j), (1, 2, 3)),))
    img = render_plane(spec)
    assert (img == (1, 2, 3)).all(axis=2).sum() > 20


def test_render_is_deterministic(tmp_path):
    spec = RenderSpec(pixels=(60, 40), max_iter=50)
    a, b = render_plane(spec), render_plane(spec)
    assert encode_ppm(a) == encode_ppm(b)
    p = save_image(a, str(tmp_path / "m.ppm"))
    assert open(p, "rb").read().startswith(b"P6\n60 40\n255\n")


def test_png_output(tmp_path):
    pytest.importorskip("PIL")
    p = save_image(render_plane(RenderSpec(pixels=(10, 10), max_iter=10)), str(tmp_path / "m.png"))
    assert open(p, "rb").read(8) == b"\x89PNG\r\n\x1a\n"


def test_bad_spec():
    with pytest.raises(ValueError):
        RenderSpec("dynamical")
    with pytest.raises(ValueError):
        RenderSpec(width=0)


# --- chords ------------------------------------------------------------------


def test_single_chord_is_vertical():
    svg = render_chords(ChordDiagram().add([Fraction(1, 3), Fraction(2, 3)]))
    lines = ET.fromstring(svg).findall(f"{SVG}line")
    assert len(lines) == 1
    assert float(lines[0].get("x1")) == pytest.approx(float(lines[0].get("x2")))


def test_empty_diagram_is_valid_svg():
    root = ET.fromstring(render_chords(ChordDiagram()))
    assert root.tag == f"{SVG}svg"
    assert not root.findall(f"{SVG}line") and not root.findall(f"{SVG}polygon")


def test_theta_star_classes_do_not_cross(theta_star):
    A = characteristic_class(theta_star, 48)
    classes = [A, critical_class(A), image_class(theta_star, 2, 48), image_class(theta_star, 3, 48)]
    d = ChordDiagram()
    for c in classes:
        d.add(c)
    svg = render_chords(d)
    assert svg == render_chords(d)
    ET.fromstring(svg)
    for i in range(len(classes)):
        for j in range(i + 1, len(classes)):
            assert unlinked(classes[i], classes[j])
    pairs = [m for m, _ in d.classes if len(m) == 2]
    for i in range(len(pairs)):
        for j in range(i + 1, len(pairs)):
            assert not chords_cross(pairs[i], pairs[j])


def test_chords_cross():
    assert chords_cross([0.1, 0.5], [0.3, 0.7])
    assert not chords_cross([0.1, 0.4], [0.5, 0.9])
    assert not chords_cross([0.1, 0.4], [0.4, 0.9])
