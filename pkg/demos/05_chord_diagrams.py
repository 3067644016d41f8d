"""
Chord diagrams
==============

Draw classes as polygons inscribed in the circle.  Classes from one
lamination never cross.
"""

from nonrecurrent.circle import parse_angle
from nonrecurrent.lamination import characteristic_class, critical_class, image_class
from nonrecurrent.render import ChordDiagram, render_chords

for spec in ("rat:5/12", "rat:9/56", "rule:triangular"):
    theta = parse_angle(spec)
    A = characteristic_class(theta, 40)
    d = ChordDiagram(title=f"classes of {spec}").add(A)
    d.add(critical_class(A, strict=False))
    for k in (1, 2, 3):
        d.add(image_class(theta, k, 40))
    name = spec.replace(":", "_").replace("/", "_") + ".svg"
    with open(name, "w") as fh:
        fh.write(render_chords(d))
    print(name, [len(m) for m, _ in d.classes])
