"""
Pulling back arcs
=================

The angles sharing the kneading itinerary of theta form its
characteristic class.  Pull the itinerary back one symbol at a time and
watch the arcs shrink.
"""

from nonrecurrent.circle import parse_angle
from nonrecurrent.lamination import (
    characteristic_class,
    class_orbit_separation,
    critical_class,
    pullback,
)

theta = parse_angle("rule:triangular")

for depth in (4, 8, 16, 32, 64):
    A = characteristic_class(theta, depth)
    widths = ", ".join(f"{float(c.width):.2e}" for c in A.clusters)
    print(f"depth {depth:3d}: {len(A)} cluster(s), widths {widths}")

# a rational angle whose class has two members
A = characteristic_class(parse_angle("rat:5/12"), 40)
print("class of 5/12:", [str(x) for x in A.angles()])
print("its preimage: ", [str(x) for x in critical_class(A).angles()])

# the raw arc system behind a two-symbol word
X = pullback("11", parse_angle("rat:1/3"))
print("X_0 for w = 11, theta = 1/3:", X.base)

# the class of theta* wanders: its images stay away from it
sep = class_orbit_separation(theta, 64, 512)
print("dist(A, tau^n A) >=", float(sep.delta_class), "for n <= 512")
