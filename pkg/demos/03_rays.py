"""
Parameter and dynamical rays
============================

Trace the parameter ray at theta* down towards the Mandelbrot set, then
trace the dynamical ray at the same angle for the parameter we landed on.
It should land at the critical value c itself.
"""

import numpy as np

from nonrecurrent.circle import parse_angle
from nonrecurrent.quadratic import find_cycles
from nonrecurrent.rays import shadow_critical_orbit, trace_dynamical_ray, trace_param_ray
from nonrecurrent.render import Overlay, RenderSpec, render_plane, save_image

theta = parse_angle("rule:triangular")

pr = trace_param_ray(theta)
c = pr.landing_estimate
print("parameter ray lands at", c, "tail", pr.tail_diameter)

dr = trace_dynamical_ray(c, theta)
print("dynamical ray lands at", dr.landing_estimate, "distance to c", abs(dr.landing_estimate - c))

# the forward orbit of a double-precision c is chaotic; read it off ray landings instead
pts, ok = shadow_critical_orbit(c, theta, 2000)
print("min |f^n(0)| over 2000 steps:", np.abs(pts).min(), "all rays ok:", ok.all())

cycles = find_cycles(c, 6)
print("cycles up to period 6 all repelling:", cycles.all_repelling and cycles.complete)

# two pictures: the parameter plane near c, and the Julia set with the ray
spec = RenderSpec("parameter", center=c, width=0.6, pixels=(480, 360), max_iter=400,
                  overlays=(Overlay(tuple(pr.positions), (255, 255, 255)),
                            Overlay((c,), (255, 64, 64), "points")))
save_image(render_plane(spec), "param_ray.ppm")
spec = RenderSpec("dynamical", c=c, center=0j, width=4, pixels=(480, 360), max_iter=400,
                  overlays=(Overlay(tuple(dr.positions), (255, 255, 255)),))
save_image(render_plane(spec), "julia_ray.ppm")
print("wrote param_ray.ppm and julia_ray.ppm")
