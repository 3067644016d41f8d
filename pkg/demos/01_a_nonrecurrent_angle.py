"""
A non-recurrent angle
=====================

The angle with binary digits 1 exactly at positions 1, 3, 6, 10, 15, ...
(the triangular numbers) never comes back close to itself under doubling.
The gaps between ones keep growing, so every shift disagrees with the
original within a few digits.
"""

from fractions import Fraction

from nonrecurrent import angle_nonrecurrence, bits, kneading, parse_angle

theta = parse_angle("rule:triangular")
print("theta* =", float(theta))
print("digits  ", bits(theta, 40))

# how close does tau^n(theta) get to theta, for n up to 2000?
cert = angle_nonrecurrence(theta, 2000)
print("min distance >=", float(cert.delta_hat), "at n =", cert.argmin)
print("at least 1/16:", cert.delta_hat >= Fraction(1, 16))

# the kneading sequence, and the periods it rules out
kp = kneading(theta, 4096, p_max=1024)
print("kneading", kp.symbols[:40], "...")
print("every period <= 1024 refuted:", kp.refuted.all_refuted)

# compare with a periodic angle: the two one-sided itineraries split
third = kneading(parse_angle("rat:1/3"), 12)
print("1/3:", third.symbols, "vs", third.minus, "-> periodic:", third.periodic)
