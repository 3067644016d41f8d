"""Non-recurrent angles of the doubling map and the parameter rays that land on them."""

from .circle import (
    Angle,
    AngleSpecError,
    Arc,
    DyadicInterval,
    Enclosure,
    Membership,
    RationalAngle,
    StreamedAngle,
    UndecidedError,
    arc,
    bits,
    dist,
    double,
    halves,
    in_arc,
    parse_angle,
    rat,
    sigma,
)
from .symbolic import angle_nonrecurrence, itinerary, kneading, refute_periods

__version__ = "0.1.0"

__all__ = [
    "Angle", "AngleSpecError", "Arc", "DyadicInterval", "Enclosure", "Membership",
    "RationalAngle", "StreamedAngle", "UndecidedError", "arc", "bits", "dist", "double",
    "halves", "in_arc", "parse_angle", "rat", "sigma",
    "angle_nonrecurrence", "itinerary", "kneading", "refute_periods",
]
