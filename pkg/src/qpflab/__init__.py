"""Numerical laboratory for quasiperiodically forced interval and circle maps."""
from .circle import CircleAngle, RotationSpec, circle_dist, orbit_point
from .systems import QpfSystem, make_family

__version__ = "0.1.0"
__all__ = ["CircleAngle", "RotationSpec", "circle_dist", "orbit_point", "QpfSystem", "make_family"]
