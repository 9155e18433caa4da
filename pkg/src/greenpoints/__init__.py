"""Green-function kernels and minimal-energy point configurations on the CROSS."""

__version__ = "0.1.0"

from .geometry import (  # noqa: F401
    Configuration,
    Family,
    Manifold,
    Point,
    TangentVector,
    distance,
    distance_gradient,
    manifold,
    random_point,
    retract,
)
