"""Point-vortex dynamics and energy-momentum stability of ring equilibria."""
from .core import (
    Family,
    Model,
    ModelParams,
    PlanePoint,
    RingConfig,
    SpherePoint,
    VortexSystem,
    Vorticity,
    build_double_ring,
    build_planar_ring,
    build_sphere_ring,
)
from .specfun import bessel_k0, bessel_k1

__version__ = "0.1.0"

__all__ = [
    "Family", "Model", "ModelParams", "PlanePoint", "RingConfig", "SpherePoint",
    "VortexSystem", "Vorticity", "build_double_ring", "build_planar_ring",
    "build_sphere_ring", "bessel_k0", "bessel_k1", "__version__",
]
