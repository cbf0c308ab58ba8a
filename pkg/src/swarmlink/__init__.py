"""Geometric and robust transceivers for satellite-swarm downlinks."""

from .channel import PlanarArray, PathLossConfig, steering_vector, wavenumber
from .geometry import OrbitConfig, RxArraySpec, SatelliteGeometry, trail_swarm
from .uncertainty import ErrorDistribution

__all__ = [
    "ErrorDistribution",
    "OrbitConfig",
    "PathLossConfig",
    "PlanarArray",
    "RxArraySpec",
    "SatelliteGeometry",
    "steering_vector",
    "trail_swarm",
    "wavenumber",
]
