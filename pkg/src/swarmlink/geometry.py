"""Orbit and array geometry for a trail-formation swarm over a single receiver.

Frames: the Earth-centered frame has its xz-plane in the orbital plane and the
receiver on the z-axis at radius r_E. A satellite at Earth-centered angle
``eci`` sits at r_0 * (cos eci, 0, sin eci). Elevations are kept unfolded in
(0, pi): values above pi/2 describe the descending half of a pass.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.optimize import brentq

EARTH_RADIUS = 6_371_000.0
_ZENITH_TOL = 1e-12


class GeometryError(ValueError):
    """Requested configuration is geometrically infeasible."""


@dataclass(frozen=True)
class OrbitConfig:
    altitude: float = 600e3
    earth_radius: float = EARTH_RADIUS

    def __post_init__(self):
        if not self.altitude > 0:
            raise ValueError(f"altitude must be positive, got {self.altitude}")

    @property
    def radius(self) -> float:
        """Orbital radius r_0 = r_E + d_0."""
        return self.earth_radius + self.altitude


@dataclass(frozen=True)
class RxArraySpec:
    """Receive array along the orbital plane: count, spacing (m), wavenumber (rad/m)."""

    n_x: int
    spacing: float
    wavenumber: float

    def __post_init__(self):
        if self.n_x < 1 or not self.spacing > 0 or not self.wavenumber > 0:
            raise ValueError(f"invalid receive array spec {self}")

    @property
    def resolution(self) -> float:
        """Space-angle step 2*pi / (nu * D_Rx * N_r^x) between orthogonal beams."""
        return 2 * math.pi / (self.wavenumber * self.spacing * self.n_x)


@dataclass(frozen=True)
class SatelliteGeometry:
    elevation: float
    azimuth: float
    eci_angle: float
    slant_range: float
    sat_elevation: float
    sat_azimuth: float

    @classmethod
    def from_elevation(cls, theta_el: float, orbit: OrbitConfig) -> "SatelliteGeometry":
        _check_elevation(theta_el)
        return cls(
            elevation=float(theta_el),
            azimuth=0.0,
            eci_angle=eci_angle_from_elevation(theta_el, orbit),
            slant_range=slant_range(theta_el, orbit),
            sat_elevation=sat_elevation(theta_el, orbit),
            sat_azimuth=0.0,
        )

    @classmethod
    def from_eci(cls, eci: float, orbit: OrbitConfig) -> "SatelliteGeometry":
        theta = elevation_from_eci(eci, orbit)
        _check_elevation(theta)
        return cls(
            elevation=theta,
            azimuth=0.0,
            eci_angle=float(eci),
            slant_range=slant_range(theta, orbit),
            sat_elevation=sat_elevation(theta, orbit),
            sat_azimuth=0.0,
        )

    @property
    def rx_space_angles(self) -> tuple[float, float]:
        return space_angles(self.elevation, self.azimuth)

    @property
    def sat_space_angles(self) -> tuple[float, float]:
        return space_angles(self.sat_elevation, self.sat_azimuth)


def _check_elevation(theta_el: float) -> None:
    if not 0.0 < theta_el < math.pi:
        raise GeometryError(f"elevation {math.degrees(theta_el):.6g} deg is below the horizon")


def space_angles(elevation: float, azimuth: float) -> tuple[float, float]:
    ce = math.cos(elevation)
    return ce * math.cos(azimuth), ce * math.sin(azimuth)


def eci_angle_from_elevation(theta_el: float, orbit: OrbitConfig) -> float:
    """Earth-centered angle of a satellite seen at elevation ``theta_el`` (law of sines)."""
    return theta_el + math.asin(orbit.earth_radius / orbit.radius * math.cos(theta_el))


def elevation_from_eci(eci: float, orbit: OrbitConfig) -> float:
    return math.atan2(orbit.radius * math.sin(eci) - orbit.earth_radius,
                      orbit.radius * math.cos(eci))


def slant_range(theta_el: float, orbit: OrbitConfig) -> float:
    """Receiver-satellite distance at elevation ``theta_el``.

    Equals r_0 cos(eci) / cos(theta); evaluated in the equivalent root form
    of the Earth-center triangle, which stays well conditioned near zenith.
    """
    if abs(theta_el - math.pi / 2) < _ZENITH_TOL:
        return orbit.altitude
    r_e, r_0 = orbit.earth_radius, orbit.radius
    c = math.cos(theta_el)
    return math.sqrt(r_0 * r_0 - (r_e * c) ** 2) - r_e * math.sin(theta_el)


def sat_elevation(theta_el: float, orbit: OrbitConfig) -> float:
    """Elevation of the receiver in a nadir-pointing satellite frame (x along-track).

    The off-nadir angle obeys sin(eta) = (r_E / r_0) cos(theta); the result is
    unfolded like the receiver elevation, so its cosine is the x space angle.
    """
    return math.pi / 2 - math.asin(orbit.earth_radius / orbit.radius * math.cos(theta_el))


def inter_satellite_distance(g_a: SatelliteGeometry, g_b: SatelliteGeometry) -> float:
    """Law-of-cosines distance of two satellites seen from the receiver."""
    da, db = g_a.slant_range, g_b.slant_range
    half = 0.5 * (g_b.elevation - g_a.elevation)
    # (da - db)^2 + 4 da db sin^2(dtheta / 2) == da^2 + db^2 - 2 da db cos(dtheta)
    return math.sqrt((da - db) ** 2 + 4.0 * da * db * math.sin(half) ** 2)


def orthogonal_neighbor_elevation(theta_el: float, k: int, rx: RxArraySpec,
                                  branch: int = 1) -> float:
    """Elevation whose receive steering vector is orthogonal to the one at ``theta_el``.

    ``branch=+1`` lowers the cosine (cos theta >= cos neighbor), ``branch=-1``
    raises it. ``k`` selects the k-th null of the receive array factor.
    """
    if k < 1 or int(k) != k:
        raise ValueError(f"k must be a positive integer, got {k}")
    if k % rx.n_x == 0:
        raise ValueError(f"k={k} is a multiple of N_r^x={rx.n_x}; steering vectors coincide")
    if branch not in (1, -1):
        raise ValueError("branch must be +1 or -1")
    arg = math.cos(theta_el) - branch * k * rx.resolution
    if abs(arg) > 1.0:
        raise GeometryError(f"no elevation with cos = {arg:.6g} (k={k})")
    return math.acos(arg)


def optimal_inter_satellite_distance(theta_el: float, orbit: OrbitConfig,
                                     rx: RxArraySpec, branch: int = 1) -> float:
    """Smallest spacing making the neighbor at ``theta_el`` orthogonal (first maximum)."""
    g = SatelliteGeometry.from_elevation(theta_el, orbit)
    nb = SatelliteGeometry.from_elevation(
        orthogonal_neighbor_elevation(theta_el, 1, rx, branch), orbit)
    return inter_satellite_distance(g, nb)


def optimal_inter_satellite_distance_explicit(theta_el: float, orbit: OrbitConfig,
                                              rx: RxArraySpec) -> float:
    """Closed-form expansion of the first-maximum spacing (cos theta >= cos neighbor case).

    Kept as a reference evaluation for ``optimal_inter_satellite_distance``.
    """
    r_e, r_0 = orbit.earth_radius, orbit.radius
    c = math.cos(theta_el)
    cn = c - rx.resolution
    if abs(cn) > 1:
        raise GeometryError(f"no elevation with cos = {cn:.6g}")
    theta_n = math.acos(cn)
    if abs(theta_el - math.pi / 2) < _ZENITH_TOL:
        ratio_l = orbit.altitude / r_0
    else:
        ratio_l = math.cos(theta_el + math.asin(r_e / r_0 * c)) / c
    if abs(cn) < 1e-15:
        ratio_n = orbit.altitude / r_0
    else:
        ratio_n = math.cos(theta_n + math.asin(r_e / r_0 * cn)) / cn
    inner = ratio_l ** 2 + ratio_n ** 2 - 2 * ratio_l * ratio_n * math.cos(theta_n - theta_el)
    return r_0 * math.sqrt(max(inner, 0.0))


def chord_step(spacing: float, orbit: OrbitConfig) -> float:
    """Earth-centered angle between two satellites ``spacing`` meters apart on the orbit."""
    ratio = spacing / (2 * orbit.radius)
    if ratio > 1:
        raise GeometryError(f"spacing {spacing} m exceeds the orbit diameter")
    return 2 * math.asin(ratio)


def _swarm_from_offsets(center: float, offsets: np.ndarray, orbit: OrbitConfig):
    return [SatelliteGeometry.from_eci(center + o, orbit) for o in offsets]


def trail_offsets(n_sats: int, spacing: float, orbit: OrbitConfig) -> np.ndarray:
    step = chord_step(spacing, orbit)
    return (np.arange(n_sats) - (n_sats - 1) / 2) * step


def trail_swarm(mean_elevation: float, spacing: float, n_sats: int,
                orbit: OrbitConfig) -> list[SatelliteGeometry]:
    """Place ``n_sats`` satellites on one orbit with equal chord spacing.

    The swarm is shifted along the orbit until the arithmetic mean of the
    elevations equals ``mean_elevation``.
    """
    if n_sats < 1:
        raise ValueError("n_sats must be >= 1")
    if spacing < 0:
        raise ValueError("spacing must be >= 0")
    _check_elevation(mean_elevation)
    if n_sats == 1:
        return [SatelliteGeometry.from_elevation(mean_elevation, orbit)]
    offsets = trail_offsets(n_sats, spacing, orbit)

    def mean_el(center):
        return np.mean([elevation_from_eci(center + o, orbit) for o in offsets]) - mean_elevation

    lo = eci_angle_from_elevation(1e-9, orbit) - offsets[0]
    hi = eci_angle_from_elevation(math.pi - 1e-9, orbit) - offsets[-1]
    if not lo < hi:
        raise GeometryError("swarm does not fit above the horizon")
    f_lo, f_hi = mean_el(lo), mean_el(hi)
    if f_lo > 0 or f_hi < 0:
        raise GeometryError(
            f"mean elevation {math.degrees(mean_elevation):.4g} deg unreachable with "
            f"{n_sats} satellites spaced {spacing:.6g} m")
    center = brentq(mean_el, lo, hi, xtol=1e-15, rtol=4 * np.finfo(float).eps)
    return _swarm_from_offsets(center, offsets, orbit)


def swarm_from_center(center_eci: float, spacing: float, n_sats: int,
                      orbit: OrbitConfig) -> list[SatelliteGeometry]:
    """Trail swarm whose middle sits at Earth-centered angle ``center_eci``."""
    return _swarm_from_offsets(center_eci, trail_offsets(n_sats, spacing, orbit), orbit)


def mean_elevation_center(mean_elevation: float, spacing: float, n_sats: int,
                          orbit: OrbitConfig) -> float:
    """Earth-centered angle of the swarm middle for a given mean elevation."""
    geoms = trail_swarm(mean_elevation, spacing, n_sats, orbit)
    return float(np.mean([g.eci_angle for g in geoms]))


def angular_error_deg(space_angle_error: float, elevation: float = math.pi / 2) -> float:
    """Display helper: elevation offset (deg) matching a space-angle error at ``elevation``."""
    c = math.cos(elevation)
    return math.degrees(abs(math.acos(np.clip(c - space_angle_error, -1, 1)) - elevation))
