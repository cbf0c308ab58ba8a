import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy.optimize import brentq

from swarmlink.channel import PlanarArray, steering_vector
from swarmlink.geometry import (EARTH_RADIUS, GeometryError, OrbitConfig, RxArraySpec,
                                SatelliteGeometry, angular_error_deg, chord_step,
                                eci_angle_from_elevation, elevation_from_eci,
                                inter_satellite_distance, optimal_inter_satellite_distance,
                                optimal_inter_satellite_distance_explicit,
                                orthogonal_neighbor_elevation, slant_range, space_angles,
                                trail_swarm)

ORBIT = OrbitConfig(600e3)
RX_PI = RxArraySpec(100, 1.0, math.pi)  # nu * D_Rx = pi
RX_8PI = RxArraySpec(16, 1.0, 8 * math.pi)
DEG = math.pi / 180


def triangle_slant_range(theta, orbit):
    """Root of |rx + d u|^2 = r0^2 with u the unit line of sight."""
    rx = np.array([0.0, orbit.earth_radius])
    u = np.array([math.cos(theta), math.sin(theta)])
    return brentq(lambda d: np.linalg.norm(rx + d * u) - orbit.radius, 0.0, 10 * orbit.radius,
                  xtol=1e-9)


def test_orbit_rejects_nonpositive_altitude():
    with pytest.raises(ValueError):
        OrbitConfig(0.0)
    assert ORBIT.radius == EARTH_RADIUS + 600e3


def test_eci_angle_zenith_and_law_of_sines():
    assert eci_angle_from_elevation(math.pi / 2, ORBIT) == pytest.approx(math.pi / 2)
    theta = 30 * DEG
    eci = eci_angle_from_elevation(theta, ORBIT)
    d = slant_range(theta, ORBIT)
    # satellite position from the receiver side must land on the orbit at angle eci
    pos = np.array([d * math.cos(theta), ORBIT.earth_radius + d * math.sin(theta)])
    assert math.atan2(pos[1], pos[0]) == pytest.approx(eci, abs=1e-12)
    # law of sines: r_E / sin(angle at satellite) = r0 / sin(angle at receiver)
    sat_angle = math.pi - (theta + math.pi / 2) - (math.pi / 2 - eci)
    assert ORBIT.earth_radius / math.sin(sat_angle) == pytest.approx(
        ORBIT.radius / math.sin(theta + math.pi / 2), rel=1e-12)


def test_eci_angle_mirror():
    a = eci_angle_from_elevation(30 * DEG, ORBIT)
    b = eci_angle_from_elevation(150 * DEG, ORBIT)
    assert a + b == pytest.approx(math.pi, abs=1e-12)


@pytest.mark.parametrize("theta_deg", [5, 30, 45, 89.9, 120, 150])
def test_slant_range_matches_triangle_root(theta_deg):
    theta = theta_deg * DEG
    assert slant_range(theta, ORBIT) == pytest.approx(triangle_slant_range(theta, ORBIT), rel=1e-9)


def test_slant_range_limits():
    assert slant_range(math.pi / 2, ORBIT) == 600e3
    horizon = math.sqrt(ORBIT.radius ** 2 - ORBIT.earth_radius ** 2)
    assert slant_range(1e-9, ORBIT) == pytest.approx(horizon, rel=1e-6)


@settings(max_examples=100, deadline=None)
@given(st.floats(0.01, math.pi / 2 - 1e-6))
def test_slant_range_symmetry_and_triangle_identity(theta):
    d = slant_range(theta, ORBIT)
    assert d == pytest.approx(slant_range(math.pi - theta, ORBIT), rel=1e-12)
    assert d >= ORBIT.altitude
    eci = eci_angle_from_elevation(theta, ORBIT)
    assert d * math.cos(theta) == pytest.approx(ORBIT.radius * math.cos(eci), rel=1e-9)


@settings(max_examples=100, deadline=None)
@given(st.floats(0.05, math.pi - 0.05))
def test_elevation_eci_round_trip(theta):
    eci = eci_angle_from_elevation(theta, ORBIT)
    assert elevation_from_eci(eci, ORBIT) == pytest.approx(theta, abs=1e-12)


def test_inter_satellite_distance_basic():
    a = SatelliteGeometry.from_elevation(40 * DEG, ORBIT)
    b = SatelliteGeometry.from_elevation(55 * DEG, ORBIT)
    assert inter_satellite_distance(a, a) == 0.0
    assert inter_satellite_distance(a, b) == inter_satellite_distance(b, a)


@settings(max_examples=100, deadline=None)
@given(st.floats(1.25, 1.7), st.floats(1e-5, 0.15))
def test_inter_satellite_distance_equals_chord(eci_a, delta):
    a = SatelliteGeometry.from_eci(eci_a, ORBIT)
    b = SatelliteGeometry.from_eci(eci_a + delta, ORBIT)
    chord = 2 * ORBIT.radius * math.sin(delta / 2)
    assert inter_satellite_distance(a, b) == pytest.approx(chord, rel=1e-9)


def test_orthogonal_neighbor_example():
    theta_n = orthogonal_neighbor_elevation(math.pi / 2, 1, RX_PI)
    assert theta_n == pytest.approx(math.acos(-1 / 50))
    assert math.degrees(theta_n) == pytest.approx(91.146, abs=1e-3)
    assert abs(math.cos(math.pi / 2) - math.cos(theta_n)) == pytest.approx(2 / 100, abs=1e-12)


def test_orthogonal_neighbor_rejections():
    with pytest.raises(ValueError, match="multiple"):
        orthogonal_neighbor_elevation(math.pi / 2, 100, RX_PI)
    with pytest.raises(GeometryError):
        orthogonal_neighbor_elevation(5 * DEG, 1, RxArraySpec(2, 1.0, 0.5))


def test_orthogonal_neighbor_infinite_resolution_limit():
    theta_n = orthogonal_neighbor_elevation(math.pi / 2, 1, RxArraySpec(10**9, 1.0, math.pi))
    assert theta_n == pytest.approx(math.pi / 2, abs=1e-8)


@settings(max_examples=100, deadline=None)
@given(st.floats(0.4, 2.7), st.integers(1, 5), st.sampled_from([1, -1]))
def test_orthogonal_neighbor_condition(theta, k, branch):
    try:
        theta_n = orthogonal_neighbor_elevation(theta, k, RX_PI, branch)
    except GeometryError:
        return
    assert abs(math.cos(theta) - math.cos(theta_n)) == pytest.approx(2 * k / 100, abs=1e-12)


def test_mirrored_branch_is_symmetric():
    up = orthogonal_neighbor_elevation(60 * DEG, 1, RX_PI, 1)
    down = orthogonal_neighbor_elevation(120 * DEG, 1, RX_PI, -1)
    assert up + down == pytest.approx(math.pi, abs=1e-12)


def test_orthogonal_elevations_give_orthogonal_steering():
    nu, dx = math.pi, 1.0
    arr = PlanarArray.ula(100, dx)
    thetas = [math.pi / 2]
    for _ in range(4):
        thetas.append(orthogonal_neighbor_elevation(thetas[-1], 1, RX_PI))
    a = np.stack([steering_vector(arr, space_angles(t, 0.0), nu, 1) for t in thetas], axis=1)
    np.testing.assert_allclose(a.conj().T @ a, 100 * np.eye(len(thetas)), atol=1e-8 * 100)


@pytest.mark.parametrize("theta_deg, rx, expected_km, tol_km", [
    (90, RX_PI, 12.0, 1.0),
    (30, RX_PI, 65.0, 3.0),
    (30, RX_8PI, 52.0, 2.0),
])
def test_optimal_distance_reference_values(theta_deg, rx, expected_km, tol_km):
    d = optimal_inter_satellite_distance(theta_deg * DEG, ORBIT, rx)
    assert d / 1e3 == pytest.approx(expected_km, abs=tol_km)


def test_optimal_distance_frozen_values():
    # composition evaluated once with an independent law-of-cosines script
    assert optimal_inter_satellite_distance(math.pi / 2, ORBIT, RX_PI) == pytest.approx(12002.2, abs=0.1)
    assert optimal_inter_satellite_distance(30 * DEG, ORBIT, RX_PI) == pytest.approx(65241.0, abs=0.5)
    assert optimal_inter_satellite_distance(math.pi / 2, ORBIT, RX_8PI) == pytest.approx(9376.0, abs=0.5)
    assert optimal_inter_satellite_distance(30 * DEG, ORBIT, RX_8PI) == pytest.approx(51782.5, abs=0.5)


@settings(max_examples=100, deadline=None)
@given(st.floats(0.2, math.pi / 2), st.integers(4, 400))
def test_explicit_formula_agrees_with_composition(theta, n):
    rx = RxArraySpec(n, 1.0, math.pi)
    try:
        ref = optimal_inter_satellite_distance_explicit(theta, ORBIT, rx)
    except GeometryError:
        return
    assert optimal_inter_satellite_distance(theta, ORBIT, rx) == pytest.approx(ref, rel=1e-9)


def test_optimal_distance_monotonicity():
    ns = [16, 32, 64, 100, 200]
    ds = [optimal_inter_satellite_distance(math.pi / 2, ORBIT, RxArraySpec(n, 1.0, math.pi))
          for n in ns]
    assert all(a > b for a, b in zip(ds, ds[1:]))
    thetas = np.radians([90, 80, 70, 60, 50, 40, 30])
    ds = [optimal_inter_satellite_distance(t, ORBIT, RX_PI) for t in thetas]
    assert all(a < b for a, b in zip(ds, ds[1:]))


def test_trail_swarm_single():
    (g,) = trail_swarm(40 * DEG, 5e3, 1, ORBIT)
    assert g.elevation == pytest.approx(40 * DEG)


@settings(max_examples=50, deadline=None)
@given(st.floats(100.0, 200e3), st.floats(40 * DEG, 140 * DEG))
def test_trail_swarm_pair_reproduces_spacing(spacing, mean_el):
    a, b = trail_swarm(mean_el, spacing, 2, ORBIT)
    assert inter_satellite_distance(a, b) == pytest.approx(spacing, rel=1e-6)
    assert (a.elevation + b.elevation) / 2 == pytest.approx(mean_el, abs=1e-9)


def test_trail_swarm_zenith_pair_symmetric():
    a, b = trail_swarm(math.pi / 2, 30e3, 2, ORBIT)
    assert a.elevation + b.elevation == pytest.approx(math.pi, abs=1e-9)
    assert a.slant_range == pytest.approx(b.slant_range, rel=1e-9)


@settings(max_examples=30, deadline=None)
@given(st.integers(2, 8), st.floats(1e3, 80e3), st.floats(50 * DEG, 130 * DEG))
def test_trail_swarm_equal_adjacent_spacing(n, spacing, mean_el):
    swarm = trail_swarm(mean_el, spacing, n, ORBIT)
    gaps = [inter_satellite_distance(a, b) for a, b in zip(swarm, swarm[1:])]
    np.testing.assert_allclose(gaps, gaps[0], rtol=1e-9)
    assert np.mean([g.elevation for g in swarm]) == pytest.approx(mean_el, abs=1e-9)
    assert all(g.azimuth == 0 for g in swarm)


def test_trail_swarm_below_horizon():
    with pytest.raises(GeometryError):
        trail_swarm(10 * DEG, 3000e3, 4, ORBIT)
    with pytest.raises(GeometryError):
        chord_step(3 * ORBIT.radius, ORBIT)


@pytest.mark.parametrize("el, az, expected", [
    (math.pi / 2, 1.234, (0.0, 0.0)),
    (0.0, 0.0, (1.0, 0.0)),
    (60 * DEG, 30 * DEG, (0.5 * math.cos(30 * DEG), 0.25)),
])
def test_space_angles(el, az, expected):
    np.testing.assert_allclose(space_angles(el, az), expected, atol=1e-15)


def test_space_angles_match_unit_vector_projection():
    el, az = 60 * DEG, 30 * DEG
    u = np.array([math.cos(el) * math.cos(az), math.cos(el) * math.sin(az), math.sin(el)])
    np.testing.assert_allclose(space_angles(el, az), u[:2], atol=1e-15)
    assert space_angles(el, az)[1] == pytest.approx(0.25)


def test_angular_error_display_helper():
    assert angular_error_deg(0.05) == pytest.approx(2.866, abs=1e-3)


def test_satellite_frame_angles_match_nadir_geometry():
    g = SatelliteGeometry.from_elevation(30 * DEG, ORBIT)
    off_nadir = math.asin(ORBIT.earth_radius / ORBIT.radius * math.cos(30 * DEG))
    assert g.sat_elevation == pytest.approx(math.pi / 2 - off_nadir)
    # triangle angles sum: elevation + 90 deg + off-nadir + central angle = pi
    central = abs(g.eci_angle - math.pi / 2)
    assert g.elevation + math.pi / 2 + off_nadir + central == pytest.approx(math.pi, abs=1e-12)
