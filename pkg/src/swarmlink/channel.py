"""Steering vectors, the rank-one geometric channel and the exact LOS channel."""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .geometry import OrbitConfig, SatelliteGeometry

SPEED_OF_LIGHT = 299_792_458.0


def wavenumber(carrier: float) -> float:
    """nu = 2 pi f_c / c_0 in rad/m."""
    return 2 * math.pi * carrier / SPEED_OF_LIGHT


@dataclass(frozen=True, eq=False)
class PlanarArray:
    """Antenna coordinates (m) in the array's local xy-plane, antenna 0 at the origin."""

    x: np.ndarray
    y: np.ndarray

    def __post_init__(self):
        x = np.atleast_1d(np.asarray(self.x, dtype=float))
        y = np.atleast_1d(np.asarray(self.y, dtype=float))
        if x.shape != y.shape or x.ndim != 1 or x.size == 0:
            raise ValueError("array coordinates must be equal-length nonempty 1-D sequences")
        if not (np.all(np.isfinite(x)) and np.all(np.isfinite(y))):
            raise ValueError("array coordinates must be finite")
        object.__setattr__(self, "x", x - x[0])
        object.__setattr__(self, "y", y - y[0])

    @classmethod
    def ula(cls, n: int, spacing: float) -> "PlanarArray":
        return cls(np.arange(n) * spacing, np.zeros(n))

    @classmethod
    def ura(cls, nx: int, ny: int, spacing: float) -> "PlanarArray":
        ix, iy = np.meshgrid(np.arange(nx), np.arange(ny), indexing="xy")
        return cls(ix.ravel() * spacing, iy.ravel() * spacing)

    @property
    def size(self) -> int:
        return self.x.size

    def __len__(self):
        return self.size


def steering_vector(array: PlanarArray, phi, nu: float, sign: int = 1) -> np.ndarray:
    """exp(sign * j * nu * (x phi_x + y phi_y)); receive side sign=+1, transmit side -1."""
    phx, phy = phi
    return np.exp(sign * 1j * nu * (array.x * phx + array.y * phy))


def approx_channel(a: np.ndarray, b: np.ndarray, alpha: complex) -> np.ndarray:
    """Rank-one block alpha * a b^H."""
    return alpha * np.outer(a, np.conj(b))


@dataclass(frozen=True, eq=False)
class ChannelRealization:
    """Composite N_r x (N_S * N_t) channel with per-satellite column blocks."""

    matrix: np.ndarray
    n_tx: int

    @property
    def n_sats(self) -> int:
        return self.matrix.shape[1] // self.n_tx

    def block(self, sat: int) -> np.ndarray:
        return self.matrix[:, sat * self.n_tx:(sat + 1) * self.n_tx]

    @property
    def blocks(self) -> list[np.ndarray]:
        return [self.block(i) for i in range(self.n_sats)]


def _rx_frame():
    return np.eye(3)


def sat_frame(geom: SatelliteGeometry) -> np.ndarray:
    """Rows are the satellite's local x (along-track), y and z (nadir) axes."""
    c, s = math.cos(geom.eci_angle), math.sin(geom.eci_angle)
    ex = np.array([-s, 0.0, c])
    ez = np.array([-c, 0.0, -s])
    ey = np.cross(ez, ex)
    return np.stack([ex, ey, ez])


def array_center(geom: SatelliteGeometry, role: str, orbit: OrbitConfig) -> np.ndarray:
    if role == "receiver":
        return np.array([0.0, 0.0, orbit.earth_radius])
    if role == "satellite":
        r0 = orbit.radius
        return r0 * np.array([math.cos(geom.eci_angle), 0.0, math.sin(geom.eci_angle)])
    raise ValueError(f"unknown role {role!r}")


def _local_offsets(array: PlanarArray, role: str, geom: SatelliteGeometry) -> np.ndarray:
    frame = _rx_frame() if role == "receiver" else sat_frame(geom)
    dx = array.x - array.x.mean()
    dy = array.y - array.y.mean()
    return np.outer(dx, frame[0]) + np.outer(dy, frame[1])


def antenna_positions_3d(geom: SatelliteGeometry, array: PlanarArray, role: str,
                         orbit: OrbitConfig) -> np.ndarray:
    """Earth-centered antenna positions (N, 3) with the array centroid at the node.

    The receiver array lies in the local tangent plane with x in the orbital
    plane; a satellite array is nadir-pointing with x along-track.
    """
    return array_center(geom, role, orbit) + _local_offsets(array, role, geom)


def excess_distances(geom: SatelliteGeometry, sat_array: PlanarArray,
                     rx_array: PlanarArray, orbit: OrbitConfig) -> np.ndarray:
    """d_{m,n} - d_ref for every (receive m, transmit n) pair, d_ref between centroids.

    Computed as (2 D.delta + |delta|^2) / (d_mn + d_ref) to avoid cancellation
    between ~1e5 m distances.
    """
    base = array_center(geom, "satellite", orbit) - array_center(geom, "receiver", orbit)
    d_ref = np.linalg.norm(base)
    delta = (_local_offsets(sat_array, "satellite", geom)[None, :, :]
             - _local_offsets(rx_array, "receiver", geom)[:, None, :])
    num = 2.0 * delta @ base + np.einsum("mnk,mnk->mn", delta, delta)
    d_mn = np.linalg.norm(base + delta, axis=-1)
    return num / (d_mn + d_ref)


def _zero_table():
    return ElevationTable(((math.pi / 2, 0.0),))


@dataclass(frozen=True)
class ElevationTable:
    """Piecewise-linear map from elevation (rad) to dB.

    Tables that stop at 90 deg are mirrored for the descending half of a pass.
    """

    points: tuple = ((math.pi / 2, 0.0),)
    name: str | None = None

    def __post_init__(self):
        pts = tuple(sorted((float(e), float(v)) for e, v in self.points))
        if not pts:
            raise ValueError("elevation table needs at least one point")
        object.__setattr__(self, "points", pts)

    @classmethod
    def constant(cls, value_db: float) -> "ElevationTable":
        return cls(((math.pi / 2, float(value_db)),))

    def __call__(self, elevation: float) -> float:
        el = np.asarray([p[0] for p in self.points])
        val = np.asarray([p[1] for p in self.points])
        e = float(elevation)
        if el[-1] <= math.pi / 2 + 1e-12 and e > math.pi / 2:
            e = math.pi - e
        return float(np.interp(e, el, val))

    @property
    def is_zero(self) -> bool:
        return all(v == 0.0 for _, v in self.points)


# 3GPP TR 38.811 rural LOS shadow-fading std (dB) per elevation, Ka band.
# Transcription required: check against Table 6.6.2-3 before quantitative use.
RURAL_KA_SHADOW_STD = ElevationTable(
    tuple((math.radians(10.0 * (i + 1)), v)
          for i, v in enumerate([1.9, 1.6, 1.9, 2.3, 2.7, 3.1, 3.0, 3.6, 0.4])),
    name="rural-ka",
)


@dataclass(frozen=True)
class PathLossConfig:
    """Link-budget terms in dB/dBi; zero extra losses unless configured."""

    tx_gain_db: float = 0.0
    rx_gain_db: float = 0.0
    shadow_std_db: ElevationTable = field(default_factory=_zero_table)
    clutter_loss_db: float = 0.0
    gas_loss_db: ElevationTable = field(default_factory=_zero_table)
    scintillation_loss_db: ElevationTable = field(default_factory=_zero_table)

    def __post_init__(self):
        if self.clutter_loss_db < 0:
            raise ValueError("clutter loss must be >= 0 dB")
        for tab in (self.shadow_std_db, self.gas_loss_db, self.scintillation_loss_db):
            if any(v < 0 for _, v in tab.points):
                raise ValueError("loss tables must be >= 0 dB")


def deterministic_path_loss_db(d: float, nu: float, cfg: PathLossConfig, elevation: float) -> float:
    """Path loss without the random shadow-fading term."""
    return (20 * math.log10(2 * nu * d) - (cfg.tx_gain_db + cfg.rx_gain_db)
            + cfg.clutter_loss_db + cfg.gas_loss_db(elevation)
            + cfg.scintillation_loss_db(elevation))


def path_loss_db(d: float, nu: float, cfg: PathLossConfig, elevation: float,
                 rng: np.random.Generator) -> float:
    """Free-space loss 20 log10(2 nu d) minus gains plus shadowing, clutter, gas, scintillation.

    One standard-normal draw is always consumed so the rng stream does not
    depend on whether shadowing is active.
    """
    z = rng.standard_normal()
    return deterministic_path_loss_db(d, nu, cfg, elevation) + cfg.shadow_std_db(elevation) * z


def mean_channel_gain(cfg: PathLossConfig, elevation: float, d: float, nu: float,
                      n_draws: int = 4096, rng: np.random.Generator | None = None) -> float:
    """Monte-Carlo estimate of E{1/L} over shadow fading.

    Without shadowing this is exactly the deterministic 1/L.
    """
    if n_draws < 1:
        raise ValueError("n_draws must be >= 1")
    base = deterministic_path_loss_db(d, nu, cfg, elevation)
    std = cfg.shadow_std_db(elevation)
    if std == 0.0:
        return 10 ** (-base / 10)
    if rng is None:
        rng = np.random.default_rng(0)
    z = rng.standard_normal(n_draws)
    return float(np.mean(10 ** (-(base + std * z) / 10)))


def true_channel(swarm, sat_array: PlanarArray, rx_array: PlanarArray, cfg: PathLossConfig,
                 nu: float, orbit: OrbitConfig, rng: np.random.Generator) -> ChannelRealization:
    """Exact LOS channel: h_mn = L^-1/2 exp(-j (nu d_mn + phi_atm)) per satellite block.

    Each satellite gets one atmospheric phase and one shadowing draw; the path
    loss uses the centroid distance so all entries of a block share one modulus.
    """
    blocks = []
    for geom in swarm:
        phase_atm = rng.uniform(0.0, 2 * math.pi)
        loss = path_loss_db(geom.slant_range, nu, cfg, geom.elevation, rng)
        amp = 10 ** (-loss / 20)
        excess = excess_distances(geom, sat_array, rx_array, orbit)
        # the common nu * d_ref term is folded into the uniform phase
        blocks.append(amp * np.exp(-1j * (nu * excess + phase_atm)))
    return ChannelRealization(np.hstack(blocks), sat_array.size)


def geometric_channel(swarm, sat_array: PlanarArray, rx_array: PlanarArray, cfg: PathLossConfig,
                      nu: float, rng: np.random.Generator) -> ChannelRealization:
    """Rank-one approximation alpha_l a_l b_l^H drawn with the same randomness as ``true_channel``."""
    blocks = []
    for geom in swarm:
        phase_atm = rng.uniform(0.0, 2 * math.pi)
        loss = path_loss_db(geom.slant_range, nu, cfg, geom.elevation, rng)
        alpha = 10 ** (-loss / 20) * np.exp(-1j * phase_atm)
        a = steering_vector(rx_array, geom.rx_space_angles, nu, +1)
        b = steering_vector(sat_array, geom.sat_space_angles, nu, -1)
        blocks.append(approx_channel(a, b, alpha))
    return ChannelRealization(np.hstack(blocks), sat_array.size)
