"""Monte-Carlo engine: snapshots, sweeps, pass averages and beampatterns."""
from __future__ import annotations

import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace

import numpy as np

from .channel import (PathLossConfig, PlanarArray, geometric_channel, mean_channel_gain,
                      steering_vector, true_channel, wavenumber)
from .geometry import (GeometryError, OrbitConfig, RxArraySpec, SatelliteGeometry,
                       mean_elevation_center, optimal_inter_satellite_distance,
                       swarm_from_center, trail_swarm)
from .transceiver import (NoiseModel, Precoder, capacity, geometric_equalizer,
                          geometric_precoder, linear_rate, robust_equalizer, robust_precoder)
from .uncertainty import (ErrorDistribution, expected_steering, sample_error,
                          steering_autocorrelation)

HALF_WAVELENGTH = 299_792_458.0 / 20e9 / 2

METHODS = ("capacity", "geometric", "robust", "heuristic")
GAIN_MODES = ("common", "per-satellite")
CHANNEL_MODELS = ("exact", "geometric")


@dataclass(frozen=True)
class ArrayConfig:
    """Regular planar array: ``nx`` x ``ny`` elements at ``spacing`` meters."""

    nx: int
    ny: int = 1
    spacing: float = HALF_WAVELENGTH

    def __post_init__(self):
        if self.nx < 1 or self.ny < 1:
            raise ValueError("array dimensions must be >= 1")
        if not self.spacing > 0:
            raise ValueError("array spacing must be positive")

    @property
    def size(self) -> int:
        return self.nx * self.ny

    def build(self) -> PlanarArray:
        return PlanarArray.ura(self.nx, self.ny, self.spacing)


@dataclass(frozen=True)
class ScenarioConfig:
    """Everything needed to reproduce one experiment, in SI units and radians."""

    n_sats: int = 2
    spacing: float = 12e3
    mean_elevation: float = math.pi / 2
    sat_array: ArrayConfig = field(default_factory=lambda: ArrayConfig(60, 1, HALF_WAVELENGTH))
    rx_array: ArrayConfig = field(default_factory=lambda: ArrayConfig(100, 1, HALF_WAVELENGTH))
    orbit: OrbitConfig = field(default_factory=OrbitConfig)
    carrier: float = 20e9
    tx_power: float = 10.0
    noise_power: float = 1e-12
    path_loss: PathLossConfig = field(default_factory=PathLossConfig)
    sat_error: ErrorDistribution = field(default_factory=ErrorDistribution.none)
    rx_error: ErrorDistribution = field(default_factory=ErrorDistribution.none)
    gain_mode: str = "common"
    channel_model: str = "exact"
    methods: tuple = ("capacity", "geometric")
    trials: int = 1000
    seed: int = 0
    gain_draws: int = 4096
    distances: tuple = ()
    powers: tuple = ()
    pass_samples: int = 25
    pass_elevations: tuple = (math.radians(30.0), math.radians(150.0))
    angle_grid: tuple = (math.radians(60.0), math.radians(120.0), 2401)

    def __post_init__(self):
        if self.n_sats < 1:
            raise ValueError("n_sats must be >= 1")
        if self.trials < 1:
            raise ValueError("trials must be >= 1")
        if not self.tx_power > 0 or not self.noise_power > 0:
            raise ValueError("transmit and noise power must be positive")
        if self.spacing < 0:
            raise ValueError("spacing must be >= 0")
        if self.gain_mode not in GAIN_MODES:
            raise ValueError(f"gain_mode must be one of {GAIN_MODES}")
        if self.channel_model not in CHANNEL_MODELS:
            raise ValueError(f"channel_model must be one of {CHANNEL_MODELS}")
        unknown = set(self.methods) - set(METHODS)
        if unknown or not self.methods:
            raise ValueError(f"methods must be a nonempty subset of {METHODS}")
        # canonical order keeps output columns stable
        object.__setattr__(self, "methods", tuple(m for m in METHODS if m in self.methods))

    @property
    def nu(self) -> float:
        return wavenumber(self.carrier)

    @property
    def rho(self) -> float:
        return self.tx_power / self.n_sats

    @property
    def noise(self) -> NoiseModel:
        return NoiseModel(self.noise_power, self.sat_array.size, self.rho)

    def rx_spec(self) -> RxArraySpec:
        return RxArraySpec(self.rx_array.nx, self.rx_array.spacing, self.nu)


@dataclass(frozen=True)
class RateResult:
    mean: float
    stderr: float
    trials: int


@dataclass(frozen=True)
class SweepRow:
    """One sweep point; ``results`` is empty when the geometry is infeasible."""

    value: float
    feasible: bool
    results: dict
    note: str = ""


# ---------------------------------------------------------------- seeding

def _float_key(x: float) -> int:
    return int(np.float64(x).view(np.uint64))


def trial_rng(seed: int, point_key: tuple, trial: int) -> np.random.Generator:
    """Child generator keyed by value, never by position in a sweep or thread schedule."""
    ss = np.random.SeedSequence(entropy=int(seed), spawn_key=tuple(point_key) + (int(trial),))
    return np.random.default_rng(ss)


def _point_key(cfg: ScenarioConfig, swarm) -> tuple:
    center = float(np.mean([g.eci_angle for g in swarm]))
    return (_float_key(cfg.spacing), _float_key(cfg.tx_power), _float_key(center))


def thread_count() -> int:
    """Worker threads from SWARMLINK_THREADS (unset or 0 means one per CPU)."""
    raw = os.environ.get("SWARMLINK_THREADS", "0").strip() or "0"
    n = int(raw)
    if n < 0:
        raise ValueError("SWARMLINK_THREADS must be >= 0")
    return n if n > 0 else (os.cpu_count() or 1)


def _parallel_map(fn, items):
    items = list(items)
    n = min(thread_count(), len(items))
    if n <= 1:
        return [fn(x) for x in items]
    with ThreadPoolExecutor(max_workers=n) as pool:
        return list(pool.map(fn, items))


# ---------------------------------------------------------------- snapshot

@dataclass(frozen=True, eq=False)
class _Point:
    """Per-geometry quantities shared by all trials of one sweep point."""

    swarm: list
    sat_array: PlanarArray
    rx_array: PlanarArray
    sigma_alpha2: np.ndarray


def _prepare(cfg: ScenarioConfig, swarm) -> _Point:
    gains = np.array([mean_channel_gain(cfg.path_loss, g.elevation, g.slant_range, cfg.nu,
                                        cfg.gain_draws) for g in swarm])
    if cfg.gain_mode == "common":
        gains = np.full_like(gains, gains.mean())
    return _Point(list(swarm), cfg.sat_array.build(), cfg.rx_array.build(), gains)


def _perturb(phi, err):
    return phi[0] + err[0], phi[1] + err[1]


def _snapshot(cfg: ScenarioConfig, point: _Point, rng: np.random.Generator) -> dict:
    nu, rho, noise = cfg.nu, cfg.rho, cfg.noise
    swarm, sa, ra = point.swarm, point.sat_array, point.rx_array
    # draw order is fixed regardless of the requested methods
    if cfg.channel_model == "exact":
        h = true_channel(swarm, sa, ra, cfg.path_loss, nu, cfg.orbit, rng)
    else:
        h = geometric_channel(swarm, sa, ra, cfg.path_loss, nu, rng)
    sat_err = [sample_error(cfg.sat_error, rng) for _ in swarm]
    rx_err = [sample_error(cfg.rx_error, rng) for _ in swarm]

    out = {}
    if "capacity" in cfg.methods:
        out["capacity"] = capacity(h, cfg.tx_power, noise)
    if "geometric" in cfg.methods:
        g = Precoder(tuple(geometric_precoder(steering_vector(sa, s.sat_space_angles, nu, -1), rho)
                           for s in swarm))
        a = np.stack([steering_vector(ra, s.rx_space_angles, nu, +1) for s in swarm], axis=1)
        out["geometric"] = linear_rate(h, g, geometric_equalizer(a, point.sigma_alpha2, noise), noise)
    sat_hat = [_perturb(s.sat_space_angles, e) for s, e in zip(swarm, sat_err)]
    rx_hat = [_perturb(s.rx_space_angles, e) for s, e in zip(swarm, rx_err)]
    if "robust" in cfg.methods:
        g = Precoder(tuple(robust_precoder(steering_autocorrelation(sa, p, nu, cfg.sat_error, -1), rho)
                           for p in sat_hat))
        r_a = [steering_autocorrelation(ra, p, nu, cfg.rx_error, +1) for p in rx_hat]
        w = np.stack([robust_equalizer(r_a, i, point.sigma_alpha2, noise)
                      for i in range(len(swarm))], axis=1)
        out["robust"] = linear_rate(h, g, w, noise)
    if "heuristic" in cfg.methods:
        g = Precoder(tuple(geometric_precoder(steering_vector(sa, p, nu, -1), rho) for p in sat_hat))
        a = np.stack([steering_vector(ra, p, nu, +1) for p in rx_hat], axis=1)
        out["heuristic"] = linear_rate(h, g, geometric_equalizer(a, point.sigma_alpha2, noise), noise)
    return out


def scenario_swarm(cfg: ScenarioConfig) -> list[SatelliteGeometry]:
    return trail_swarm(cfg.mean_elevation, cfg.spacing, cfg.n_sats, cfg.orbit)


def run_snapshot(cfg: ScenarioConfig, rng: np.random.Generator, swarm=None) -> dict:
    """Rates of every requested method on one channel realization."""
    swarm = scenario_swarm(cfg) if swarm is None else swarm
    return _snapshot(cfg, _prepare(cfg, swarm), rng)


def trial_rates(cfg: ScenarioConfig, n_trials: int | None = None, swarm=None) -> dict:
    """Per-trial rate arrays for every method (trial t seeded by (seed, point, t))."""
    n = cfg.trials if n_trials is None else int(n_trials)
    if n < 1:
        raise ValueError("n_trials must be >= 1")
    swarm = scenario_swarm(cfg) if swarm is None else swarm
    point = _prepare(cfg, swarm)
    key = _point_key(cfg, swarm)
    rows = _parallel_map(lambda t: _snapshot(cfg, point, trial_rng(cfg.seed, key, t)), range(n))
    return {m: np.array([r[m] for r in rows]) for m in cfg.methods}


def _summarize(x: np.ndarray) -> RateResult:
    se = float(np.std(x, ddof=1) / math.sqrt(x.size)) if x.size > 1 else 0.0
    return RateResult(float(np.mean(x)), se, int(x.size))


def monte_carlo(cfg: ScenarioConfig, n_trials: int | None = None, swarm=None) -> dict:
    """Mean rate and standard error per method."""
    return {m: _summarize(x) for m, x in trial_rates(cfg, n_trials, swarm).items()}


# ---------------------------------------------------------------- sweeps

def sweep_distance(cfg: ScenarioConfig, distances) -> list[SweepRow]:
    """Rates versus inter-satellite spacing at the configured mean elevation."""
    distances = list(distances)
    if not distances:
        raise ValueError("distances must be nonempty")
    rows = []
    for d in distances:
        point_cfg = replace(cfg, spacing=float(d))
        try:
            swarm = scenario_swarm(point_cfg)
        except GeometryError as exc:
            rows.append(SweepRow(float(d), False, {}, str(exc)))
            continue
        rows.append(SweepRow(float(d), True, monte_carlo(point_cfg, swarm=swarm)))
    return rows


def sweep_power(cfg: ScenarioConfig, powers) -> list[SweepRow]:
    """Rates versus sum transmit power; rho = P / N_S on every row."""
    powers = list(powers)
    if not powers:
        raise ValueError("powers must be nonempty")
    swarm = scenario_swarm(cfg)
    return [SweepRow(float(p), True, monte_carlo(replace(cfg, tx_power=float(p)), swarm=swarm))
            for p in powers]


def pass_centers(cfg: ScenarioConfig, samples: int) -> np.ndarray:
    """Swarm-middle ECI angles spread uniformly in time between the pass limits."""
    lo, hi = cfg.pass_elevations
    c_lo = mean_elevation_center(lo, cfg.spacing, cfg.n_sats, cfg.orbit)
    c_hi = mean_elevation_center(hi, cfg.spacing, cfg.n_sats, cfg.orbit)
    return np.linspace(c_lo, c_hi, samples)


def pass_swarms(cfg: ScenarioConfig, samples: int) -> list[list[SatelliteGeometry]]:
    return [swarm_from_center(c, cfg.spacing, cfg.n_sats, cfg.orbit)
            for c in pass_centers(cfg, samples)]


def pass_average(cfg: ScenarioConfig, samples: int | None = None) -> dict:
    """Monte-Carlo rates averaged over a pass sampled uniformly in orbital angle.

    One sample evaluates the configured mean elevation instead.
    """
    samples = cfg.pass_samples if samples is None else int(samples)
    if samples < 1:
        raise ValueError("samples must be >= 1")
    if samples == 1:
        return monte_carlo(cfg)
    per_sample = [monte_carlo(cfg, swarm=s) for s in pass_swarms(cfg, samples)]
    out = {}
    for m in cfg.methods:
        means = np.array([r[m].mean for r in per_sample])
        ses = np.array([r[m].stderr for r in per_sample])
        out[m] = RateResult(float(means.mean()), float(math.sqrt(np.sum(ses ** 2)) / samples),
                            int(sum(r[m].trials for r in per_sample)))
    return out


def sweep_pass_distance(cfg: ScenarioConfig, distances, samples: int | None = None) -> list[SweepRow]:
    """Pass-averaged rates versus inter-satellite spacing."""
    rows = []
    for d in distances:
        point_cfg = replace(cfg, spacing=float(d))
        try:
            rows.append(SweepRow(float(d), True, pass_average(point_cfg, samples)))
        except GeometryError as exc:
            rows.append(SweepRow(float(d), False, {}, str(exc)))
    return rows


def dsopt(cfg: ScenarioConfig) -> float:
    """First-maximum spacing at the configured mean elevation."""
    return optimal_inter_satellite_distance(cfg.mean_elevation, cfg.orbit, cfg.rx_spec())


# ---------------------------------------------------------------- beampatterns

def beampattern(g: np.ndarray, array: PlanarArray, nu: float, angle_grid) -> np.ndarray:
    """Radiated power |b(theta)^H g|^2 along the array x-axis (zero azimuth)."""
    angles = np.asarray(angle_grid, dtype=float)
    phase = np.outer(np.cos(angles), array.x)
    b = np.exp(-1j * nu * phase)
    return np.abs(b.conj() @ g) ** 2


def beam_precoders(cfg: ScenarioConfig, aod: float | None = None) -> dict:
    """Heuristic, expected-steering and robust precoders for the satellite error law.

    All three are scaled to the per-satellite power rho.
    """
    sa = cfg.sat_array.build()
    nu, rho = cfg.nu, cfg.rho
    if aod is None:
        aod = SatelliteGeometry.from_elevation(cfg.mean_elevation, cfg.orbit).sat_elevation
    phi = (math.cos(aod), 0.0)
    mean_b = expected_steering(sa, phi, nu, cfg.sat_error, -1)
    return {
        "heuristic": geometric_precoder(steering_vector(sa, phi, nu, -1), rho),
        "expected": math.sqrt(rho) * mean_b / np.linalg.norm(mean_b),
        "robust": robust_precoder(steering_autocorrelation(sa, phi, nu, cfg.sat_error, -1), rho),
    }


def beampattern_table(cfg: ScenarioConfig, aod: float | None = None):
    """(angles, {method: power}) over the configured angle grid."""
    lo, hi, n = cfg.angle_grid
    angles = np.linspace(lo, hi, int(n))
    sa = cfg.sat_array.build()
    pre = beam_precoders(cfg, aod)
    return angles, {k: beampattern(g, sa, cfg.nu, angles) for k, g in pre.items()}


def half_power_beamwidth(angles: np.ndarray, power: np.ndarray) -> float:
    """Width of the contiguous region around the peak above half the peak power."""
    angles = np.asarray(angles)
    power = np.asarray(power)
    k = int(np.argmax(power))
    half = 0.5 * power[k]

    def crossing(step):
        i = k
        while 0 <= i + step < power.size and power[i + step] >= half:
            i += step
        j = i + step
        if not 0 <= j < power.size:
            return angles[i]
        # linear interpolation between the last inside and first outside sample
        f = (power[i] - half) / (power[i] - power[j])
        return angles[i] + f * (angles[j] - angles[i])

    return float(abs(crossing(1) - crossing(-1)))


def out_of_support_fraction(angles: np.ndarray, power: np.ndarray, center: float,
                            half_width: float) -> float:
    """Share of the power integrated over the grid that falls outside center +- half_width."""
    angles = np.asarray(angles)
    power = np.asarray(power)
    total = np.trapezoid(power, angles)
    outside = np.where(np.abs(angles - center) > half_width, power, 0.0)
    return float(np.trapezoid(outside, angles) / total)
