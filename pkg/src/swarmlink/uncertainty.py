"""Space-angle error laws, their characteristic functions and steering moments."""
from __future__ import annotations

import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .channel import PlanarArray, steering_vector

_GL_ORDER = 16
_GL_NODES, _GL_WEIGHTS = np.polynomial.legendre.leggauss(_GL_ORDER)


def _gauss_legendre(f, a: float, b: float) -> float:
    half = 0.5 * (b - a)
    mid = 0.5 * (a + b)
    return half * float(np.dot(_GL_WEIGHTS, f(mid + half * _GL_NODES)))


def adaptive_gauss_legendre(f, a: float, b: float, tol: float = 1e-8, max_depth: int = 30) -> float:
    """Composite Gauss-Legendre quadrature with adaptive bisection.

    Each panel is accepted once its 16-point estimate agrees with the sum of
    the two half-panel estimates to the panel's share of ``tol``.
    """
    stack = [(a, b, _gauss_legendre(f, a, b), 0)]
    total = 0.0
    width = b - a
    while stack:
        lo, hi, whole, depth = stack.pop()
        mid = 0.5 * (lo + hi)
        left = _gauss_legendre(f, lo, mid)
        right = _gauss_legendre(f, mid, hi)
        if abs(left + right - whole) <= tol * (hi - lo) / width or depth >= max_depth:
            total += left + right
        else:
            stack.append((lo, mid, left, depth + 1))
            stack.append((mid, hi, right, depth + 1))
    return total


@dataclass(frozen=True, eq=False)
class ErrorDistribution:
    """Zero-mean law of a space-angle estimation error, shared by both axes of a node.

    kind is one of "none", "uniform" (param = max), "gaussian" (param = sigma)
    or "tabulated" (piecewise-linear pdf on a uniform symmetric grid).
    """

    kind: str = "none"
    param: float = 0.0
    grid: np.ndarray | None = None
    density: np.ndarray | None = None

    def __post_init__(self):
        if self.kind not in ("none", "uniform", "gaussian", "tabulated"):
            raise ValueError(f"unknown error law {self.kind!r}")
        if self.kind in ("uniform", "gaussian") and not self.param >= 0:
            raise ValueError(f"{self.kind} parameter must be >= 0, got {self.param}")
        if self.kind == "tabulated":
            self._init_table()

    def _init_table(self):
        x = np.asarray(self.grid, dtype=float)
        p = np.asarray(self.density, dtype=float)
        if x.ndim != 1 or x.shape != p.shape or x.size < 2:
            raise ValueError("tabulated pdf needs matching 1-D value and density columns")
        steps = np.diff(x)
        if np.any(steps <= 0) or not np.allclose(steps, steps[0], rtol=1e-9, atol=0):
            raise ValueError("tabulated pdf needs a strictly increasing uniform grid")
        if not math.isclose(x[0], -x[-1], rel_tol=1e-9, abs_tol=1e-15):
            raise ValueError("tabulated pdf support must be symmetric about 0")
        if np.any(p < 0):
            raise ValueError("density values must be >= 0")
        mass = np.trapezoid(p, x)
        if not mass > 0:
            raise ValueError("density integrates to zero")
        if abs(mass - 1.0) > 1e-12:
            p = p / mass
        object.__setattr__(self, "grid", x)
        object.__setattr__(self, "density", p)
        mean = sum(adaptive_gauss_legendre(lambda u: u * self.pdf(u), lo, hi, tol=1e-12)
                   for lo, hi in zip(x[:-1], x[1:]))
        if abs(mean) > 1e-9:
            raise ValueError(f"tabulated pdf has nonzero mean {mean:.3g}")
        # cumulative mass at the knots of the piecewise-linear pdf
        cdf = np.concatenate([[0.0], np.cumsum(0.5 * (p[1:] + p[:-1]) * np.diff(x))])
        object.__setattr__(self, "_cdf", cdf / cdf[-1])

    @classmethod
    def none(cls) -> "ErrorDistribution":
        return cls("none")

    @classmethod
    def uniform(cls, max_error: float) -> "ErrorDistribution":
        return cls("uniform", float(max_error))

    @classmethod
    def gaussian(cls, sigma: float) -> "ErrorDistribution":
        return cls("gaussian", float(sigma))

    @classmethod
    def tabulated(cls, values, density) -> "ErrorDistribution":
        return cls("tabulated", 0.0, np.asarray(values, float), np.asarray(density, float))

    @classmethod
    def from_table_file(cls, path) -> "ErrorDistribution":
        """Load a two-column (value, density) text table; '#' starts a comment."""
        data = np.loadtxt(Path(path), comments="#", ndmin=2)
        if data.shape[1] != 2:
            raise ValueError(f"{path}: expected two columns, found {data.shape[1]}")
        return cls.tabulated(data[:, 0], data[:, 1])

    @property
    def is_none(self) -> bool:
        return self.kind == "none" or (self.kind in ("uniform", "gaussian") and self.param == 0)

    @property
    def variance(self) -> float:
        if self.kind == "uniform":
            return self.param ** 2 / 3
        if self.kind == "gaussian":
            return self.param ** 2
        if self.kind == "tabulated":
            return sum(adaptive_gauss_legendre(lambda u: u * u * self.pdf(u), lo, hi, tol=1e-14)
                       for lo, hi in zip(self.grid[:-1], self.grid[1:]))
        return 0.0

    def pdf(self, u):
        if self.kind != "tabulated":
            raise ValueError("pdf is only tabulated for the tabulated law")
        return np.interp(u, self.grid, self.density, left=0.0, right=0.0)

    def __eq__(self, other):
        if not isinstance(other, ErrorDistribution) or self.kind != other.kind:
            return NotImplemented if not isinstance(other, ErrorDistribution) else False
        if self.kind == "tabulated":
            return (np.array_equal(self.grid, other.grid)
                    and np.array_equal(self.density, other.density))
        return self.param == other.param

    def __repr__(self):
        if self.kind == "tabulated":
            return f"ErrorDistribution(tabulated, {self.grid.size} points)"
        if self.kind == "none":
            return "ErrorDistribution(none)"
        return f"ErrorDistribution({self.kind}, {self.param!r})"


def _tabulated_cf(dist: ErrorDistribution, t: float) -> float:
    if t == 0.0:
        return 1.0
    # symmetric pdf: the sine part integrates to zero
    return sum(adaptive_gauss_legendre(lambda u: np.cos(t * u) * dist.pdf(u), lo, hi, tol=1e-10)
               for lo, hi in zip(dist.grid[:-1], dist.grid[1:]))


def cf_eval(dist: ErrorDistribution, t):
    """Characteristic function E{exp(j t e)} (real for the symmetric laws supported)."""
    t_arr = np.asarray(t, dtype=float)
    if dist.kind == "none":
        out = np.ones_like(t_arr)
    elif dist.kind == "uniform":
        out = np.sinc(t_arr * dist.param / math.pi)
    elif dist.kind == "gaussian":
        out = np.exp(-0.5 * (t_arr * dist.param) ** 2)
    else:
        flat = t_arr.ravel()
        uniq, inv = np.unique(np.abs(flat), return_inverse=True)
        vals = np.array([_tabulated_cf(dist, float(v)) for v in uniq])
        out = vals[inv].reshape(t_arr.shape)
    return float(out) if out.ndim == 0 else out


def expected_steering(array: PlanarArray, phi_hat, nu: float, dist: ErrorDistribution,
                      sign: int = 1) -> np.ndarray:
    """E{v} for a steering vector built around the estimate ``phi_hat``."""
    v = steering_vector(array, phi_hat, nu, sign)
    if dist.is_none:
        return v
    return v * cf_eval(dist, nu * array.x) * cf_eval(dist, nu * array.y)


def steering_autocorrelation(array: PlanarArray, phi_hat, nu: float, dist: ErrorDistribution,
                             sign: int = 1) -> np.ndarray:
    """R = E{v v^H} = (v_hat v_hat^H) * C with C_mn = cf(nu dx_mn) cf(nu dy_mn)."""
    v = steering_vector(array, phi_hat, nu, sign)
    r = np.outer(v, np.conj(v))
    if dist.is_none:
        return r
    dx = array.x[:, None] - array.x[None, :]
    dy = array.y[:, None] - array.y[None, :]
    return r * (cf_eval(dist, nu * dx) * cf_eval(dist, nu * dy))


def _sample_tabulated(dist: ErrorDistribution, u: np.ndarray) -> np.ndarray:
    """Exact inverse of the piecewise-quadratic CDF of a piecewise-linear pdf."""
    x, p, cdf = dist.grid, dist.density, dist._cdf
    h = x[1] - x[0]
    i = np.clip(np.searchsorted(cdf, u, side="right") - 1, 0, x.size - 2)
    target = u - cdf[i]
    p0, p1 = p[i], p[i + 1]
    slope = (p1 - p0) / h
    # solve p0 s + slope s^2 / 2 = target for s in [0, h]
    with np.errstate(divide="ignore", invalid="ignore"):
        disc = np.sqrt(np.maximum(p0 * p0 + 2 * slope * target, 0.0))
        s_quad = 2 * target / (p0 + disc)
    s = np.where(p0 + disc > 0, s_quad, 0.0)
    return x[i] + np.clip(s, 0.0, h)


def sample_error(dist: ErrorDistribution, rng: np.random.Generator, size=None):
    """Independent x- and y-axis error draws; returns ``(e_x, e_y)``."""
    shape = (2,) if size is None else (2,) + tuple(np.atleast_1d(size))
    if dist.kind == "none":
        e = np.zeros(shape)
    elif dist.kind == "uniform":
        e = rng.uniform(-dist.param, dist.param, shape)
    elif dist.kind == "gaussian":
        e = rng.normal(0.0, dist.param, shape)
    else:
        e = _sample_tabulated(dist, rng.random(shape))
    if size is None:
        return float(e[0]), float(e[1])
    return e[0], e[1]
