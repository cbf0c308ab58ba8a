"""Dense Hermitian numerics: generalized Rayleigh quotient and waterfilling."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.linalg as sla


class DefinitenessError(ValueError):
    """Raised when a matrix that must be Hermitian positive definite is not."""


class DegenerateChannelError(ValueError):
    """Raised when a channel carries no power on any eigenmode."""


def hermitian_part(a: np.ndarray) -> np.ndarray:
    """Return (A + A^H) / 2, absorbing round-off asymmetry."""
    a = np.asarray(a)
    return 0.5 * (a + a.conj().T)


def generalized_rayleigh_max(a: np.ndarray, b: np.ndarray) -> tuple[float, np.ndarray]:
    """Maximize (x^H A x) / (x^H B x) over nonzero complex x.

    B is factored as L L^H; the top eigenpair (lam, y) of L^-1 A L^-H gives
    the maximizer x = L^-H y, which is returned with unit Euclidean norm.

    Args:
        a: Hermitian (n, n) matrix.
        b: Hermitian positive definite (n, n) matrix.

    Returns:
        (lambda_max, x)
    """
    a = np.atleast_2d(np.asarray(a, dtype=complex))
    b = np.atleast_2d(np.asarray(b, dtype=complex))
    if a.shape != b.shape or a.shape[0] != a.shape[1]:
        raise ValueError(f"shape mismatch: A {a.shape}, B {b.shape}")
    a = hermitian_part(a)
    b = hermitian_part(b)
    try:
        low = sla.cholesky(b, lower=True)
    except np.linalg.LinAlgError as exc:
        raise DefinitenessError("B is not positive definite") from exc

    # C = L^-1 A L^-H
    tmp = sla.solve_triangular(low, a, lower=True)
    c = sla.solve_triangular(low, tmp.conj().T, lower=True).conj().T
    c = hermitian_part(c)
    n = c.shape[0]
    lam, vec = sla.eigh(c, subset_by_index=[n - 1, n - 1])
    x = sla.solve_triangular(low.conj().T, vec[:, 0], lower=False)
    x = x / np.linalg.norm(x)
    return float(lam[0]), x


def rayleigh_quotient(a: np.ndarray, b: np.ndarray, x: np.ndarray) -> float:
    x = np.asarray(x)
    num = np.vdot(x, a @ x).real
    den = np.vdot(x, b @ x).real
    return float(num / den)


@dataclass(frozen=True)
class PowerAllocation:
    """Per-stream powers (W) and the water level (W)."""

    powers: np.ndarray
    water_level: float

    @property
    def total(self) -> float:
        return float(np.sum(self.powers))


def waterfilling(eigenvalues, total_power: float, noise_power: float) -> PowerAllocation:
    """Capacity-optimal power split over parallel Gaussian eigenmodes.

    Solves p_mu = max(0, mu - noise/lambda_mu) with sum(p) = total_power.
    The active set is found exactly by sorting the inverse gains, so no
    iterative search for the water level is needed.
    """
    lam = np.asarray(eigenvalues, dtype=float).ravel()
    if total_power <= 0 or noise_power <= 0:
        raise ValueError("total_power and noise_power must be positive")
    if np.any(lam < 0):
        raise ValueError("eigenvalues must be nonnegative")
    active = lam > 0
    if not np.any(active):
        raise DegenerateChannelError("all eigenvalues are zero")

    with np.errstate(over="ignore"):
        floor = noise_power / lam[active]
    order = np.argsort(floor, kind="stable")
    f = floor[order]
    # largest k such that the k cheapest streams all get positive power
    csum = np.cumsum(f)
    k = np.arange(1, f.size + 1)
    levels = (total_power + csum) / k
    ok = levels > f
    n_on = int(np.nonzero(ok)[0][-1]) + 1
    mu = float(levels[n_on - 1])

    p_active = np.maximum(mu - floor, 0.0)
    powers = np.zeros_like(lam)
    powers[active] = p_active
    # re-normalize the tiny round-off in the sum
    s = powers.sum()
    if s > 0:
        powers *= total_power / s
    return PowerAllocation(powers=powers, water_level=mu)
