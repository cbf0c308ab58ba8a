"""Precoders, equalizers and the rate metrics used to compare them."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.linalg as sla

from .numerics import (DegenerateChannelError, generalized_rayleigh_max, hermitian_part,
                       waterfilling)

RANK_TOL = 1e-10


@dataclass(frozen=True)
class NoiseModel:
    """Receiver noise power sigma_n^2 (W) plus the per-satellite link budget N_t, rho."""

    noise_power: float
    n_tx: int = 1
    rho: float = 1.0

    def __post_init__(self):
        if not self.noise_power > 0:
            raise ValueError(f"noise power must be positive, got {self.noise_power}")
        if self.n_tx < 1 or not self.rho > 0:
            raise ValueError("n_tx must be >= 1 and rho > 0")

    @property
    def inverse_snr(self) -> float:
        """sigma_n^2 / (N_t rho), the regularization of the geometric equalizer."""
        return self.noise_power / (self.n_tx * self.rho)


@dataclass(frozen=True, eq=False)
class Precoder:
    """One column vector per satellite; the composite precoder is block diagonal."""

    vectors: tuple

    @property
    def n_sats(self) -> int:
        return len(self.vectors)

    @property
    def powers(self) -> np.ndarray:
        return np.array([np.vdot(g, g).real for g in self.vectors])

    def matrix(self) -> np.ndarray:
        return sla.block_diag(*[np.asarray(g).reshape(-1, 1) for g in self.vectors])


@dataclass(frozen=True, eq=False)
class JointPrecoder:
    matrix: np.ndarray
    powers: np.ndarray

    @property
    def total_power(self) -> float:
        return float(np.sum(np.abs(self.matrix) ** 2))


def _as_matrix(h) -> np.ndarray:
    return np.asarray(getattr(h, "matrix", h))


def _eigenmodes(h: np.ndarray):
    _, s, vh = np.linalg.svd(h, full_matrices=False)
    if s.size == 0 or s[0] == 0:
        raise DegenerateChannelError("channel matrix is zero")
    keep = s > RANK_TOL * s[0]
    return s[keep] ** 2, vh[keep].conj().T


def svd_precoder(h, sum_power: float, noise: NoiseModel) -> JointPrecoder:
    """G = V P^1/2 with waterfilled P over the nonzero eigenmodes of H H^H."""
    lam, v = _eigenmodes(_as_matrix(h))
    alloc = waterfilling(lam, sum_power, noise.noise_power)
    return JointPrecoder(v * np.sqrt(alloc.powers), alloc.powers)


def capacity(h, sum_power: float, noise: NoiseModel) -> float:
    """Sum over eigenmodes of log2(1 + lambda p / sigma_n^2) with waterfilled powers."""
    lam, _ = _eigenmodes(_as_matrix(h))
    alloc = waterfilling(lam, sum_power, noise.noise_power)
    return float(np.sum(np.log2(1 + lam * alloc.powers / noise.noise_power)))


def logdet_rate(h, g: np.ndarray, noise: NoiseModel) -> float:
    """log2 det(I + H G G^H H^H / sigma_n^2) for an arbitrary joint precoder."""
    f = _as_matrix(h) @ g
    m = np.eye(f.shape[1]) + (f.conj().T @ f) / noise.noise_power
    sign, logdet = np.linalg.slogdet(hermitian_part(m))
    return float(logdet / np.log(2))


def geometric_precoder(b: np.ndarray, rho: float) -> np.ndarray:
    """Per-satellite matched beam sqrt(rho / N_t) b."""
    b = np.asarray(b)
    return np.sqrt(rho / b.size) * b


def robust_precoder(r_b: np.ndarray, rho: float) -> np.ndarray:
    """Principal eigenvector of the steering autocorrelation, scaled to power rho."""
    r_b = hermitian_part(r_b)
    n = r_b.shape[0]
    _, vec = sla.eigh(r_b, subset_by_index=[n - 1, n - 1])
    g = vec[:, 0]
    return np.sqrt(rho) * g / np.linalg.norm(g)


def _stack(a) -> np.ndarray:
    a = np.asarray(a)
    return a.reshape(-1, 1) if a.ndim == 1 else a


def geometric_equalizer(a, sigma_alpha2, noise: NoiseModel) -> np.ndarray:
    """Columns w_l = (A S A^H + s I)^-1 a_l with S = diag(sigma_alpha2), s the inverse SNR.

    Args:
        a: (N_r, N_S) stacked receive steering vectors.
        sigma_alpha2: per-satellite mean channel gains (scalar broadcasts).
        noise: noise model providing the inverse SNR.

    Returns:
        (N_r, N_S) matrix whose l-th column is w_l.
    """
    a = _stack(a)
    n_r, n_s = a.shape
    sig = np.broadcast_to(np.asarray(sigma_alpha2, dtype=float), (n_s,))
    cov = (a * sig) @ a.conj().T + noise.inverse_snr * np.eye(n_r)
    return sla.solve(hermitian_part(cov), a, assume_a="pos")


def geometric_equalizer_stacked(a, sigma_alpha2, noise: NoiseModel) -> np.ndarray:
    """Same equalizer from the N_S x N_S system: W^H = (A^H A S + s I)^-1 A^H.

    Returns the (N_r, N_S) matrix of columns w_l for direct comparison.
    """
    a = _stack(a)
    n_s = a.shape[1]
    sig = np.broadcast_to(np.asarray(sigma_alpha2, dtype=float), (n_s,))
    gram = a.conj().T @ a
    wh = np.linalg.solve(gram * sig[None, :] + noise.inverse_snr * np.eye(n_s), a.conj().T)
    return wh.conj().T


def robust_equalizer(r_a_all, target: int, sigma_alpha2, noise: NoiseModel) -> np.ndarray:
    """Maximizer of the mean-SINR quotient built from receive autocorrelations (unit norm)."""
    n_s = len(r_a_all)
    sig = np.broadcast_to(np.asarray(sigma_alpha2, dtype=float), (n_s,))
    n_r = r_a_all[0].shape[0]
    interference = noise.inverse_snr * np.eye(n_r, dtype=complex)
    for i, r in enumerate(r_a_all):
        if i != target:
            interference = interference + sig[i] * r
    _, w = generalized_rayleigh_max(sig[target] * r_a_all[target], interference)
    return w


def mean_sinr(w: np.ndarray, r_a_all, target: int, sigma_alpha2, noise: NoiseModel) -> float:
    """Objective maximized by the geometric/robust equalizers (scale invariant in w)."""
    n_s = len(r_a_all)
    sig = np.broadcast_to(np.asarray(sigma_alpha2, dtype=float), (n_s,))
    num = sig[target] * np.vdot(w, r_a_all[target] @ w).real
    den = noise.inverse_snr * np.vdot(w, w).real
    for i, r in enumerate(r_a_all):
        if i != target:
            den += sig[i] * np.vdot(w, r @ w).real
    return float(num / den)


def normalize_equalizer(w: np.ndarray, effective: np.ndarray) -> np.ndarray:
    """Diagnostic scaling beta = 1 / |w_l^H H_l g_l| per column (rates are unchanged)."""
    gains = np.abs(np.einsum("ml,ml->l", w.conj(), effective))
    return w / np.where(gains > 0, gains, 1.0)


def effective_channel(h, precoder: Precoder) -> np.ndarray:
    """(N_r, N_S) matrix of the per-stream received signatures H_l g_l."""
    hm = _as_matrix(h)
    n_tx = hm.shape[1] // precoder.n_sats
    cols = [hm[:, i * n_tx:(i + 1) * n_tx] @ g for i, g in enumerate(precoder.vectors)]
    return np.stack(cols, axis=1)


def sinr_all(h, precoder: Precoder, w: np.ndarray, noise: NoiseModel) -> np.ndarray:
    """Gamma_l for every stream, evaluated against the channel ``h``."""
    f = effective_channel(h, precoder)
    w = _stack(w)
    t = np.abs(w.conj().T @ f) ** 2
    signal = np.diag(t)
    interference = t.sum(axis=1) - signal
    noise_term = noise.noise_power * np.sum(np.abs(w) ** 2, axis=0)
    return signal / (interference + noise_term)


def stream_sinr(h, precoder: Precoder, w: np.ndarray, target: int, noise: NoiseModel) -> float:
    """|w^H H_l g_l|^2 / (sum_{i != l} |w^H H_i g_i|^2 + sigma_n^2 w^H w)."""
    f = effective_channel(h, precoder)
    t = np.abs(np.conj(w) @ f) ** 2
    signal = t[target]
    return float(signal / (t.sum() - signal + noise.noise_power * np.vdot(w, w).real))


def linear_rate(h, precoder: Precoder, w: np.ndarray, noise: NoiseModel) -> float:
    """Sum of log2(1 + Gamma_l) over all streams."""
    return float(np.sum(np.log2(1 + sinr_all(h, precoder, w, noise))))


def ergodic_rate_bound(a, sigma_alpha2: float, noise: NoiseModel) -> float:
    """log2 det(I + (sigma_alpha^2 / s) A^H A), equal to the N_r x N_r form."""
    a = _stack(a)
    m = np.eye(a.shape[1]) + (sigma_alpha2 / noise.inverse_snr) * (a.conj().T @ a)
    _, logdet = np.linalg.slogdet(hermitian_part(m))
    return float(logdet / np.log(2))
