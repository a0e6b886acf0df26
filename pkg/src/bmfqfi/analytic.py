"""Closed forms and short-time expansions for one-axis twisting (OAT) and
twist-and-turn (TAT) dynamics from the x-polarised coherent state.

Series are stored as coefficients of powers of ``c*t`` and divide out N,
i.e. they describe F/N.
"""
import math
from dataclasses import dataclass

import numpy as np

from .errors import DomainError


def _cos_pow(x, n):
    """cos(x)**n for integer n >= 0 via exp(n*log|cos x|) with parity sign."""
    c = np.cos(x)
    if n == 0:
        return np.ones_like(c)
    with np.errstate(divide="ignore"):
        mag = np.exp(n * np.log(np.abs(c)))
    sign = np.where((c < 0) & (n % 2 == 1), -1.0, 1.0)
    return sign * mag


def _one_minus_cos_pow(x, n):
    c = np.cos(x)
    if n == 0:
        return np.zeros_like(c)
    with np.errstate(divide="ignore"):
        logmag = n * np.log(np.abs(c))
    negative = (c < 0) & (n % 2 == 1)
    return np.where(negative, 1.0 + np.exp(logmag), -np.expm1(logmag))


def oat_window(N, c, t):
    """True where c*t lies below N*pi/2 - 2*sqrt(N)."""
    return np.asarray(c * t) <= N * math.pi / 2 - 2 * math.sqrt(N)


def f_q_oat_yz(N, c, t):
    """QFI of the y-z block under OAT (the textbook closed form).

    Exact for the y-z covariance block at all times, but the J_x variance
    overtakes it close to c*t = N*pi/2; see :func:`f_q_oat_exact`.
    """
    t = np.asarray(t, dtype=float)
    x = c * t / N
    alpha = _one_minus_cos_pow(2 * x, N - 2)
    beta = 4.0 * np.sin(x) * _cos_pow(x, N - 2)
    return N * (1.0 + (N - 1) / 4.0 * (alpha + np.hypot(alpha, beta)))


def f_q_oat_x(N, c, t):
    """4 Var(J_x) under OAT."""
    t = np.asarray(t, dtype=float)
    x = c * t / N
    return N * (
        (N + 1) / 2.0 + (N - 1) / 2.0 * _cos_pow(2 * x, N - 2) - N * _cos_pow(x, 2 * N - 2)
    )


def f_q_oat_exact(N, c, t):
    """Exact OAT QFI over x, y, z: max of the y-z block and the x variance
    (the x-y and x-z covariances vanish by the pi-rotation symmetry about x)."""
    return np.maximum(f_q_oat_yz(N, c, t), f_q_oat_x(N, c, t))


def oat_mean_jx(N, c, t):
    return N / 2.0 * _cos_pow(c * np.asarray(t, dtype=float) / N, N - 1)


def f_b_oat_exact(N, c, t):
    """BMF QFI under OAT, alpha_B = 2 sin^2(ct/sqrt N)."""
    t = np.asarray(t, dtype=float)
    alpha = 2.0 * np.sin(c * t / math.sqrt(N)) ** 2
    return N * (1.0 + (N * alpha + np.sqrt(8 * N * alpha + (N * alpha) ** 2)) / 4.0)


def bmf_oat_covariance(N, c, t):
    """Closed-form Lambda_B(t) for OAT (full symmetric 3x3)."""
    t = np.asarray(t, dtype=float)
    rn = math.sqrt(N)
    out = np.zeros(t.shape + (3, 3))
    out[..., 1, 1] = (2 + N * (1 - np.cos(2 * c * t / rn))) / N
    out[..., 1, 2] = out[..., 2, 1] = 2 * np.sin(c * t / rn) / rn
    out[..., 2, 2] = 2.0 / N
    return N**2 / 8.0 * out


@dataclass(frozen=True)
class TaylorSeries:
    """F/N = sum_k coefficients[k] * (c t)**k, valid through ``order``."""

    coefficients: tuple
    order: int = 4

    def __post_init__(self):
        if len(self.coefficients) != 5:
            raise ValueError("TaylorSeries holds exactly five coefficients")

    def __call__(self, ct):
        ct = np.asarray(ct, dtype=float)
        out = np.zeros_like(ct)
        for coef in reversed(self.coefficients[: self.order + 1]):
            out = out * ct + coef
        return out

    def __getitem__(self, k):
        return self.coefficients[k]


def f_q_oat_taylor(N):
    """Large-N expansion of the exact OAT QFI as usually quoted; the
    1/N parts are not the exact finite-N coefficients (see
    :func:`f_q_oat_taylor_exact`)."""
    return TaylorSeries((1.0, 1.0, 0.5, 1 / 8 - 3 / (4 * N), math.nan), order=3)


def f_q_oat_taylor_exact(N):
    """Exact finite-N expansion of :func:`f_q_oat_yz` about t = 0+."""
    return TaylorSeries(
        (
            1.0,
            (N - 1) / N,
            (N * N - 3 * N + 2) / (2 * N * N),
            (3 * N**3 - 27 * N**2 + 56 * N - 32) / (24 * N**3),
            (-3 * N**3 + 17 * N**2 - 30 * N + 16) / (6 * N**4),
        )
    )


def f_b_oat_taylor(N):
    """Expansion of :func:`f_b_oat_exact`; exact through fourth order."""
    return TaylorSeries((1.0, 1.0, 0.5, 1 / 8 - 1 / (6 * N), -1 / (6 * N)))


def _lambda_sq(A, c):
    return A * (c - A)


def f_b_tat_taylor(N, A, c):
    """BMF TAT expansion as quoted for s_x(t) ~ 1 - (A^2+lambda^2)^2 t^2 / (2 N A^2)."""
    r = _lambda_sq(A, c) / c**2
    return TaylorSeries((1.0, 1.0, 0.5, r / 6 + 1 / 8 - 1 / (2 * N), r / 6 - 1 / (2 * N)))


def f_b_tat_taylor_exact(N, A, c):
    """Expansion obtained by Lie-differentiating the nine-moment equations."""
    r = _lambda_sq(A, c) / c**2
    return TaylorSeries((1.0, 1.0, 0.5, r / 6 + 1 / 8 - 1 / (6 * N), r / 6 - 1 / (6 * N)))


def f_hp_oat_taylor():
    return TaylorSeries((1.0, 1.0, 0.5, 1 / 8, 0.0))


def f_hp_tat_taylor(A, c):
    r = _lambda_sq(A, c) / c**2
    return TaylorSeries((1.0, 1.0, 0.5, r / 6 + 1 / 8, r / 6))


def n_exc_oat(c, t):
    return (c * np.asarray(t, dtype=float)) ** 2 / 4.0


def n_exc_tat(A, c, t):
    """Collective excitations of the linear fluctuation flow, unstable
    regime c > A, rate lambda = sqrt(A (c - A))."""
    if not c > A > 0:
        raise DomainError("unstable regime requires c > A > 0")
    lam = math.sqrt(_lambda_sq(A, c))
    return (A / lam + lam / A) ** 2 * np.sinh(lam * np.asarray(t, dtype=float)) ** 2 / 4.0


def instability_rate(A, c):
    if not c > A > 0:
        raise DomainError("unstable regime requires c > A > 0")
    return math.sqrt(_lambda_sq(A, c))


def t_c(N, A, c):
    """Time to build a macroscopic superposition in the unstable TAT regime."""
    lam = instability_rate(A, c)
    return math.log(N * lam * lam / (c * A)) / lam
