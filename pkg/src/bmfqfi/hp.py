"""Holstein-Primakoff tier: Gaussian fluctuations (q, p) around the x pole.

The linear flow dq/dt = -a p, dp/dt = (a - c) q closes on the second
moments ``(qq, pp, qp)``.
"""
import warnings
from dataclasses import dataclass

import numpy as np

from ._integrate import default_grid, integrate_moments
from .errors import DomainError, ParameterError
from .kernels import get_backend, hp_rhs

VALIDITY_FRACTION = 0.1


class HpValidityWarning(UserWarning):
    """n_exc exceeded N/10; the fixed spin length assumption is failing."""


@dataclass(frozen=True)
class HpMoments:
    qq: float = 0.5
    pp: float = 0.5
    qp: float = 0.0

    def as_array(self):
        return np.array([self.qq, self.pp, self.qp])

    @property
    def symplectic(self):
        return self.qq * self.pp - self.qp**2


def hp_derivative(m, a_value, c):
    y = m.as_array() if isinstance(m, HpMoments) else np.asarray(m, dtype=float)
    out = np.empty(3)
    hp_rhs(y, float(a_value), float(c), out)
    return HpMoments(*out) if isinstance(m, HpMoments) else out


def n_exc(m):
    if isinstance(m, HpMoments):
        return (m.qq + m.pp - 1.0) / 2.0
    m = np.asarray(m, dtype=float)
    return (m[..., 0] + m[..., 1] - 1.0) / 2.0


def f_hp(n, N):
    """F_HP = N (1 + 2n + 2 sqrt(n(n+1)))."""
    n = np.asarray(n, dtype=float)
    if np.any(n < 0):
        # roundoff below zero is harmless; anything larger is a caller error
        if np.any(n < -1e-12):
            raise DomainError("excitation number must be nonnegative")
        n = np.maximum(n, 0.0)
    out = N * (1.0 + 2.0 * n + 2.0 * np.sqrt(n) * np.sqrt(n + 1.0))
    return float(out) if out.ndim == 0 else out


@dataclass(frozen=True, eq=False)
class HpTrajectory:
    N: int
    times: np.ndarray
    moments: np.ndarray  # (n, 3): qq, pp, qp

    def n_exc(self):
        return n_exc(self.moments)

    def f_hp(self):
        return f_hp(np.maximum(self.n_exc(), 0.0), self.N)

    def valid(self):
        """False once n_exc exceeds N/10."""
        return self.n_exc() <= VALIDITY_FRACTION * self.N

    def symplectic(self):
        m = self.moments
        return m[:, 0] * m[:, 1] - m[:, 2] ** 2

    def columns(self):
        m = self.moments
        return {"t": self.times, "qq": m[:, 0], "pp": m[:, 1], "qp": m[:, 2],
                "n_exc": self.n_exc(), "F_HP": self.f_hp(), "hp_valid": self.valid().astype(int)}


def integrate_hp(init, params, t_end=None, dt=1e-2, sample_times=None, t0=0.0, backend=None,
                 warn=True):
    """RK4 trajectory of (qq, pp, qp). Overflow raises DivergenceError;
    mere exponential growth does not. A warning is emitted once n_exc
    passes N/10."""
    if sample_times is None:
        if t_end is None:
            raise ParameterError("give t_end or sample_times")
        sample_times = default_grid(t_end, dt, t0)
    y0 = init.as_array() if isinstance(init, HpMoments) else np.asarray(init, dtype=float)
    backend = backend or get_backend()
    with np.errstate(over="ignore", invalid="ignore"):
        times, ys = integrate_moments(
            backend.hp_rk4, y0, params.drive, params.c_eff, sample_times, t0, dt, "HP moments"
        )
    traj = HpTrajectory(params.N, times, ys)
    if warn and not np.all(traj.valid()):
        first = times[np.argmin(traj.valid())]
        warnings.warn(
            f"n_exc exceeds N/10 from t={first:.6g}; HP results past this are unreliable",
            HpValidityWarning,
            stacklevel=2,
        )
    return traj

