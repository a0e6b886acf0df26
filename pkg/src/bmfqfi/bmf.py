"""Beyond-mean-field tier: nine scaled first and second moments.

State layout: ``(s_x, s_y, s_z, D_xz, D_yz, D_xy, D_xx, D_yy, D_zz)`` with
``s = 2<J>/N`` and ``D_lk = 4(<J_l J_k + J_k J_l> - 2<J_l><J_k>)/N^2``.
Third moments are factorised as Gaussian, which closes the hierarchy.
"""
import math
from dataclasses import dataclass

import numpy as np

from . import spin
from .errors import ParameterError
from ._integrate import default_grid, integrate_moments
from .kernels import bmf_rhs, get_backend

# (row, col) of each Delta entry in the state vector
DELTA_INDEX = {(0, 2): 3, (1, 2): 4, (0, 1): 5, (0, 0): 6, (1, 1): 7, (2, 2): 8}
FIELDS = ("s_x", "s_y", "s_z", "D_xz", "D_yz", "D_xy", "D_xx", "D_yy", "D_zz")


@dataclass(frozen=True, eq=False)
class BmfState:
    values: np.ndarray

    def __post_init__(self):
        v = np.asarray(self.values, dtype=float)
        if v.shape != (9,):
            raise ValueError("a BMF state has nine entries")
        object.__setattr__(self, "values", v)

    @property
    def s(self):
        return self.values[:3]

    def delta_matrix(self):
        return delta_matrix(self.values)


def delta_matrix(y):
    """Symmetric 3x3 Delta from a state vector or a stack of them."""
    y = np.asarray(y, dtype=float)
    d = np.empty(y.shape[:-1] + (3, 3))
    for (k, l), idx in DELTA_INDEX.items():
        d[..., k, l] = y[..., idx]
        d[..., l, k] = y[..., idx]
    return d


def bmf_from_moments(m):
    """Scale spin-core moments into BMF variables (works on stacks)."""
    N = m.N
    y = np.empty(m.first.shape[:-1] + (9,))
    y[..., :3] = 2.0 * m.first / N
    cov = 2.0 * m.second - 2.0 * m.first[..., :, None] * m.first[..., None, :]
    for (k, l), idx in DELTA_INDEX.items():
        y[..., idx] = 4.0 * cov[..., k, l] / N**2
    return y


def bmf_initial(N, theta, phi):
    """Coherent state along (sin t cos p, sin t sin p, cos t).

    Its covariance is (N/4)(1 - n n^T), so Delta = (2/N)(1 - n n^T).
    """
    N = spin._check_N(N)
    if not 0.0 <= theta <= math.pi:
        raise ParameterError(f"theta must lie in [0, pi], got {theta}")
    n = np.array(
        [math.sin(theta) * math.cos(phi), math.sin(theta) * math.sin(phi), math.cos(theta)]
    )
    d = (2.0 / N) * (np.eye(3) - np.outer(n, n))
    y = np.empty(9)
    y[:3] = n
    for (k, l), idx in DELTA_INDEX.items():
        y[idx] = d[k, l]
    return BmfState(y)


def bmf_derivative(state, a_value, c, N=None):
    """Right-hand side of the moment equations. ``N`` enters only through
    the initial data, so it is accepted for symmetry and ignored."""
    y = state.values if isinstance(state, BmfState) else np.asarray(state, dtype=float)
    out = np.empty(9)
    bmf_rhs(y, float(a_value), float(c), out)
    return out


def covariance_b(state, N):
    """Lambda_B = N^2 Delta / 8."""
    y = state.values if isinstance(state, BmfState) else state
    return N**2 / 8.0 * delta_matrix(y)


def f_b(state, N):
    return 4.0 * spin.max_eig_sym3(covariance_b(state, N))


@dataclass(frozen=True, eq=False)
class BmfTrajectory:
    N: int
    times: np.ndarray
    states: np.ndarray  # (n, 9)

    def covariance(self):
        return covariance_b(self.states, self.N)

    def f_b(self):
        return f_b(self.states, self.N)

    def s_norm_sq(self):
        return np.sum(self.states[:, :3] ** 2, axis=1)

    def columns(self):
        return {"t": self.times, **{k: self.states[:, i] for i, k in enumerate(FIELDS)},
                "F_B": self.f_b()}


def integrate_bmf(init, params, t_end=None, dt=1e-2, sample_times=None, t0=0.0, backend=None):
    """RK4 trajectory of the nine moments under ``params.drive``.

    Samples every ``dt`` up to ``t_end`` unless ``sample_times`` is given.
    Interaction sign is folded into c. Raises :class:`DivergenceError`
    with the time at which the state stopped being finite.
    """
    if sample_times is None:
        if t_end is None:
            raise ParameterError("give t_end or sample_times")
        sample_times = default_grid(t_end, dt, t0)
    y0 = init.values if isinstance(init, BmfState) else np.asarray(init, dtype=float)
    backend = backend or get_backend()
    times, ys = integrate_moments(
        backend.bmf_rk4, y0, params.drive, params.c_eff, sample_times, t0, dt, "BMF state"
    )
    return BmfTrajectory(params.N, times, ys)
