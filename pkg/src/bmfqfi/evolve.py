"""Exact propagation of Dicke-basis states.

Time-independent pieces are exponentiated through the eigendecomposition
of the real symmetric tridiagonal Hamiltonian; linear ramps are integrated
with RK4 on tridiagonal matrix-vector products.
"""
import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from scipy.linalg import eigh_tridiagonal

from . import spin
from .errors import DimensionError, GridError, ParameterError, StepSizeError
from .kernels import get_backend


def jx_offdiag(N):
    return 0.5 * spin.jplus_coeffs(N)


def jz2_diag(N, c, sign=1):
    return sign * (c / N) * spin.mu_values(N) ** 2


@dataclass(frozen=True, eq=False)
class TridiagonalHamiltonian:
    diag: np.ndarray
    offdiag: np.ndarray

    @property
    def dim(self):
        return self.diag.shape[0]

    def dense(self):
        return np.diag(self.diag) + np.diag(self.offdiag, 1) + np.diag(self.offdiag, -1)

    def apply(self, psi):
        out = self.diag * psi
        out[..., 1:] += self.offdiag * psi[..., :-1]
        out[..., :-1] += self.offdiag * psi[..., 1:]
        return out

    def expectation(self, psi):
        return np.real(np.sum(np.conj(psi) * self.apply(psi), axis=-1))


def build_hamiltonian(params, a_value):
    """a J_x + sign (c/N) J_z^2 in the Dicke basis."""
    N = params.N
    return TridiagonalHamiltonian(
        jz2_diag(N, params.c, params.interaction_sign), a_value * jx_offdiag(N)
    )


@dataclass(frozen=True, eq=False)
class Propagator:
    eigenvalues: np.ndarray
    eigenvectors: np.ndarray
    built_for: tuple = ()

    @property
    def dim(self):
        return self.eigenvalues.shape[0]

    def apply(self, psi, t):
        psi = np.asarray(psi, dtype=complex)
        if psi.shape[-1] != self.dim:
            raise DimensionError(f"state has {psi.shape[-1]} amplitudes, propagator {self.dim}")
        v = self.eigenvectors
        return v @ (np.exp(-1j * self.eigenvalues * t) * (v.T @ psi))

    def apply_many(self, psi, times):
        """States at each of ``times`` (shape ``(len(times), dim)``)."""
        v = self.eigenvectors
        coeff = v.T @ np.asarray(psi, dtype=complex)
        phases = np.exp(-1j * np.outer(times, self.eigenvalues))
        return (phases * coeff) @ v.T


def make_propagator(h, built_for=()):
    w, v = eigh_tridiagonal(h.diag, h.offdiag)
    return Propagator(w, v, built_for)


@lru_cache(maxsize=64)
def cached_propagator(N, c, sign, a_value):
    params = spin.ModelParams(N, c, interaction_sign=sign)
    return make_propagator(build_hamiltonian(params, a_value), (a_value, c, N, sign))


@lru_cache(maxsize=64)
def jx_propagator(N):
    """Eigendecomposition of J_x alone (a fixed Wigner rotation structure)."""
    return make_propagator(TridiagonalHamiltonian(np.zeros(N + 1), jx_offdiag(N)), (1.0, 0.0, N, 1))


def propagate_const(psi, prop, t):
    return prop.apply(psi, t)


def _free_phases(params, duration):
    return np.exp(-1j * jz2_diag(params.N, params.c, params.interaction_sign) * duration)


def _require_kicked(params):
    if params.drive.kind != "kicked":
        raise ParameterError("a kicked drive is required")


def floquet_step_rect(psi, params):
    """One period of the rectangular-pulse drive: pulse then free twisting."""
    _require_kicked(params)
    d = params.drive
    prop = cached_propagator(params.N, params.c, params.interaction_sign, d.pulse_height)
    return _free_phases(params, d.tau0) * prop.apply(psi, d.tau1)


def floquet_step_delta(psi, params):
    """One period of the delta-kick limit: rotation A*T about x, then twisting over T."""
    _require_kicked(params)
    d = params.drive
    rot = jx_propagator(params.N)
    return _free_phases(params, d.T) * rot.apply(psi, d.A * d.T)


def _ramp_steps(duration, dt):
    n = max(1, math.ceil(duration / dt - 1e-9))
    return n, duration / n


def _evolve_ramp_between(psi, params, t0, t1, dt, backend, max_drift):
    if t1 - t0 <= 0:
        return psi
    n, h = _ramp_steps(t1 - t0, dt)
    diag = jz2_diag(params.N, params.c, params.interaction_sign)
    off = jx_offdiag(params.N)
    psi, drift = backend.ramp_rk4(psi, diag, off, 0.0, params.drive.v, t0, h, n)
    if drift > max_drift:
        raise StepSizeError(
            f"RK4 norm drift {drift:.3g} exceeds {max_drift:g} before t={t1:.6g}; reduce dt",
            t=t1,
            drift=drift,
        )
    return psi


def evolve_ramp(psi, params, t_end, dt=1e-2, sample_times=None, max_drift=1e-6):
    """Integrate i dpsi/dt = (v t J_x + sign (c/N) J_z^2) psi from t=0.

    Returns ``(times, states)``; by default samples every step. The state is
    renormalised after each step; a pre-renormalisation drift above
    ``max_drift`` raises :class:`StepSizeError`.
    """
    if params.drive.kind != "ramp":
        raise ParameterError("evolve_ramp needs a ramp drive")
    if not dt > 0:
        raise ParameterError("dt must be positive")
    if sample_times is None:
        n = max(1, math.ceil(t_end / dt - 1e-9))
        sample_times = np.linspace(0.0, t_end, n + 1)
    times = np.asarray(sample_times, dtype=float)
    return times, evolve_states(params, psi, times, dt=dt, max_drift=max_drift)


def evolve_states(params, psi0, sample_times, t0=0.0, dt=1e-2, max_drift=1e-6, backend=None):
    """Exact states at every sample time for any drive kind.

    ``psi0`` is the state at ``t0``; ``sample_times`` must be nondecreasing
    and start at or after ``t0``. ``dt`` only matters for ramps.
    """
    times = np.asarray(sample_times, dtype=float)
    if times.ndim != 1 or np.any(np.diff(times) < 0) or (times.size and times[0] < t0):
        raise GridError("sample times must be nondecreasing and not precede t0")
    psi = np.asarray(psi0, dtype=complex).copy()
    if psi.shape[-1] != params.N + 1:
        raise DimensionError(f"state has {psi.shape[-1]} amplitudes, expected {params.N + 1}")
    drive = params.drive
    N, c, sign = params.N, params.c, params.interaction_sign
    out = np.empty((times.size, N + 1), dtype=complex)
    if drive.kind in ("off", "constant"):
        prop = cached_propagator(N, c, sign, drive.A if drive.kind == "constant" else 0.0)
        if drive.kind == "off":
            out[:] = np.exp(-1j * np.outer(times - t0, jz2_diag(N, c, sign))) * psi
        else:
            out[:] = prop.apply_many(psi, times - t0)
        return out
    backend = backend or get_backend()
    t = t0
    if drive.kind == "ramp":
        for i, ts in enumerate(times):
            psi = _evolve_ramp_between(psi, params, t, ts, dt, backend, max_drift)
            t = ts
            out[i] = psi
        return out
    pulse = cached_propagator(N, c, sign, drive.pulse_height)
    diag = jz2_diag(N, c, sign)
    for i, ts in enumerate(times):
        for start, stop, _, _, in_pulse in drive.segments(t, ts):
            if in_pulse:
                psi = pulse.apply(psi, stop - start)
            else:
                psi = np.exp(-1j * diag * (stop - start)) * psi
        t = ts
        out[i] = psi
    return out


def qfi_series(states):
    return spin.qfi(spin.covariance_q(spin.spin_moments(states)))


def qfi_trajectory(params, psi0, sample_times, dt=1e-2):
    """(times, F_Q) along the exact evolution from ``psi0`` at t=0."""
    times = np.asarray(sample_times, dtype=float)
    return times, qfi_series(evolve_states(params, psi0, times, dt=dt))
