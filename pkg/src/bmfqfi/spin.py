"""Collective-spin algebra in the Dicke basis.

A state of N two-mode bosons is a complex vector ``psi`` of length N+1;
index ``k`` holds the amplitude of the J_z eigenstate with
``mu = k - N/2``. Functions here accept a single state or a stack of
states with shape ``(..., N+1)``.
"""
import math
from dataclasses import dataclass, field

import numpy as np
from scipy.special import gammaln, xlogy

from .errors import DomainError, ParameterError

DRIVE_KINDS = ("off", "constant", "kicked", "ramp")


@dataclass(frozen=True)
class DriveProtocol:
    """Time dependence of the linear coupling a(t).

    ``kicked`` is a train of rectangular pulses of height ``A*T/tau1`` on
    ``[nT, nT + tau1]`` with period ``T = tau0 + tau1``; ``ramp`` is
    ``a(t) = v*t``; ``constant`` is ``a = A``.
    """

    kind: str = "off"
    A: float = 0.0
    tau0: float = 1.0
    tau1: float = 0.01
    v: float = 0.0

    def __post_init__(self):
        if self.kind not in DRIVE_KINDS:
            raise ParameterError(f"unknown drive kind {self.kind!r}")
        if self.kind == "kicked" and not (self.tau0 > 0 and self.tau1 > 0):
            raise ParameterError("kicked drive needs tau0 > 0 and tau1 > 0")
        if self.kind == "ramp" and not self.v > 0:
            raise ParameterError("ramp drive needs v > 0")

    @property
    def T(self):
        return self.tau0 + self.tau1

    @property
    def pulse_height(self):
        return self.A * self.T / self.tau1

    @classmethod
    def off(cls):
        return cls("off")

    @classmethod
    def constant(cls, A):
        return cls("constant", A=A)

    @classmethod
    def kicked(cls, A, tau0=1.0, tau1=0.01):
        return cls("kicked", A=A, tau0=tau0, tau1=tau1)

    @classmethod
    def ramp(cls, v):
        return cls("ramp", v=v)

    def a_at(self, t):
        if self.kind == "off":
            return 0.0
        if self.kind == "constant":
            return self.A
        if self.kind == "ramp":
            return self.v * t
        phase = t - math.floor(t / self.T) * self.T
        return self.pulse_height if phase < self.tau1 else 0.0

    def segments(self, t0, t1, eps=1e-12):
        """Split ``[t0, t1]`` into pieces on which ``a(t) = a0 + rate*t``.

        Yields ``(start, stop, a0, rate, in_pulse)``; pieces shorter than
        ``eps`` are dropped.
        """
        if t1 - t0 <= eps:
            return
        if self.kind == "off":
            yield t0, t1, 0.0, 0.0, False
        elif self.kind == "constant":
            yield t0, t1, self.A, 0.0, False
        elif self.kind == "ramp":
            yield t0, t1, 0.0, self.v, False
        else:
            T, tau1 = self.T, self.tau1
            n = math.floor(t0 / T + eps)
            while n * T < t1 - eps:
                for lo, hi, a, pulse in (
                    (n * T, n * T + tau1, self.pulse_height, True),
                    (n * T + tau1, (n + 1) * T, 0.0, False),
                ):
                    s, e = max(lo, t0), min(hi, t1)
                    if e - s > eps:
                        yield s, e, a, 0.0, pulse
                n += 1


@dataclass(frozen=True)
class ModelParams:
    """H(t) = a(t) J_x + sign * (c/N) J_z^2."""

    N: int
    c: float
    drive: DriveProtocol = field(default_factory=DriveProtocol)
    interaction_sign: int = 1

    def __post_init__(self):
        if int(self.N) != self.N or self.N < 1:
            raise ParameterError(f"N must be a positive integer, got {self.N!r}")
        if self.interaction_sign not in (1, -1):
            raise ParameterError("interaction_sign must be +1 or -1")

    @property
    def c_eff(self):
        return self.interaction_sign * self.c


def _check_N(N):
    if int(N) != N or N < 1:
        raise ParameterError(f"N must be a positive integer, got {N!r}")
    return int(N)


def mu_values(N):
    return np.arange(N + 1) - N / 2


def jplus_coeffs(N):
    """<mu+1|J_+|mu> for mu = -N/2 ... N/2 - 1."""
    j = N / 2
    mu = mu_values(N)[:-1]
    return np.sqrt((j - mu) * (j + mu + 1))


def coherent_state(N, theta, phi):
    """Coherent spin state with mean direction
    (sin t cos p, sin t sin p, cos t).

    Amplitudes are built in log space so that large N does not overflow.
    """
    N = _check_N(N)
    if not (0.0 <= theta <= math.pi):
        raise ParameterError(f"theta must lie in [0, pi], got {theta}")
    k = np.arange(N + 1)  # k = N/2 + mu
    logc = 0.5 * (gammaln(N + 1) - gammaln(k + 1) - gammaln(N - k + 1))
    logamp = logc + xlogy(k, math.cos(theta / 2)) + xlogy(N - k, math.sin(theta / 2))
    psi = np.exp(logamp) * np.exp(1j * (N - k) * phi)
    return psi / np.linalg.norm(psi)


def dicke_state(N, mu):
    N = _check_N(N)
    k = int(round(mu + N / 2))
    if not 0 <= k <= N or abs(k - (mu + N / 2)) > 1e-12:
        raise ParameterError(f"mu={mu} is not a Dicke label for N={N}")
    psi = np.zeros(N + 1, dtype=complex)
    psi[k] = 1.0
    return psi


def apply_jplus(psi, jp):
    out = np.zeros_like(psi)
    out[..., 1:] = jp * psi[..., :-1]
    return out


def apply_jminus(psi, jp):
    out = np.zeros_like(psi)
    out[..., :-1] = jp * psi[..., 1:]
    return out


def apply_spin_ops(psi):
    """Return (J_x psi, J_y psi, J_z psi) by O(N) tridiagonal products."""
    psi = np.asarray(psi, dtype=complex)
    N = psi.shape[-1] - 1
    jp = jplus_coeffs(N)
    up = apply_jplus(psi, jp)
    dn = apply_jminus(psi, jp)
    return 0.5 * (up + dn), -0.5j * (up - dn), mu_values(N) * psi


@dataclass(frozen=True, eq=False)
class SpinMoments:
    """First moments ``first[..., k]`` = <J_k> and symmetrised second
    moments ``second[..., k, l]`` = <J_k J_l + J_l J_k>/2, k,l in (x, y, z)."""

    N: int
    first: np.ndarray
    second: np.ndarray

    @property
    def variances(self):
        return np.diagonal(self.second, axis1=-2, axis2=-1) - self.first**2

    @property
    def casimir(self):
        return np.trace(self.second, axis1=-2, axis2=-1)


def spin_moments(psi, norm_tol=1e-8):
    psi = np.asarray(psi, dtype=complex)
    norm = np.sum(np.abs(psi) ** 2, axis=-1)
    if np.any(np.abs(norm - 1.0) > norm_tol):
        raise ParameterError("state is not normalised")
    ops = apply_spin_ops(psi)
    first = np.stack([np.real(np.sum(psi.conj() * u, axis=-1)) for u in ops], axis=-1)
    second = np.empty(psi.shape[:-1] + (3, 3))
    for k in range(3):
        for l in range(k, 3):
            g = np.real(np.sum(ops[k].conj() * ops[l], axis=-1))
            second[..., k, l] = g
            second[..., l, k] = g
    return SpinMoments(psi.shape[-1] - 1, first, second)


def covariance_q(m):
    """Lambda_Q = 2[(<JkJl> + <JlJk>) - 2<Jk><Jl>], symmetric by construction."""
    outer = m.first[..., :, None] * m.first[..., None, :]
    cov = 4.0 * (m.second - outer)
    return 0.5 * (cov + np.swapaxes(cov, -1, -2))


def max_eig_sym3(a):
    """Largest eigenvalue of real symmetric 3x3 matrices, closed form.

    Trigonometric solution of the characteristic cubic. That loses
    ~sqrt(eps) when the two largest eigenvalues nearly coincide; there the
    well-separated smallest eigenvector is taken from a cross product of
    rows of (A - l_min I) and the top pair is solved as an exact 2x2 block.
    Works on stacks ``(..., 3, 3)``.
    """
    a = np.asarray(a, dtype=float)
    a00, a11, a22 = a[..., 0, 0], a[..., 1, 1], a[..., 2, 2]
    a01, a02, a12 = a[..., 0, 1], a[..., 0, 2], a[..., 1, 2]
    q = (a00 + a11 + a22) / 3.0
    b00, b11, b22 = a00 - q, a11 - q, a22 - q
    p2 = (b00**2 + b11**2 + b22**2 + 2.0 * (a01**2 + a02**2 + a12**2)) / 6.0
    p = np.sqrt(p2)
    safe = np.where(p > 0, p, 1.0)
    det = (
        b00 * (b11 * b22 - a12 * a12)
        - a01 * (a01 * b22 - a12 * a02)
        + a02 * (a01 * a12 - b11 * a02)
    )
    r = np.clip(det / (2.0 * safe**3), -1.0, 1.0)
    phi = np.arccos(r) / 3.0
    top = q + 2.0 * p * np.cos(phi)
    close = (phi > np.pi / 6) & (p > 0)
    if not np.any(close):
        return top
    low = q + 2.0 * p * np.cos(phi + 2.0 * np.pi / 3.0)
    m = a - low[..., None, None] * np.eye(3)
    rows = m[..., 0, :], m[..., 1, :], m[..., 2, :]
    crosses = np.stack(
        [np.cross(rows[0], rows[1]), np.cross(rows[0], rows[2]), np.cross(rows[1], rows[2])],
        axis=-2,
    )
    norms = np.linalg.norm(crosses, axis=-1)
    pick = np.argmax(norms, axis=-1)
    v = np.take_along_axis(crosses, pick[..., None, None], axis=-2)[..., 0, :]
    v = v / np.where(norms.max(axis=-1) > 0, norms.max(axis=-1), 1.0)[..., None]
    # orthonormal complement of v
    axis = np.eye(3)[np.argmin(np.abs(v), axis=-1)]
    e1 = np.cross(v, axis)
    e1 = e1 / np.linalg.norm(e1, axis=-1)[..., None]
    e2 = np.cross(v, e1)
    ae1 = np.einsum("...ij,...j->...i", a, e1)
    ae2 = np.einsum("...ij,...j->...i", a, e2)
    d1 = np.sum(e1 * ae1, axis=-1)
    d2 = np.sum(e2 * ae2, axis=-1)
    off = np.sum(e1 * ae2, axis=-1)
    refined = 0.5 * (d1 + d2) + np.hypot(0.5 * (d1 - d2), off)
    return np.where(close, refined, top)


def qfi(cov):
    """QFI optimised over the x, y, z directions: max eigenvalue of Lambda_Q."""
    return max_eig_sym3(cov)


def qfi_of_state(psi):
    return qfi(covariance_q(spin_moments(psi)))


@dataclass(frozen=True)
class EntanglementDepth:
    k_plus_one: int
    s_floor: int
    r_rem: int


def producibility_bound(N, k):
    """Largest QFI reachable by k-producible states: s k^2 + r^2."""
    s = N // k
    r = N - s * k
    return s * k * k + r * r


def entanglement_depth(F, N, rtol=1e-9, margin=0.0):
    """Largest (k+1) such that F > s k^2 + r^2 witnesses (k+1)-partite
    entanglement; 1 when F <= N. Equality never witnesses.

    ``margin`` raises every bound by that relative amount, so rounding
    noise in a computed F cannot witness a spurious depth.
    """
    N = _check_N(N)
    if F < 0:
        raise DomainError(f"QFI must be nonnegative, got {F}")
    if F > N * N * (1.0 + rtol):
        raise DomainError(f"QFI {F} exceeds the Heisenberg bound N^2 = {N * N}")
    witnessed = 0
    for k in range(1, N):
        if F > producibility_bound(N, k) * (1.0 + margin):
            witnessed = k
    depth = witnessed + 1
    k = max(witnessed, 1)
    s = N // k
    return EntanglementDepth(depth, s, N - s * k)
