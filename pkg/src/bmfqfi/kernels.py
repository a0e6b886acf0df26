"""Hot inner loops: fixed-step RK4 for the moment tiers, the classical
kicked map, Benettin renormalisation, and the tridiagonal Schrodinger stepper.

Each kernel exists as plain numpy-on-arrays Python. When numba is available
(and not disabled via ``BMFQFI_NO_NUMBA``) the same source is compiled with
``njit``; the tridiagonal stepper additionally has an explicit-loop variant
for numba and a vectorised variant for numpy.

All drives reaching a kernel are affine in time: ``a(t) = a0 + rate * t``.
"""
from functools import lru_cache
from types import SimpleNamespace

import numpy as np

from . import _backend

# ---------------------------------------------------------------------------
# right-hand sides (write into ``out``)
# ---------------------------------------------------------------------------


def bmf_rhs(y, a, c, out):
    sx = y[0]
    sy = y[1]
    sz = y[2]
    dxz = y[3]
    dyz = y[4]
    dxy = y[5]
    dxx = y[6]
    dyy = y[7]
    dzz = y[8]
    csx_a = c * sx - a
    out[0] = -c * sz * sy - 0.5 * c * dyz
    out[1] = c * sz * sx - a * sz + 0.5 * c * dxz
    out[2] = a * sy
    out[3] = -c * sz * dyz + a * dxy - c * sy * dzz
    out[4] = c * sz * dxz + a * dyy + csx_a * dzz
    out[5] = csx_a * dxz - c * sy * dyz + c * sz * dxx - c * sz * dyy
    out[6] = -2.0 * c * sy * dxz - 2.0 * c * sz * dxy
    out[7] = 2.0 * csx_a * dyz + 2.0 * c * sz * dxy
    out[8] = 2.0 * a * dyz


def hp_rhs(y, a, c, out):
    qq = y[0]
    pp = y[1]
    qp = y[2]
    out[0] = -2.0 * a * qp
    out[1] = 2.0 * (a - c) * qp
    out[2] = -a * pp + (a - c) * qq


def mf_rhs(y, a, c, out):
    sx = y[0]
    sy = y[1]
    sz = y[2]
    out[0] = -c * sz * sy
    out[1] = c * sz * sx - a * sz
    out[2] = a * sy


def make_rk4(rhs):
    def rk4(y0, a0, rate, c, t0, dt, n_steps):
        y = y0.copy()
        k1 = np.empty_like(y)
        k2 = np.empty_like(y)
        k3 = np.empty_like(y)
        k4 = np.empty_like(y)
        half = 0.5 * dt
        for step in range(n_steps):
            t = t0 + step * dt
            a_lo = a0 + rate * t
            a_mid = a0 + rate * (t + half)
            a_hi = a0 + rate * (t + dt)
            rhs(y, a_lo, c, k1)
            rhs(y + half * k1, a_mid, c, k2)
            rhs(y + half * k2, a_mid, c, k3)
            rhs(y + dt * k3, a_hi, c, k4)
            y = y + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
        return y

    return rk4


# ---------------------------------------------------------------------------
# classical kicked map
# ---------------------------------------------------------------------------


def make_mf_period(mf_rk4):
    def mf_period(s, A, c, tau0, tau1, n_sub):
        # rectangular pulse of height A*T/tau1, then exact free precession
        period = tau0 + tau1
        s = mf_rk4(s, A * period / tau1, 0.0, c, 0.0, tau1 / n_sub, n_sub)
        angle = c * s[2] * tau0
        ca = np.cos(angle)
        sa = np.sin(angle)
        out = np.empty(3)
        out[0] = ca * s[0] - sa * s[1]
        out[1] = sa * s[0] + ca * s[1]
        out[2] = s[2]
        return out

    return mf_period


def make_mf_strobe(mf_period):
    def mf_strobe(s0, A, c, tau0, tau1, n_sub, n_periods):
        out = np.empty((n_periods + 1, 3))
        s = s0.copy()
        out[0] = s
        for n in range(n_periods):
            s = mf_period(s, A, c, tau0, tau1, n_sub)
            out[n + 1] = s
        return out

    return mf_strobe


def make_mf_benettin(mf_period):
    def mf_benettin(s0, direction, A, c, tau0, tau1, n_sub, m, delta0):
        ref = s0.copy()
        comp = ref + delta0 * direction
        comp = comp / np.sqrt(np.sum(comp * comp))
        total = 0.0
        for n in range(m):
            ref = mf_period(ref, A, c, tau0, tau1, n_sub)
            comp = mf_period(comp, A, c, tau0, tau1, n_sub)
            diff = comp - ref
            dist = np.sqrt(np.sum(diff * diff))
            total += np.log(dist / delta0)
            comp = ref + (delta0 / dist) * diff
            comp = comp / np.sqrt(np.sum(comp * comp))
        return total

    return mf_benettin


def make_mf_separation(mf_period):
    def mf_separation(s0, direction, A, c, tau0, tau1, n_sub, n_periods, delta0):
        # unrenormalised companion; returns the largest separation reached
        ref = s0.copy()
        comp = ref + delta0 * direction
        comp = comp / np.sqrt(np.sum(comp * comp))
        worst = 0.0
        for n in range(n_periods):
            ref = mf_period(ref, A, c, tau0, tau1, n_sub)
            comp = mf_period(comp, A, c, tau0, tau1, n_sub)
            diff = comp - ref
            dist = np.sqrt(np.sum(diff * diff))
            if dist > worst:
                worst = dist
        return worst

    return mf_separation


# ---------------------------------------------------------------------------
# tridiagonal Schrodinger stepper: H(t) = a(t) * X + diag(d)
# X has zero diagonal and off-diagonal ``off``.
# ---------------------------------------------------------------------------


def _apply_loop(psi, diag, off, a, out):
    n = psi.shape[0]
    for k in range(n):
        v = diag[k] * psi[k]
        if k > 0:
            v += a * off[k - 1] * psi[k - 1]
        if k < n - 1:
            v += a * off[k] * psi[k + 1]
        out[k] = v


def _apply_vec(psi, diag, off, a, out):
    out[:] = diag * psi
    out[1:] += a * off * psi[:-1]
    out[:-1] += a * off * psi[1:]


def make_ramp_rk4(apply):
    def ramp_rk4(psi0, diag, off, a0, rate, t0, dt, n_steps):
        # RK4 on H - <H> (a global-phase gauge), renormalised every step
        psi = psi0.copy()
        h = np.empty_like(psi)
        k1 = np.empty_like(psi)
        k2 = np.empty_like(psi)
        k3 = np.empty_like(psi)
        k4 = np.empty_like(psi)
        half = 0.5 * dt
        max_drift = 0.0
        for step in range(n_steps):
            t = t0 + step * dt
            a_lo = a0 + rate * t
            a_mid = a0 + rate * (t + half)
            a_hi = a0 + rate * (t + dt)
            apply(psi, diag, off, a_lo, h)
            e = np.real(np.vdot(psi, h))
            k1[:] = -1j * (h - e * psi)
            y = psi + half * k1
            apply(y, diag, off, a_mid, h)
            k2[:] = -1j * (h - e * y)
            y = psi + half * k2
            apply(y, diag, off, a_mid, h)
            k3[:] = -1j * (h - e * y)
            y = psi + dt * k3
            apply(y, diag, off, a_hi, h)
            k4[:] = -1j * (h - e * y)
            psi = psi + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
            nrm = np.sqrt(np.real(np.vdot(psi, psi)))
            drift = abs(nrm - 1.0)
            if drift > max_drift:
                max_drift = drift
            psi = psi / nrm
        return psi, max_drift

    return ramp_rk4


def tridiag_apply_vec(psi, diag, off, a):
    out = np.empty_like(psi)
    _apply_vec(psi, diag, off, a, out)
    return out


# ---------------------------------------------------------------------------
# backends
# ---------------------------------------------------------------------------


def _assemble(jit, apply):
    bmf = jit(bmf_rhs)
    hp = jit(hp_rhs)
    mf = jit(mf_rhs)
    mf_rk4 = jit(make_rk4(mf))
    mf_period = jit(make_mf_period(mf_rk4))
    apply = jit(apply)

    def tridiag_apply(psi, diag, off, a):
        out = np.empty_like(psi)
        apply(psi, diag, off, a, out)
        return out

    return SimpleNamespace(
        bmf_rk4=jit(make_rk4(bmf)),
        hp_rk4=jit(make_rk4(hp)),
        mf_rk4=mf_rk4,
        mf_period=mf_period,
        mf_strobe=jit(make_mf_strobe(mf_period)),
        mf_benettin=jit(make_mf_benettin(mf_period)),
        mf_separation=jit(make_mf_separation(mf_period)),
        ramp_rk4=jit(make_ramp_rk4(apply)),
        tridiag_apply=jit(tridiag_apply),
    )


@lru_cache(maxsize=None)
def numpy_backend():
    ns = _assemble(lambda f: f, _apply_vec)
    ns.name = "numpy"
    return ns


@lru_cache(maxsize=None)
def numba_backend():
    if not _backend.HAVE_NUMBA:
        raise RuntimeError("numba is not installed")
    import numba

    ns = _assemble(numba.njit(nogil=True), _apply_loop)
    ns.name = "numba"
    return ns


def get_backend(name=None):
    """Return the kernel namespace ``name`` ('numba' or 'numpy'), or the
    active one when ``name`` is None."""
    if name is None:
        name = "numba" if _backend.USE_NUMBA else "numpy"
    if name == "numba":
        return numba_backend()
    if name == "numpy":
        return numpy_backend()
    raise ValueError(f"unknown backend {name!r}")
