"""Fixed-step RK4 driver shared by the moment tiers.

Walks the drive's affine segments, picks a step per segment (finer inside
kick pulses) and hands each segment to a backend kernel.
"""
import math

import numpy as np

from .errors import DivergenceError, GridError, ParameterError

MIN_PULSE_SUBSTEPS = 10


def pulse_step(tau1, dt):
    """Step inside a pulse: tau1 / max(10, ceil(10*tau1/dt))."""
    n = max(MIN_PULSE_SUBSTEPS, math.ceil(10.0 * tau1 / dt - 1e-9))
    return tau1 / n


def default_grid(t_end, dt, t0=0.0):
    if t_end < t0:
        raise GridError("t_end precedes the start time")
    n = max(1, math.ceil((t_end - t0) / dt - 1e-9))
    return np.linspace(t0, t_end, n + 1)


def check_grid(times, t0):
    times = np.asarray(times, dtype=float)
    if times.ndim != 1 or times.size == 0:
        raise GridError("sample times must be a non-empty 1-d grid")
    if np.any(np.diff(times) < 0) or times[0] < t0:
        raise GridError("sample times must be nondecreasing and not precede t0")
    return times


def integrate_moments(rk4, y0, drive, c, sample_times, t0=0.0, dt=1e-2, label="state"):
    """Integrate ``y`` from ``t0`` and return its value at every sample.

    ``rk4(y, a0, rate, c, t_start, h, n)`` advances under a(t) = a0 + rate*t.
    Raises :class:`DivergenceError` as soon as a non-finite value appears.
    """
    if not dt > 0:
        raise ParameterError("dt must be positive")
    times = check_grid(sample_times, t0)
    y = np.array(y0, dtype=float)
    out = np.empty((times.size, y.size))
    h_pulse = pulse_step(drive.tau1, dt) if drive.kind == "kicked" else dt
    t = t0
    for i, ts in enumerate(times):
        for start, stop, a0, rate, in_pulse in drive.segments(t, ts):
            h = h_pulse if in_pulse else dt
            n = max(1, math.ceil((stop - start) / h - 1e-9))
            y = rk4(y, a0, rate, c, start, (stop - start) / n, n)
            if not np.all(np.isfinite(y)):
                raise DivergenceError(f"{label} became non-finite before t={stop:.6g}", t=stop)
        t = max(t, ts)
        out[i] = y
    return times, out
