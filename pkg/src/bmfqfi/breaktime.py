"""Break times of the approximate tiers and their scaling with N.

A break time is the first moment the relative QFI gap
|F_exact - F_approx| / F_exact reaches a threshold g.
"""
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, replace

import numpy as np

from . import bmf, evolve, hp, spin
from .chaos import resolve_threads
from .errors import FitError, GridError, ParameterError

REGIMES = ("stable", "saddle", "chaotic")
TIERS = ("BMF", "HP", "both")
MODELS = {
    "sqrtN": np.sqrt,
    "logN": np.log,
    "log4N": lambda n: np.log(n) ** 4,
}


def t_break(times, f_exact, f_approx, g=0.01):
    """First time the relative gap reaches ``g``, linearly interpolated.

    Returns ``inf`` when the gap never reaches ``g`` on the series.
    """
    times = np.asarray(times, dtype=float)
    fe = np.asarray(f_exact, dtype=float)
    fa = np.asarray(f_approx, dtype=float)
    if not (times.shape == fe.shape == fa.shape) or times.ndim != 1:
        raise GridError("exact and approximate series must share one 1-d grid")
    if np.any(np.diff(times) < 0):
        raise GridError("time grid must be nondecreasing")
    if not g > 0:
        raise ParameterError("g must be positive")
    with np.errstate(divide="ignore", invalid="ignore"):
        gap = np.abs(fe - fa) / fe
    # a non-finite approximation counts as broken
    gap = np.where(np.isfinite(gap), gap, np.inf)
    hit = np.flatnonzero(gap >= g)
    if hit.size == 0:
        return math.inf
    i = hit[0]
    if i == 0:
        return float(times[0])
    g0, g1 = gap[i - 1], gap[i]
    if not np.isfinite(g1):
        return float(times[i])
    return float(times[i - 1] + (g - g0) / (g1 - g0) * (times[i] - times[i - 1]))


@dataclass(frozen=True)
class BreakTimeRecord:
    N: int
    A: float
    c: float
    regime: str
    t_IB: float
    t_HP: float
    g: float
    drive: str = "kicked"


def _chunks(t_max, dt, first=5.0):
    """Consecutive sample grids of doubling length covering (0, t_max]."""
    start, length = 0.0, first
    while start < t_max - 1e-12:
        stop = min(start + length, t_max)
        n = max(1, math.ceil((stop - start) / dt - 1e-9))
        yield np.linspace(start, stop, n + 1)[1:]
        start, length = stop, 2 * length


def break_times(params, g=0.01, tier="BMF", dt=1e-2, t_max=100.0, backend=None):
    """(t_IB, t_HP) for the x-polarised coherent state under ``params``.

    Evolves the exact and approximate tiers on a shared grid in growing
    chunks and stops once every requested break time has been found.
    Tiers not requested come back as nan.
    """
    if tier not in TIERS:
        raise ParameterError(f"tier must be one of {TIERS}")
    N = params.N
    want_b = tier in ("BMF", "both")
    want_h = tier in ("HP", "both")
    psi = spin.coherent_state(N, math.pi / 2, 0.0)
    yb = bmf.bmf_initial(N, math.pi / 2, 0.0).values
    yh = hp.HpMoments().as_array()
    times, fq, fb, fh = [0.0], [float(N)], [float(N)], [float(N)]
    t_ib = t_hp = math.inf
    t = 0.0
    for grid in _chunks(t_max, dt):
        states = evolve.evolve_states(params, psi, grid, t0=t, dt=dt, backend=backend)
        psi = states[-1]
        fq.extend(evolve.qfi_series(states))
        if want_b:
            tr = bmf.integrate_bmf(yb, params, sample_times=grid, t0=t, dt=dt, backend=backend)
            yb = tr.states[-1]
            fb.extend(tr.f_b())
        if want_h:
            th = hp.integrate_hp(yh, params, sample_times=grid, t0=t, dt=dt, backend=backend,
                                 warn=False)
            yh = th.moments[-1]
            fh.extend(th.f_hp())
        times.extend(grid)
        t = grid[-1]
        if want_b:
            t_ib = t_break(times, fq, fb, g)
        if want_h:
            t_hp = t_break(times, fq, fh, g)
        if (not want_b or math.isfinite(t_ib)) and (not want_h or math.isfinite(t_hp)):
            break
    return (t_ib if want_b else math.nan), (t_hp if want_h else math.nan)


def breaktime_scan(N_list, params, g=0.01, tier="BMF", regime="stable", dt=1e-2, t_max=100.0,
                   threads=None, backend=None):
    """One record per N (in input order); ``params`` supplies c and the drive,
    its N is replaced per point. Solver errors are re-raised tagged with N."""
    if regime not in REGIMES:
        raise ParameterError(f"regime must be one of {REGIMES}")
    N_list = [int(n) for n in N_list]
    if not N_list:
        raise ParameterError("N_list is empty")

    def run(N):
        p = replace(params, N=N)
        try:
            t_ib, t_hp = break_times(p, g, tier, dt, t_max, backend)
        except (ArithmeticError, ValueError) as exc:
            exc.args = (f"N={N}: {exc.args[0] if exc.args else exc}",) + exc.args[1:]
            raise
        return BreakTimeRecord(N, params.drive.A, params.c, regime, t_ib, t_hp, g,
                               params.drive.kind)

    with ThreadPoolExecutor(max_workers=resolve_threads(threads)) as pool:
        return list(pool.map(run, N_list))


@dataclass(frozen=True)
class ScalingFit:
    model: str
    alpha: float
    residual: float
    x_range: tuple
    n_points: int
    eta: float = math.nan
    gamma: float = math.nan
    correlation: float = math.nan


def scaling_fit(records, model, n_min=100, field="t_IB"):
    """Least-squares t = alpha * f(N) over records with N >= n_min.

    ``residual`` is the Euclidean norm of the misfit, so residuals of
    different models on the same records can be compared directly.
    """
    if model not in MODELS:
        raise FitError(f"model must be one of {sorted(MODELS)}")
    rows = sorted((r.N, getattr(r, field)) for r in records if r.N >= n_min)
    if len(rows) < 3:
        raise FitError(f"need at least 3 records with N >= {n_min}, got {len(rows)}")
    n = np.array([r[0] for r in rows], dtype=float)
    t = np.array([r[1] for r in rows], dtype=float)
    if not np.all(np.isfinite(t)):
        raise FitError(f"{field} is not finite for every record")
    if np.ptp(n) == 0:
        raise FitError("all records share one N")
    f = MODELS[model](n)
    alpha = float(np.dot(f, t) / np.dot(f, f))
    residual = float(np.linalg.norm(t - alpha * f))
    return ScalingFit(model, alpha, residual, (float(n.min()), float(n.max())), len(rows))


def compare_models(records, models=("sqrtN", "logN", "log4N"), n_min=100, field="t_IB"):
    """Fits for every model and the name of the smallest-residual one."""
    fits = {m: scaling_fit(records, m, n_min, field) for m in models}
    return fits, min(fits, key=lambda m: fits[m].residual)


def prefactor_lyapunov_fit(points):
    """Fit y = eta * exp(-gamma * lambda_L) by least squares on ln y.

    ``points`` is an iterable of (lambda_L, y). ``correlation`` is the
    magnitude of the Pearson coefficient of (lambda_L, ln y).
    """
    pts = sorted((float(l), float(y)) for l, y in points)
    if len(pts) < 3:
        raise FitError("need at least 3 points")
    lam = np.array([p[0] for p in pts])
    y = np.array([p[1] for p in pts])
    if np.any(y <= 0) or not np.all(np.isfinite(y)):
        raise FitError("prefactors must be positive and finite")
    if np.any(lam <= 0):
        raise FitError("Lyapunov exponents must be positive")
    if np.ptp(lam) == 0:
        raise FitError("all points share one Lyapunov exponent")
    ly = np.log(y)
    slope, intercept = np.polyfit(lam, ly, 1)
    resid = float(np.linalg.norm(ly - (intercept + slope * lam)))
    corr = float(abs(np.corrcoef(lam, ly)[0, 1])) if np.ptp(ly) > 0 else 1.0
    return ScalingFit("exp_lyapunov", math.nan, resid, (float(lam.min()), float(lam.max())),
                      len(pts), eta=float(math.exp(intercept)), gamma=float(-slope),
                      correlation=corr)
