"""Classical mean-field tier on the Bloch sphere under the kicked drive.

Each period is a rectangular pulse (RK4 with many substeps, the pulse
height is large) followed by free twisting, which is solved exactly as a
precession of (s_x, s_y) about z at rate c*s_z.
"""
import math
import os
import warnings
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from .errors import IntegratorError, ParameterError
from .kernels import get_backend, mf_rhs

NORM_TOL = 1e-6
PULSE_SUBSTEPS = 200
THREADS_ENV = "BMFQFI_THREADS"


@dataclass(frozen=True)
class BlochVector:
    sx: float
    sy: float
    sz: float

    def as_array(self):
        return np.array([self.sx, self.sy, self.sz], dtype=float)

    @property
    def norm(self):
        return math.sqrt(self.sx**2 + self.sy**2 + self.sz**2)


@dataclass(frozen=True)
class LyapunovResult:
    lambda_L: float
    m: int
    delta0: float


@dataclass(frozen=True)
class PoincarePoint:
    phi: float
    s_z: float
    seed_id: int
    period_index: int


def _vec(s):
    return s.as_array() if isinstance(s, BlochVector) else np.asarray(s, dtype=float).copy()


def _kick_args(params):
    d = params.drive
    if d.kind != "kicked":
        raise ParameterError("the mean-field map needs a kicked drive")
    return d.A, params.c_eff, d.tau0, d.tau1


def mf_derivative(s, a_value, c):
    out = np.empty(3)
    mf_rhs(_vec(s), float(a_value), float(c), out)
    return out


def resolve_threads(threads=None):
    """Explicit value, else $BMFQFI_THREADS, else the CPU count."""
    if threads is None:
        env = os.environ.get(THREADS_ENV, "").strip()
        threads = int(env) if env else (os.cpu_count() or 1)
    if threads < 1:
        raise ParameterError("thread count must be at least 1")
    return threads


def integrate_mf(s0, params, n_periods, n_sub=PULSE_SUBSTEPS, backend=None):
    """Stroboscopic trajectory s(nT), n = 0..n_periods, shape (n+1, 3).

    The flow conserves |s|; drift beyond 1e-6 raises IntegratorError.
    """
    if n_periods < 0 or n_sub < 1:
        raise ParameterError("n_periods must be >= 0 and n_sub >= 1")
    A, c, tau0, tau1 = _kick_args(params)
    s = _vec(s0)
    backend = backend or get_backend()
    traj = backend.mf_strobe(s, A, c, tau0, tau1, int(n_sub), int(n_periods))
    norms = np.sqrt(np.sum(traj**2, axis=1))
    drift = np.max(np.abs(norms - norms[0]))
    if not drift <= NORM_TOL:
        raise IntegratorError(f"Bloch-vector norm drifted by {drift:.3g}; raise n_sub")
    return traj


def _on_sphere(s0):
    s = _vec(s0)
    r = np.linalg.norm(s)
    if r == 0:
        raise ParameterError("initial Bloch vector is zero")
    if abs(r - 1.0) > 1e-9:
        warnings.warn(f"initial Bloch vector has norm {r:.6g}; projected onto the sphere",
                      stacklevel=3)
        s = s / r
    return s


def perturbation_direction(s):
    """Unit tangent direction for the companion trajectory.

    Prefers the x axis projected onto the tangent plane. At the x poles
    that projection vanishes (an s_x offset is purely radial), so the
    tangent projection of (1, 1, 1) is used instead.
    """
    for trial in (np.array([1.0, 0.0, 0.0]), np.array([1.0, 1.0, 1.0])):
        t = trial - np.dot(trial, s) * s
        n = np.linalg.norm(t)
        if n > 1e-3:
            return t / n
    return np.array([0.0, 0.0, 1.0])


def lyapunov(params, s0=(1.0, 0.0, 0.0), m=500, delta0=1e-5, n_sub=PULSE_SUBSTEPS,
             backend=None):
    """Largest Lyapunov exponent per unit time from two-trajectory Benettin
    renormalisation after every period."""
    if m < 1:
        raise ParameterError("m must be >= 1")
    if not delta0 > 0:
        raise ParameterError("delta0 must be positive")
    A, c, tau0, tau1 = _kick_args(params)
    s = _on_sphere(s0)
    direction = perturbation_direction(s)
    backend = backend or get_backend()
    total = backend.mf_benettin(s, direction, A, c, tau0, tau1, int(n_sub), int(m), float(delta0))
    return LyapunovResult(total / (m * (tau0 + tau1)), int(m), float(delta0))


def lyapunov_map(A_grid, c_grid, s0=(1.0, 0.0, 0.0), m=500, delta0=1e-5, tau0=1.0, tau1=0.01,
                 threads=None, n_sub=PULSE_SUBSTEPS, backend=None):
    """lambda_L on the A x c grid, shape (len(A_grid), len(c_grid)).

    Cells run on a thread pool (the compiled kernels release the GIL);
    every cell is deterministic so the result does not depend on threads.
    """
    from .spin import DriveProtocol, ModelParams

    A_grid = np.asarray(A_grid, dtype=float)
    c_grid = np.asarray(c_grid, dtype=float)
    if A_grid.size == 0 or c_grid.size == 0:
        raise ParameterError("grids must be non-empty")
    backend = backend or get_backend()

    def cell(ij):
        i, j = ij
        p = ModelParams(1, c_grid[j], DriveProtocol.kicked(A_grid[i], tau0, tau1))
        return lyapunov(p, s0, m, delta0, n_sub, backend).lambda_L

    cells = [(i, j) for i in range(A_grid.size) for j in range(c_grid.size)]
    with ThreadPoolExecutor(max_workers=resolve_threads(threads)) as pool:
        values = list(pool.map(cell, cells))
    return np.array(values).reshape(A_grid.size, c_grid.size)


def seed_grid(n_phi=20, n_sz=20):
    """Uniform (phi, s_z) seeds, cell-centred so no seed sits on a pole."""
    phis = -math.pi + (np.arange(n_phi) + 0.5) * 2 * math.pi / n_phi
    szs = -1.0 + (np.arange(n_sz) + 0.5) * 2.0 / n_sz
    seeds = []
    for sz in szs:
        r = math.sqrt(1.0 - sz * sz)
        for ph in phis:
            seeds.append(BlochVector(r * math.cos(ph), r * math.sin(ph), sz))
    return seeds


def poincare_section(params, seeds=None, n_periods=200, n_sub=PULSE_SUBSTEPS, threads=None,
                     backend=None):
    """Stroboscopic (phi, s_z) points of every seed, seed-major order."""
    seeds = seed_grid() if seeds is None else list(seeds)
    backend = backend or get_backend()

    def run(seed):
        return integrate_mf(seed, params, n_periods, n_sub, backend)

    with ThreadPoolExecutor(max_workers=resolve_threads(threads)) as pool:
        trajs = list(pool.map(run, seeds))
    points = []
    for sid, traj in enumerate(trajs):
        phis = np.arctan2(traj[:, 1], traj[:, 0])
        for n in range(traj.shape[0]):
            points.append(PoincarePoint(float(phis[n]), float(traj[n, 2]), sid, n))
    return points


def bounded_fraction(params, seeds=None, n_periods=200, delta0=1e-7, threshold=1e-2,
                     n_sub=PULSE_SUBSTEPS, backend=None):
    """Share of seeds whose neighbourhood stays compact.

    A companion started ``delta0`` away is followed without renormalisation.
    On regular tori the gap grows at most linearly, in chaotic regions it
    saturates at O(1); a seed counts as bounded if the largest gap stays
    below ``threshold``. Returns ``(fraction, flags)``.
    """
    A, c, tau0, tau1 = _kick_args(params)
    seeds = seed_grid() if seeds is None else list(seeds)
    backend = backend or get_backend()
    flags = []
    for seed in seeds:
        s = _on_sphere(seed)
        d = perturbation_direction(s)
        worst = backend.mf_separation(s, d, A, c, tau0, tau1, int(n_sub), int(n_periods), delta0)
        flags.append(worst < threshold)
    flags = np.array(flags)
    return float(np.mean(flags)), flags
