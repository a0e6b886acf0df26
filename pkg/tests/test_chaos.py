import math
import warnings

import numpy as np
import pytest

from bmfqfi import chaos, spin
from bmfqfi.errors import IntegratorError, ParameterError
from oracles import mf_ivp

PI = math.pi


def kicked(A, c):
    return spin.ModelParams(1, c, spin.DriveProtocol.kicked(A))


def test_derivative_rotation_about_x():
    d = chaos.mf_derivative((0.0, 0.6, 0.8), 2.0, 0.0)
    assert d == pytest.approx([0.0, -1.6, 1.2])


def test_derivative_pure_twisting():
    d = chaos.mf_derivative(chaos.BlochVector(0.6, 0.0, 0.8), 0.0, 1.5)
    assert d == pytest.approx([0.0, 1.5 * 0.8 * 0.6, 0.0])


def test_norm_derivative_vanishes():
    rng = np.random.default_rng(3)
    for _ in range(20):
        s = rng.normal(size=3)
        s /= np.linalg.norm(s)
        d = chaos.mf_derivative(s, rng.normal(), rng.normal())
        assert abs(np.dot(s, d)) < 1e-14


def test_stroboscopic_map_matches_reference_integrator():
    s0 = np.array([0.3, -0.5, math.sqrt(1 - 0.34)])
    traj = chaos.integrate_mf(s0, kicked(0.4 * PI, 0.8 * PI), 20)
    ref = mf_ivp(s0, 0.4 * PI, 0.8 * PI, 20)
    assert np.max(np.abs(traj - ref)) < 1e-8


def test_substep_self_convergence():
    p = kicked(0.4 * PI, 0.8 * PI)
    s0 = (0.6, 0.0, 0.8)
    a = chaos.integrate_mf(s0, p, 10, n_sub=200)
    b = chaos.integrate_mf(s0, p, 10, n_sub=400)
    assert np.max(np.abs(a - b)) < 1e-8


def test_zero_kick_keeps_latitude():
    traj = chaos.integrate_mf((0.6, 0.0, 0.8), kicked(0.0, 1.3), 50)
    assert np.allclose(traj[:, 2], 0.8, atol=1e-14)


def test_norm_conserved_over_long_runs():
    traj = chaos.integrate_mf((1.0, 0.0, 0.0), kicked(0.4 * PI, 1.4 * PI), 500)
    assert np.max(np.abs(np.linalg.norm(traj, axis=1) - 1)) < 1e-9


def test_stable_orbit_is_bounded():
    traj = chaos.integrate_mf((1.0, 0.0, 0.0), kicked(0.4 * PI, 0.2 * PI), 300)
    assert np.min(traj[:, 0]) > 0.0


def test_coarse_substeps_raise():
    with pytest.raises(IntegratorError):
        chaos.integrate_mf((0.6, 0.0, 0.8), kicked(0.4 * PI, 1.4 * PI), 50, n_sub=1)


def test_requires_kicked_drive():
    with pytest.raises(ParameterError):
        chaos.integrate_mf((1, 0, 0), spin.ModelParams(1, 1.0), 5)


def test_lyapunov_vanishes_without_twisting():
    for A in (0.1, 0.4 * PI, 1.0 * PI):
        assert abs(chaos.lyapunov(kicked(A, 0.0), m=200).lambda_L) < 1e-3


def test_lyapunov_result_fields():
    r = chaos.lyapunov(kicked(0.4 * PI, 1.4 * PI), m=50, delta0=1e-6)
    assert (r.m, r.delta0) == (50, 1e-6)


def test_lyapunov_independent_of_delta0():
    p = kicked(0.4 * PI, 1.4 * PI)
    vals = [chaos.lyapunov(p, delta0=d).lambda_L for d in (1e-7, 1e-6, 1e-5, 1e-4)]
    assert max(vals) / min(vals) - 1 < 0.05


def test_lyapunov_converges_in_periods():
    p = kicked(0.4 * PI, 1.4 * PI)
    a = chaos.lyapunov(p, m=250).lambda_L
    b = chaos.lyapunov(p, m=500).lambda_L
    assert abs(a - b) / b < 0.1


def test_lyapunov_off_sphere_projected_with_warning():
    p = kicked(0.4 * PI, 0.8 * PI)
    with pytest.warns(UserWarning, match="projected"):
        r = chaos.lyapunov(p, s0=(2.0, 0.0, 0.0), m=100)
    assert r.lambda_L == pytest.approx(chaos.lyapunov(p, m=100).lambda_L, rel=1e-12)


def test_lyapunov_bad_arguments():
    p = kicked(0.4 * PI, 0.8 * PI)
    with pytest.raises(ParameterError):
        chaos.lyapunov(p, m=0)
    with pytest.raises(ParameterError):
        chaos.lyapunov(p, delta0=0.0)
    with pytest.raises(ParameterError):
        chaos.lyapunov(p, s0=(0, 0, 0))


def test_perturbation_direction_is_tangent():
    for s in ([1.0, 0, 0], [0, 1.0, 0], [0.6, 0, 0.8], [-1.0, 0, 0]):
        s = np.array(s)
        d = chaos.perturbation_direction(s)
        assert abs(np.dot(d, s)) < 1e-14
        assert np.linalg.norm(d) == pytest.approx(1.0)


def test_map_regimes_and_zero_column():
    A = [0.4 * PI]
    c = [0.0, 0.2 * PI, 0.8 * PI, 1.4 * PI]
    lam = chaos.lyapunov_map(A, c, m=300, threads=1)
    assert lam.shape == (1, 4)
    assert abs(lam[0, 0]) < 1e-3
    assert lam[0, 1] < 0.01
    assert 0.7 < lam[0, 2] < 1.2
    assert lam[0, 3] > 1.2


def test_map_deterministic_across_threads():
    A = np.linspace(0.1, 1.0, 3) * PI
    c = np.linspace(0.5, 1.5, 3) * PI
    a = chaos.lyapunov_map(A, c, m=60, threads=1)
    b = chaos.lyapunov_map(A, c, m=60, threads=3)
    c2 = chaos.lyapunov_map(A, c, m=60, threads=3)
    assert np.array_equal(a, b) and np.array_equal(b, c2)


def test_threads_resolution(monkeypatch):
    monkeypatch.setenv(chaos.THREADS_ENV, "3")
    assert chaos.resolve_threads() == 3
    assert chaos.resolve_threads(2) == 2
    monkeypatch.delenv(chaos.THREADS_ENV)
    assert chaos.resolve_threads() >= 1
    with pytest.raises(ParameterError):
        chaos.resolve_threads(0)


def test_seed_grid_on_sphere():
    seeds = chaos.seed_grid(4, 5)
    assert len(seeds) == 20
    assert all(abs(s.norm - 1) < 1e-14 for s in seeds)
    assert all(abs(s.sz) < 1 for s in seeds)


def test_poincare_points_in_range():
    pts = chaos.poincare_section(kicked(0.4 * PI, 1.4 * PI), chaos.seed_grid(3, 3), n_periods=30,
                                 threads=1)
    assert len(pts) == 9 * 31
    assert all(-PI < p.phi <= PI and -1 <= p.s_z <= 1 for p in pts)
    assert [p.period_index for p in pts[:31]] == list(range(31))
    assert {p.seed_id for p in pts} == set(range(9))


def test_bounded_fraction_ordering():
    seeds = chaos.seed_grid(6, 6)
    fr = [chaos.bounded_fraction(kicked(0.4 * PI, c * PI), seeds, n_periods=100)[0]
          for c in (0.2, 1.4)]
    assert fr[0] > 0.8 and fr[1] < 0.2


def test_numpy_and_default_backends_agree():
    from bmfqfi.kernels import numpy_backend
    p = kicked(0.4 * PI, 1.4 * PI)
    a = chaos.lyapunov(p, m=40).lambda_L
    b = chaos.lyapunov(p, m=40, backend=numpy_backend()).lambda_L
    assert a == pytest.approx(b, rel=1e-10)


def test_on_sphere_input_does_not_warn():
    with warnings.catch_warnings():
        warnings.simplefilter("error")
        chaos.lyapunov(kicked(0.4 * PI, 0.8 * PI), s0=chaos.BlochVector(0.6, 0.0, 0.8), m=5)
