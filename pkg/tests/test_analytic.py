import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from bmfqfi import analytic, bmf, evolve, spin
from bmfqfi.errors import DomainError

PI = math.pi


def test_oat_closed_form_start():
    assert analytic.f_q_oat_exact(400, PI, 0.0) == pytest.approx(400.0, rel=1e-15)
    assert analytic.f_b_oat_exact(400, PI, 0.0) == pytest.approx(400.0, rel=1e-15)


def test_two_particles_reach_four():
    # N=2 reduces to 2(1 + sin(ct/2))
    assert analytic.f_q_oat_exact(2, 1.0, PI) == pytest.approx(4.0, rel=1e-14)
    ct = np.linspace(0, PI, 7)
    assert np.allclose(analytic.f_q_oat_yz(2, 1.0, ct), 2 * (1 + np.sin(ct / 2)))


def test_oat_matches_exact_evolver():
    N, c = 60, 1.3
    t = np.linspace(0, N * PI / (2 * c), 41)
    psi = spin.coherent_state(N, PI / 2, 0.0)
    _, fq = evolve.qfi_trajectory(spin.ModelParams(N, c), psi, t)
    assert np.allclose(fq, analytic.f_q_oat_exact(N, c, t), rtol=1e-10)


def test_oat_mean_jx_matches_evolver():
    N, c = 30, 2.0
    t = np.linspace(0, 5, 11)
    states = evolve.evolve_states(spin.ModelParams(N, c), spin.coherent_state(N, PI / 2, 0), t)
    m = spin.spin_moments(states)
    assert np.allclose(m.first[:, 0], analytic.oat_mean_jx(N, c, t), atol=1e-11)


def test_plateau_near_half_heisenberg():
    N, c = 400, PI
    ct = np.linspace(2 * math.sqrt(N), N * PI / 2 - 2 * math.sqrt(N), 300)
    f = analytic.f_q_oat_exact(N, c, ct / c)
    assert np.mean(f) == pytest.approx(N * N / 2, rel=0.03)


def test_large_power_does_not_overflow():
    f = analytic.f_q_oat_exact(10**6, 1.0, np.array([0.0, 50.0, 1e4]))
    assert np.all(np.isfinite(f))


def test_bmf_revival():
    N, c = 400, PI
    f = analytic.f_b_oat_exact(N, c, math.sqrt(N) * PI / (2 * c))
    assert f == pytest.approx(N * N, rel=0.01)


def test_bmf_closed_form_matches_integrator():
    N, c = 100, 1.0
    t = np.linspace(0, math.sqrt(N) / c, 51)
    tr = bmf.integrate_bmf(bmf.bmf_initial(N, PI / 2, 0), spin.ModelParams(N, c),
                           sample_times=t, dt=1e-3)
    assert np.allclose(tr.f_b(), analytic.f_b_oat_exact(N, c, t), rtol=1e-8)
    lam = tr.covariance()
    assert np.allclose(lam, analytic.bmf_oat_covariance(N, c, t), atol=1e-7 * N)


def test_printed_third_order_gap():
    N = 400
    gap = analytic.f_b_oat_taylor(N)[3] - analytic.f_q_oat_taylor(N)[3]
    assert gap == pytest.approx(7 / (12 * N), rel=1e-12)
    for k in range(3):
        assert analytic.f_b_oat_taylor(N)[k] == analytic.f_q_oat_taylor(N)[k]


def test_series_agree_at_infinite_n():
    for series in (analytic.f_q_oat_taylor(10**12), analytic.f_b_oat_taylor(10**12),
                   analytic.f_q_oat_taylor_exact(10**12)):
        assert series[3] == pytest.approx(1 / 8, abs=1e-10)
    assert analytic.f_hp_oat_taylor()[3] == 1 / 8


def _remainder_ratios(f, series, order, cts):
    return np.array([(f(ct) - series(ct)) / ct ** (order + 1) for ct in cts])


@pytest.mark.parametrize("N", [10, 400])
def test_exact_oat_series_remainder_order(N):
    cts = [4e-2, 2e-2, 1e-2]
    r = _remainder_ratios(lambda ct: analytic.f_q_oat_yz(N, 1.0, ct) / N,
                          analytic.f_q_oat_taylor_exact(N), 4, cts)
    assert np.all(np.abs(r) < 10)
    assert abs(r[-1] - r[-2]) < 0.2 * abs(r[-2]) + 1e-3


def test_bmf_oat_series_remainder_order():
    N = 400
    r = _remainder_ratios(lambda ct: analytic.f_b_oat_exact(N, 1.0, ct) / N,
                          analytic.f_b_oat_taylor(N), 4, [2e-2, 1e-2, 5e-3])
    assert np.all(np.abs(r) < 10)


def test_tat_series_reduce_at_zero_rate():
    N = 50
    assert analytic.f_b_tat_taylor(N, 1.0, 1.0)[3] == pytest.approx(1 / 8 - 1 / (2 * N))
    assert analytic.f_hp_tat_taylor(1.0, 1.0).coefficients == analytic.f_hp_oat_taylor().coefficients


def test_tat_series_structure():
    A, c = PI / 2, PI
    r = A * (c - A) / c**2
    s = analytic.f_hp_tat_taylor(A, c)
    assert s[3] == pytest.approx(r / 6 + 1 / 8)
    assert s[4] == pytest.approx(r / 6)


def test_instability_ratio_peaks_at_two():
    ratios = np.linspace(1.01, 6, 500)
    vals = [analytic.instability_rate(1.0, x) ** 2 / x**2 for x in ratios]
    i = int(np.argmax(vals))
    assert ratios[i] == pytest.approx(2.0, abs=0.02)
    assert max(vals) == pytest.approx(0.25, abs=1e-4)


def test_t_c_value():
    assert analytic.t_c(400, PI / 2, PI) == pytest.approx(2 / PI * math.log(200), rel=1e-14)
    assert analytic.t_c(400, PI / 2, PI) == pytest.approx(3.3730, abs=1e-4)


def test_t_c_zero_at_threshold():
    # N lam^2 = cA with N=2, A=1, c=2
    assert analytic.t_c(2, 1.0, 2.0) == pytest.approx(0.0, abs=1e-15)


@pytest.mark.parametrize("A, c", [(1.0, 1.0), (2.0, 1.0), (0.0, 1.0)])
def test_t_c_stable_regime_rejected(A, c):
    with pytest.raises(DomainError):
        analytic.t_c(100, A, c)


def test_taylor_series_needs_five_coefficients():
    with pytest.raises(ValueError):
        analytic.TaylorSeries((1.0, 1.0))


def test_window_predicate():
    assert analytic.oat_window(400, 1.0, 10.0)
    assert not analytic.oat_window(400, 1.0, 400 * PI / 2)


@given(st.integers(2, 2000), st.floats(0.0, 50.0))
def test_oat_qfi_between_sql_and_heisenberg(N, ct):
    f = float(analytic.f_q_oat_exact(N, 1.0, ct))
    assert N * (1 - 1e-12) <= f <= N * N * (1 + 1e-12)
