"""Property-based checks of the structural identities."""
import math

import numpy as np
from hypothesis import given, strategies as st

from bmfqfi import bmf, evolve, hp, spin
from oracles import dense_cov

Ns = st.integers(1, 24)
angles = st.floats(0.0, math.pi)
phases = st.floats(-math.pi, math.pi)
seeds = st.integers(0, 2**32 - 1)


def random_state(N, seed):
    rng = np.random.default_rng(seed)
    psi = rng.normal(size=N + 1) + 1j * rng.normal(size=N + 1)
    return psi / np.linalg.norm(psi)


@given(Ns, seeds)
def test_casimir(N, seed):
    m = spin.spin_moments(random_state(N, seed))
    assert abs(m.casimir - N / 2 * (N / 2 + 1)) < 1e-10 * N * N


@given(Ns, seeds)
def test_covariance_psd_with_variance_diagonal(N, seed):
    m = spin.spin_moments(random_state(N, seed))
    cov = spin.covariance_q(m)
    assert np.min(np.linalg.eigvalsh(cov)) > -1e-9 * (1 + N * N)
    assert np.allclose(np.diag(cov), 4 * m.variances, atol=1e-10 * (1 + N * N))


@given(st.integers(1, 8), seeds)
def test_covariance_matches_dense_matrices(N, seed):
    psi = random_state(N, seed)
    assert np.allclose(spin.covariance_q(spin.spin_moments(psi)), dense_cov(psi), atol=1e-10)


@given(st.integers(1, 400), angles, phases)
def test_coherent_states_reach_standard_limit(N, theta, phi):
    assert abs(spin.qfi_of_state(spin.coherent_state(N, theta, phi)) - N) < 1e-9 * N


@given(Ns, seeds)
def test_qfi_bounds(N, seed):
    f = spin.qfi_of_state(random_state(N, seed))
    assert -1e-9 <= f <= N * N * (1 + 1e-12)


@given(st.integers(1, 60), st.floats(0, 1), st.floats(0, 1))
def test_depth_monotone_in_qfi(N, u, w):
    lo, hi = sorted((u * N * N, w * N * N))
    assert spin.entanglement_depth(lo, N).k_plus_one <= spin.entanglement_depth(hi, N).k_plus_one


@given(st.integers(1, 12), st.floats(0.0, 1.0))
def test_largest_eigenvalue_matches_lapack(N, scale):
    rng = np.random.default_rng(N)
    b = rng.normal(size=(3, 3))
    a = b + b.T
    a[0, 0] += scale
    assert abs(spin.max_eig_sym3(a) - np.linalg.eigvalsh(a)[-1]) < 1e-12 * (1 + np.abs(a).max())


@given(st.integers(2, 20), seeds, st.sampled_from(["off", "constant", "kicked"]),
       st.floats(0.1, 5.0), st.floats(0.0, 3.0))
def test_exact_evolution_preserves_norm(N, seed, kind, c, t):
    drive = {"off": spin.DriveProtocol.off(), "constant": spin.DriveProtocol.constant(1.3),
             "kicked": spin.DriveProtocol.kicked(0.4 * math.pi)}[kind]
    states = evolve.evolve_states(spin.ModelParams(N, c, drive), random_state(N, seed), [t])
    assert abs(np.linalg.norm(states[-1]) - 1) < 1e-12


@given(st.integers(2, 6), seeds)
def test_four_bmf_covariance_equals_exact(N, seed):
    m = spin.spin_moments(random_state(N, seed))
    lam_b = bmf.covariance_b(bmf.bmf_from_moments(m), N)
    assert np.allclose(4 * lam_b, spin.covariance_q(m), atol=1e-10)


@given(st.floats(0.05, 2.0), st.floats(0.05, 2.0))
def test_hp_symplectic_invariant_conserved(A, c):
    p = spin.ModelParams(100, c, spin.DriveProtocol.constant(A))
    tr = hp.integrate_hp(hp.HpMoments(), p, 2.0, dt=1e-3, warn=False)
    assert np.max(np.abs(tr.symplectic() - 0.25)) < 1e-9 * 2.0


@given(st.floats(0.05, 2.0), st.floats(0.05, 2.0))
def test_hp_excitations_nonnegative(A, c):
    p = spin.ModelParams(100, c, spin.DriveProtocol.constant(A))
    tr = hp.integrate_hp(hp.HpMoments(), p, 2.0, dt=1e-2, warn=False)
    assert np.all(tr.n_exc() >= -1e-12)
    assert np.all(tr.f_hp() >= 100 * (1 - 1e-12))


@given(st.integers(20, 400), st.floats(0.0, 1.5), st.floats(0.1, 3.0))
def test_bmf_spin_length_soft_bound(N, A, c):
    p = spin.ModelParams(N, c, spin.DriveProtocol.constant(A))
    tr = bmf.integrate_bmf(bmf.bmf_initial(N, math.pi / 2, 0), p, t_end=3.0, dt=1e-2)
    assert np.all(tr.s_norm_sq() <= 1 + 5 / N)
