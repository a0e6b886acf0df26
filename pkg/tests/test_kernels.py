import math
import os
import subprocess
import sys

import numpy as np
import pytest

from bmfqfi import _backend, kernels, spin
from bmfqfi.evolve import jx_offdiag, jz2_diag

needs_numba = pytest.mark.skipif(not _backend.HAVE_NUMBA, reason="numba not installed")


@pytest.fixture(scope="module")
def both():
    return kernels.numpy_backend(), kernels.numba_backend()


@needs_numba
@pytest.mark.parametrize("name, y0", [
    ("bmf_rk4", np.array([0.9, 0.1, -0.2, 1e-3, 2e-3, -1e-3, 4e-3, 5e-3, 6e-3])),
    ("hp_rk4", np.array([0.5, 0.5, 0.0])),
    ("mf_rk4", np.array([0.6, 0.0, 0.8])),
])
def test_moment_kernels_agree(both, name, y0):
    a = getattr(both[0], name)(y0, 0.7, 0.01, 2.1, 0.3, 1e-3, 500)
    b = getattr(both[1], name)(y0, 0.7, 0.01, 2.1, 0.3, 1e-3, 500)
    assert np.allclose(a, b, rtol=1e-12, atol=1e-14)


@needs_numba
def test_classical_map_kernels_agree(both):
    s = np.array([0.6, 0.0, 0.8])
    d = np.array([0.0, 1.0, 0.0])
    args = (0.4 * math.pi, 1.4 * math.pi, 1.0, 0.01, 200)
    assert np.allclose(both[0].mf_strobe(s, *args, 30), both[1].mf_strobe(s, *args, 30),
                       atol=1e-11)
    assert both[0].mf_benettin(s, d, *args, 30, 1e-5) == \
        pytest.approx(both[1].mf_benettin(s, d, *args, 30, 1e-5), rel=1e-9)
    assert both[0].mf_separation(s, d, *args, 30, 1e-7) == \
        pytest.approx(both[1].mf_separation(s, d, *args, 30, 1e-7), rel=1e-6)


@needs_numba
def test_schrodinger_kernels_agree(both):
    N = 30
    psi = spin.coherent_state(N, 0.3, 0.2)
    diag, off = jz2_diag(N, 1.0, -1), jx_offdiag(N)
    a, da = both[0].ramp_rk4(psi, diag, off, 0.0, 0.01, 0.0, 1e-2, 300)
    b, db = both[1].ramp_rk4(psi, diag, off, 0.0, 0.01, 0.0, 1e-2, 300)
    assert np.allclose(a, b, atol=1e-12)
    assert abs(da - db) < 1e-13
    h0 = both[0].tridiag_apply(psi, diag, off, 0.4)
    h1 = both[1].tridiag_apply(psi, diag, off, 0.4)
    assert np.allclose(h0, h1, atol=1e-14)


def test_tridiagonal_product_matches_dense():
    N = 7
    psi = spin.coherent_state(N, 1.0, 0.5)
    diag, off = jz2_diag(N, 2.0), jx_offdiag(N)
    dense = np.diag(diag) + 0.3 * (np.diag(off, 1) + np.diag(off, -1))
    assert np.allclose(kernels.tridiag_apply_vec(psi, diag, off, 0.3), dense @ psi)


def test_rk4_reaches_fourth_order():
    # c = 0: rotation about x by angle 2
    exact = np.array([0.0, math.cos(2.0), math.sin(2.0)])
    errs = []
    for n in (50, 100, 200):
        y = kernels.numpy_backend().mf_rk4(np.array([0.0, 1.0, 0.0]), 2.0, 0.0, 0.0, 0.0,
                                           1.0 / n, n)
        errs.append(np.max(np.abs(y - exact)))
    assert errs[0] / errs[1] == pytest.approx(16, rel=0.1)
    assert errs[1] / errs[2] == pytest.approx(16, rel=0.1)


@pytest.mark.parametrize("value, wanted", [("1", False), ("true", False), ("YES", False),
                                           (" on ", False), ("0", True), ("", True)])
def test_env_flag_parsing(value, wanted):
    assert _backend.numba_requested({_backend.ENV_FLAG: value}) is wanted
    assert _backend.numba_requested({}) is True


def test_get_backend_names():
    assert kernels.get_backend("numpy").name == "numpy"
    with pytest.raises(ValueError):
        kernels.get_backend("fortran")


def test_env_flag_selects_numpy_in_fresh_process():
    env = dict(os.environ, BMFQFI_NO_NUMBA="1")
    code = "from bmfqfi import kernels; print(kernels.get_backend().name)"
    r = subprocess.run([sys.executable, "-c", code], env=env, capture_output=True, text=True)
    assert r.returncode == 0, r.stderr
    assert r.stdout.strip() == "numpy"
