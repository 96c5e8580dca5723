import warnings

import numpy as np
import pytest

from jacobi_spectra import preset
from jacobi_spectra.limits import (
    HypothesisWarning,
    NonConvergenceWarning,
    XInBandError,
    checkpoints,
    eval_g,
    eval_g_batch,
    eval_g_real_discrete,
    last_band_index,
)
from jacobi_spectra.maps import rho_array


@pytest.fixture(autouse=True)
def _quiet():
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", HypothesisWarning)
        yield


def test_checkpoints():
    assert checkpoints(1, 100) == [1, 2, 4, 8, 16, 32, 64, 100]
    assert checkpoints(5, 64) == [5, 8, 16, 32, 64]


def test_constant_limits_are_closed_form(semicircle):
    # Chebyshev U: phihat_n = rho(x) exactly, and the second kind is 2 rho(x)
    xs = np.array([0.3 + 0.5j, -2 + 0.1j, 4j])
    lvs = eval_g_batch(semicircle, xs)
    g = np.array([lv.g for lv in lvs])
    g1 = np.array([lv.g1 for lv in lvs])
    np.testing.assert_allclose(g, rho_array(xs), rtol=1e-14)
    np.testing.assert_allclose(g1, 2 * rho_array(xs), rtol=1e-14)
    assert all(lv.converged for lv in lvs)


def test_hermite_off_axis_converges_slowly(hermite):
    # the tail decays like n^-1/2 here, so only coarse tolerances are reachable
    lv = eval_g(hermite, 1j, tol=1e-2, n_max=2**20)
    assert lv.converged
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", NonConvergenceWarning)
        ref = eval_g(hermite, 1j, tol=1e-9, n_max=2**22)
    assert abs(lv.g - ref.g) < 1e-2
    assert abs(ref.g.real) < 1e-12  # symmetric weight: g(i) is purely imaginary


def test_nonconvergence_is_flagged(hermite):
    with pytest.warns(NonConvergenceWarning):
        lv = eval_g(hermite, 1j, tol=1e-12, n_max=2**12)
    assert not lv.converged


def test_boundary_modulus_extrapolation(hermite):
    # |g(x)|^2 is fixed by the density; check modulus against a much deeper run
    fast = eval_g_batch(hermite, [0.5 + 0j], tol=1e-7, boundary=True, relative=True,
                        monitor="modulus", extrapolate=True, second_kind=False)[0]
    slow = eval_g_batch(hermite, [0.5 + 0j], tol=1e-9, n_max=2**22, boundary=True, relative=True,
                        monitor="modulus", extrapolate=True, second_kind=False)[0]
    assert abs(fast.g) == pytest.approx(abs(slow.g), rel=1e-6)


def test_extrapolate_requires_modulus(hermite):
    with pytest.raises(ValueError):
        eval_g_batch(hermite, [1j], extrapolate=True)


def test_last_band_index(discrete_seq):
    # bands of a_n = n, b_n = 4n are [4n - 2 sqrt(n(n+1)), 4n + 2 sqrt(n(n+1))]
    n = last_band_index(discrete_seq, 10.0)
    half = lambda k: 2 * np.sqrt(k * (k + 1))
    assert 4 * n - half(n) <= 10.0
    assert all(4 * k - half(k) > 10.0 for k in range(n + 1, n + 50))


def test_in_band_forever(hermite):
    with pytest.raises(XInBandError):
        last_band_index(hermite, 0.0, n_limit=1 << 12)


def test_real_discrete_scaled_limit_is_real(discrete_seq):
    lv = eval_g_real_discrete(discrete_seq, 10.0, tol=1e-4)
    assert lv.converged
    assert lv.g_scaled.imag == 0.0
    assert lv.scale_start == last_band_index(discrete_seq, 10.0) + 1
