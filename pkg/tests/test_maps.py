import cmath
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from jacobi_spectra.maps import band_argument, rho, rho_array, transfer


@settings(max_examples=200, deadline=None)
@given(
    re=st.floats(-1e3, 1e3, allow_nan=False),
    im=st.floats(1e-9, 1e3, allow_nan=False),
)
def test_exterior_map_properties(re, im):
    z = complex(re, im)
    w = rho(z)
    assert abs(w) >= 1 - 1e-12
    assert abs(w + 1 / w - 2 * z) <= 1e-12 * (1 + abs(z))
    # upper half plane maps into the upper half plane
    assert w.imag > 0


def test_boundary_values():
    for x in (-0.9, 0.0, 0.3):
        w = rho(x, boundary=True)
        assert w == pytest.approx(complex(x, math.sqrt(1 - x * x)), abs=1e-15)
        assert abs(w) == pytest.approx(1.0, abs=1e-15)
    assert rho(2.0, boundary=True) == pytest.approx(2 + math.sqrt(3))
    assert rho(-2.0, boundary=True) == pytest.approx(-2 - math.sqrt(3))


def test_signed_zero_picks_upper_branch():
    assert rho(complex(0.5, -0.0), boundary=True).imag > 0


def test_asymptotic_growth():
    z = 1e6 + 1e3j
    assert rho(z) / z == pytest.approx(2.0, rel=1e-9)


def test_array_matches_scalar(rng):
    z = rng.normal(size=50) + 1j * rng.uniform(0.01, 2, size=50)
    np.testing.assert_allclose(rho_array(z), [rho(v) for v in z], rtol=1e-15)


def test_transfer_relations(hermite):
    x = 0.7 + 0.2j
    for n in (1, 5, 40):
        tp = transfer(hermite, n, x)
        r = hermite.a(n) / hermite.a(n + 1)
        assert tp.t1 * tp.t2 == pytest.approx(r, rel=1e-14)
        # t1 + t2 = (x - b_n) / a_{n+1}
        assert tp.t1 + tp.t2 == pytest.approx((x - hermite.b(n)) / hermite.a(n + 1), rel=1e-13)
        assert tp.arg_t1 == pytest.approx(cmath.phase(tp.t1))


def test_transfer_conventions(hermite):
    for n in (-1, 0):
        tp = transfer(hermite, n, 0.3j)
        assert tp.t1 == tp.t2 == 1
    with pytest.raises(ValueError):
        transfer(hermite, -2, 0.3j)


def test_band_argument(hermite):
    assert band_argument(hermite, 2, 0.0) == 0.0
    assert band_argument(hermite, 1, 1.0) == pytest.approx(1 / (2 * math.sqrt(math.sqrt(0.5))))
