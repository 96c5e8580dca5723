import json
import math
import warnings

import numpy as np
import pytest

from jacobi_spectra import preset
from jacobi_spectra.limits import HypothesisWarning
from jacobi_spectra.measures import (
    RegimeMismatchError,
    SpectralMeasure,
    ac_cutoff,
    ac_density,
    ac_density_batch,
    ac_measure,
    discrete_measure,
    discrete_spectrum,
    frozen_measure,
    frozen_moments,
    moments_jacobi,
    weak_convergence_check,
)
from jacobi_spectra.oracles import classical_weight, tridiag_eigs

# mpmath, 50 digits: exp(-x^2)/sqrt(pi)
HERMITE_WEIGHT = {0.0: 0.5641895835477563, 0.5: 0.43939128946772240,
                  1.0: 0.20755374871029735, 2.0: 0.010333492677046027}


@pytest.mark.parametrize("x, w", sorted(HERMITE_WEIGHT.items()))
def test_hermite_density_frozen_values(hermite, x, w):
    assert ac_density(hermite, x, tol=1e-7) == pytest.approx(w, rel=1e-7)


def test_density_relative_tolerance(hermite):
    xs = np.linspace(-5, 5, 41)
    vals = ac_density_batch(hermite, xs, tol=1e-6)
    got = np.array([v.density for v in vals])
    assert all(v.converged for v in vals)
    np.testing.assert_allclose(got, classical_weight("hermite", xs), rtol=1e-6)


def test_density_is_symmetric(hermite):
    a = ac_density_batch(hermite, [-1.3, 1.3])
    assert a[0].density == pytest.approx(a[1].density, rel=1e-12)


def test_cutoff_grows_with_x(hermite):
    c = ac_cutoff(hermite, [0.0, 3.0, 10.0])
    assert c[0] < c[1] < c[2]


def test_ac_requires_band(discrete_seq):
    with pytest.raises(RegimeMismatchError):
        ac_density(discrete_seq, 1.0)


def test_ac_measure_mass(hermite):
    m = ac_measure(hermite, np.linspace(-7, 7, 701))
    assert m.total_mass() == pytest.approx(1.0, abs=1e-6)
    assert m.provenance["sequence"] == {"preset": "hermite", "params": {}}
    assert m.provenance["non_converged"] == 0


def test_measure_round_trip(hermite):
    m = ac_measure(hermite, np.linspace(-1, 1, 11))
    back = SpectralMeasure.from_dict(json.loads(m.to_json()))
    assert back.to_json() == m.to_json()
    csv_text = m.to_csv()
    assert csv_text.splitlines()[1] == "x,density"
    assert len(csv_text.splitlines()) == 13


@pytest.mark.parametrize(
    "kw",
    [dict(kind="BOGUS"), dict(kind="DISCRETE", points=[(0.0, -1.0)]),
     dict(kind="DISCRETE", points=[(1.0, 0.5), (0.0, 0.5)]), dict(kind="AC", ac_samples=[(0.0, -1e-3)])],
)
def test_measure_invariants(kw):
    with pytest.raises(ValueError):
        SpectralMeasure(**kw)


def test_discrete_matches_truncation(discrete_seq):
    a, b = discrete_seq.arrays(2001)
    eig, w = tridiag_eigs(b[:2000], a[1:2000])
    pts = discrete_spectrum(discrete_seq, eig[0] - 1, 0.5 * (eig[5] + eig[6]))
    assert len(pts) == 6
    xs = np.array([p[0] for p in pts])
    ms = np.array([p[1] for p in pts])
    np.testing.assert_allclose(xs, eig[:6], rtol=1e-12)
    # converged atoms of the truncation carry the same Gauss weights
    np.testing.assert_allclose(ms, w[:6], rtol=1e-6)


def test_discrete_empty_interval(discrete_seq):
    a, b = discrete_seq.arrays(101)
    eig, _ = tridiag_eigs(b[:100], a[1:100], weights=False)
    lo, hi = eig[0] + 0.2 * (eig[1] - eig[0]), eig[0] + 0.8 * (eig[1] - eig[0])
    assert discrete_spectrum(discrete_seq, lo, hi) == []


def test_discrete_requires_gap(hermite):
    with pytest.raises(RegimeMismatchError):
        discrete_spectrum(hermite, -1, 1)


def test_discrete_measure(discrete_seq):
    m = discrete_measure(discrete_seq, -10, 5)
    assert m.kind == "DISCRETE" and not m.ac_samples
    assert all(mass > 0 for _, mass in m.points)


def test_frozen_semicircle(semicircle):
    m = frozen_measure(semicircle, 1)
    assert not m.points
    assert m.total_mass() == pytest.approx(1.0, abs=1e-13)
    # second moment of the semicircle of radius 1 is 1/4
    assert m.integrate(lambda x: x**2) == pytest.approx(0.25, abs=1e-13)


def test_frozen_hermite_has_atoms(hermite):
    m = frozen_measure(hermite, 3)
    assert m.total_mass() == pytest.approx(1.0, abs=1e-10)
    assert m.frozen_band is not None


@pytest.mark.parametrize("n0", [2, 4, 7])
def test_frozen_moments_match_jacobi(hermite, n0):
    fm = frozen_moments(hermite, n0, 2 * n0)
    exact = [moments_jacobi(hermite, k) for k in range(2 * n0 + 1)]
    np.testing.assert_allclose(fm, exact, atol=1e-9)


def test_moments_hermite_closed_form(hermite):
    # int x^{2m} exp(-x^2)/sqrt(pi) dx = (2m - 1)!! / 2^m
    for m in range(8):
        dfact = math.prod(range(1, 2 * m, 2))
        assert moments_jacobi(hermite, 2 * m) == pytest.approx(dfact / 2**m, rel=1e-13)
        assert moments_jacobi(hermite, 2 * m + 1) == 0.0


def test_moments_match_matrix_power(discrete_seq):
    N = 12
    a, b = discrete_seq.arrays(N)
    J = np.diag(b[:N]) + np.diag(a[1:N], 1) + np.diag(a[1:N], -1)
    for k in range(9):
        assert moments_jacobi(discrete_seq, k, N=N) == pytest.approx(np.linalg.matrix_power(J, k)[0, 0], rel=1e-13)
    with pytest.raises(ValueError):
        moments_jacobi(discrete_seq, 20, N=3)


def test_weak_convergence_report(hermite):
    rep = weak_convergence_check(hermite, [3, 6], 20)
    assert set(rep) == {3, 6}
    assert rep[6]["k_max"] == 12
    assert rep[3]["max_deviation"] < 1e-7
