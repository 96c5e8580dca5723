import json
import warnings

import numpy as np
import pytest

from jacobi_spectra import preset
from jacobi_spectra.asymptotics import (
    XOutsideBandError,
    XTooCloseError,
    band_asymptotic_series,
    check_band_asymptotic,
    check_offband_asymptotic,
    decay_ratios,
    offband_asymptotic_series,
    to_jsonl,
)
from jacobi_spectra.limits import HypothesisWarning
from jacobi_spectra.oracles import tridiag_eigs

NS = [2**k for k in range(7, 13)]


@pytest.fixture(autouse=True)
def _quiet():
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", HypothesisWarning)
        yield


def test_constant_band_is_exact(semicircle):
    reps = band_asymptotic_series(semicircle, -0.45, NS)
    assert max(r.residual for r in reps) < 1e-10
    assert all(r.predicted_tail == 0.0 for r in reps)


def test_constant_offband_is_exact(semicircle):
    rep = check_offband_asymptotic(semicircle, 2.0j, 256)
    assert rep.residual < 1e-13


def test_hermite_band_decays(hermite):
    reps = band_asymptotic_series(hermite, 0.7, NS)
    r = decay_ratios(reps)
    assert np.median(r) < 0.9
    assert reps[-1].residual < reps[0].residual


def test_hermite_offband_decays(hermite):
    r = decay_ratios(offband_asymptotic_series(hermite, 0.5 + 1j, NS))
    assert np.all(r < 1.0)


def test_band_requires_n_beyond_cutoff(hermite):
    with pytest.raises(XOutsideBandError):
        check_band_asymptotic(hermite, 20.0, 4)


def test_band_requires_ac(discrete_seq):
    with pytest.raises(XOutsideBandError):
        check_band_asymptotic(discrete_seq, 1.0, 100)


def test_real_axis_rejected_inside_support(hermite):
    with pytest.raises(XTooCloseError):
        check_offband_asymptotic(hermite, 0.5, 100)


def test_real_axis_near_atom(discrete_seq):
    a, b = discrete_seq.arrays(201)
    eig, _ = tridiag_eigs(b[:200], a[1:200], weights=False)
    with pytest.raises(XTooCloseError):
        check_offband_asymptotic(discrete_seq, eig[0] + 1e-6, 100)
    mid = 0.5 * (eig[0] + eig[1])
    reps = offband_asymptotic_series(discrete_seq, mid, [256, 1024, 4096])
    assert reps[-1].residual < reps[0].residual


def test_jsonl(semicircle):
    text = to_jsonl(band_asymptotic_series(semicircle, 0.1, [128, 256]))
    rows = [json.loads(line) for line in text.splitlines()]
    assert [r["n"] for r in rows] == [128, 256]
    assert rows[0]["kind"] == "band"
