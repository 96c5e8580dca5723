import ast
import math
from pathlib import Path

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

import jacobi_spectra.oracles as oracles
from jacobi_spectra import preset
from jacobi_spectra.measures import SpectralMeasure, ac_measure, frozen_measure
from jacobi_spectra.oracles import (
    GridTooCoarseError,
    classical_weight,
    gauss_rule,
    orthonormality_check,
    polynomials,
    tridiag_eigs,
)


def test_oracles_do_not_import_pipeline():
    tree = ast.parse(Path(oracles.__file__).read_text())
    names = set()
    for node in ast.walk(tree):
        if isinstance(node, ast.ImportFrom):
            names.add(node.module or "")
            names.update(a.name for a in node.names)
        elif isinstance(node, ast.Import):
            names.update(a.name for a in node.names)
    assert not any("limits" in n or "measures" in n or "engine" in n for n in names)


@settings(max_examples=30, deadline=None)
@given(st.integers(2, 40), st.integers(0, 2**31))
def test_eigs_match_dense(n, seed):
    r = np.random.default_rng(seed)
    d, e = r.normal(size=n), r.uniform(0.1, 2, size=n - 1)
    vals, w = tridiag_eigs(d, e)
    J = np.diag(d) + np.diag(e, 1) + np.diag(e, -1)
    ref, vecs = np.linalg.eigh(J)
    np.testing.assert_allclose(vals, ref, atol=1e-12 * np.abs(J).max() * n)
    np.testing.assert_allclose(w, vecs[0] ** 2, atol=1e-13)
    assert w.sum() == pytest.approx(1.0, abs=1e-13)


def test_eigs_validation():
    with pytest.raises(ValueError):
        tridiag_eigs([0.0, 0.0], [0.0])
    with pytest.raises(ValueError):
        tridiag_eigs([0.0, 0.0, 0.0], [1.0])
    vals, w = tridiag_eigs([2.5], [])
    assert vals[0] == 2.5 and w[0] == 1.0


def test_tiny_weights_keep_relative_accuracy(discrete_seq):
    # the largest node's weight is far below the 1e-32 floor of vec[0]**2
    rule = gauss_rule(discrete_seq, 60)
    assert 0 < rule.weights[-1] < 1e-60
    polys = polynomials(discrete_seq, 59, rule.nodes[-1:])
    christoffel = 1.0 / np.sum(polys[:, 0] ** 2)
    assert rule.weights[-1] == pytest.approx(christoffel, rel=1e-8)


def test_gauss_hermite_exactness(hermite):
    rule = gauss_rule(hermite, 12)
    for m in range(12):
        exact = math.prod(range(1, 2 * m, 2)) / 2**m
        assert rule.integrate(lambda x: x ** (2 * m)) == pytest.approx(exact, rel=1e-12)
    ref_nodes, _ = np.polynomial.hermite.hermgauss(12)
    np.testing.assert_allclose(rule.nodes, ref_nodes, atol=1e-13)


def test_rule_csv(hermite):
    lines = gauss_rule(hermite, 3).to_csv().splitlines()
    assert lines[0] == "node,weight" and len(lines) == 4


def test_polynomials_chebyshev(semicircle):
    x = np.linspace(-0.99, 0.99, 7)
    P = polynomials(semicircle, 6, x)
    theta = np.arccos(x)
    for n in range(7):
        np.testing.assert_allclose(P[n], np.sin((n + 1) * theta) / np.sin(theta), atol=1e-12)


def test_orthonormality_hermite(hermite):
    m = ac_measure(hermite, np.round(np.arange(-8, 8.0001, 0.05), 12))
    assert orthonormality_check(m, 6) < 1e-4


def test_orthonormality_frozen(semicircle):
    assert orthonormality_check(frozen_measure(semicircle, 1), 12) < 1e-12


def test_orthonormality_detects_coarse_grid(hermite):
    m = ac_measure(hermite, np.linspace(-8, 8, 17))
    with pytest.raises(GridTooCoarseError):
        orthonormality_check(m, 8)


def test_orthonormality_degree_limit(hermite):
    m = SpectralMeasure("AC", provenance={"sequence": hermite.to_dict()})
    with pytest.raises(ValueError):
        orthonormality_check(m, 13)


def test_classical_weight():
    assert classical_weight("hermite", 0.0) == pytest.approx(1 / math.sqrt(math.pi))
    with pytest.raises(ValueError):
        classical_weight("laguerre", 1.0)
