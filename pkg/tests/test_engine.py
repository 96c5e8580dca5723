import numpy as np
import pytest

from jacobi_spectra import kernels
from jacobi_spectra.engine import (
    CoeffTable,
    advance_batch,
    init,
    run,
    start_batch,
    step,
)
from jacobi_spectra.oracles import polynomials

needs_cython = pytest.mark.skipif(
    kernels.BACKEND != "cython", reason="compiled kernel not built"
)


def _plain(seq, x, n):
    """p_n(x) by the unscaled recurrence (complex)."""
    a, b = seq.arrays(n + 1)
    pm, pc = 0j, 1 + 0j
    for k in range(n):
        pm, pc = pc, ((x - b[k]) * pc - a[k] * pm) / a[k + 1]
    return pc


@pytest.mark.parametrize("x", [0.3 + 0.5j, -1.2 + 0.01j, 2j])
def test_step_reconstructs_p(hermite, x):
    st = init(hermite, x)
    for n in range(1, 30):
        st = step(st, hermite)
        assert st.p() == pytest.approx(_plain(hermite, x, n), rel=1e-11)


def test_boundary_real_axis(hermite):
    st = init(hermite, 0.4, boundary=True)
    for _ in range(25):
        st = step(st, hermite)
    assert st.p().real == pytest.approx(float(polynomials(hermite, 25, [0.4])[25, 0]), rel=1e-10)
    assert abs(st.p().imag) < 1e-10 * max(1.0, abs(st.p()))


def test_batch_matches_step(hermite):
    xs = [0.1 + 0.2j, 1.5 + 0.1j, -3 + 1j]
    state, table = start_batch(hermite, xs)
    advance_batch(state, table, 40, track=True)
    for j, x in enumerate(xs):
        st = init(hermite, x)
        for _ in range(40):
            st = step(st, hermite)
        snap = state.to_state(j)
        assert snap.p_cur == pytest.approx(st.p_cur, rel=1e-11)
        assert snap.phi_hat == pytest.approx(st.phi_hat, rel=1e-11)
        assert snap.phi1_hat == pytest.approx(st.phi1_hat, rel=1e-11)
        assert snap.log_scale == pytest.approx(st.log_scale, rel=1e-12)


def test_run_checkpoints(hermite):
    states = run(hermite, 1j, 64, checkpoints=[8, 16, 64])
    assert [s.n for s in states] == [8, 16, 64]


def test_wronskian(hermite):
    # a_{n+1} (p_{n+1} p^1_n - p_n p^1_{n+1}) is independent of n
    x = 0.3 + 0.7j
    st = init(hermite, x)
    vals = []
    prev = None
    for n in range(1, 40):
        cur = step(st, hermite)
        if n >= 2:
            vals.append(hermite.a(n) * (cur.p() * st.p_second() - st.p() * cur.p_second()))
        st = cur
    np.testing.assert_allclose(vals, vals[0], rtol=1e-9)


def test_cannot_step_backwards(hermite):
    state, table = start_batch(hermite, [1j])
    advance_batch(state, table, 10)
    with pytest.raises(ValueError):
        advance_batch(state, table, 5)


def test_lower_half_plane_rejected(hermite):
    with pytest.raises(ValueError):
        start_batch(hermite, [0.5 - 0.1j])


def test_table_grows(hermite):
    t = CoeffTable(hermite, 16)
    t.ensure(5000)
    assert t.n_hi >= 5000
    np.testing.assert_allclose(t.an[:4], [0.0, *np.sqrt(np.arange(1, 4) / 2)])


@pytest.mark.parametrize("size", [1, 17])  # scalar and vectorised fallback paths
@pytest.mark.parametrize("real_axis", [False, True])
def test_pure_fallback_selected_backend_agree(hermite, real_axis, size):
    xs = np.linspace(-2, 2, size) + (0 if real_axis else 0.3j)
    out = {}
    for be in ("python", kernels.BACKEND):
        state, table = start_batch(hermite, xs, boundary=real_axis)
        advance_batch(state, table, 3000, track=True, backend=be)
        out[be] = state
    a, b = out["python"], out[kernels.BACKEND]
    np.testing.assert_allclose(a.p1, b.p1, rtol=1e-10)
    np.testing.assert_allclose(a.phi, b.phi, rtol=1e-10)
    np.testing.assert_allclose(a.phase, b.phase, rtol=1e-10)
    np.testing.assert_allclose(a.logs, b.logs, rtol=1e-10)
    np.testing.assert_allclose(a.phi1, b.phi1, rtol=1e-10)


@needs_cython
def test_cython_backend_loaded():
    assert kernels.get_advance("cython") is not kernels.get_advance("python")


def test_unknown_backend():
    with pytest.raises(ValueError):
        kernels.get_advance("fortran")


def test_threads_do_not_change_results(hermite):
    xs = np.linspace(-3, 3, 31) + 0.2j
    out = []
    for threads in (1, 3):
        state, table = start_batch(hermite, xs)
        advance_batch(state, table, 500, threads=threads)
        out.append(state.phi.copy())
    np.testing.assert_array_equal(out[0], out[1])
