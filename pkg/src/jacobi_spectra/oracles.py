"""Independent reference computations.

Nothing here touches the limit functions or the measure constructions: the
tridiagonal eigensolver, Gauss rules, closed-form weights and the
orthonormality integrator work from the coefficients (or from sampled
measure data) alone, so agreement with the main pipeline means something.
"""
from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass

import numpy as np
from scipy.integrate import simpson
from scipy.linalg import LinAlgError, eigh_tridiagonal

from .coeffs import CoefficientSequence

__all__ = [
    "QuadratureRule",
    "OracleError",
    "GridTooCoarseError",
    "tridiag_eigs",
    "gauss_rule",
    "orthonormality_check",
    "classical_weight",
    "polynomials",
]


class OracleError(ArithmeticError):
    pass


class GridTooCoarseError(ValueError):
    code = "GRID_TOO_COARSE"


def tridiag_eigs(diag, offdiag, weights: bool = True, select: str = "a", select_range=None):
    """Eigenvalues (ascending) of the symmetric tridiagonal matrix and, if
    ``weights``, the squared first components of the normalized eigenvectors.

    Off-diagonal entries must be positive, which makes every eigenvalue simple.
    ``select``/``select_range`` restrict to an index ("i") or value ("v")
    range, as in scipy.
    """
    d = np.asarray(diag, dtype=float)
    e = np.asarray(offdiag, dtype=float)
    if d.ndim != 1 or d.size == 0:
        raise ValueError("diag must be a non-empty vector")
    if e.size != d.size - 1:
        raise ValueError("offdiag must have len(diag) - 1 entries")
    if np.any(~(e > 0)):
        raise ValueError("offdiag entries must be positive")
    if d.size == 1:
        return d.copy(), np.ones(1) if weights else None
    try:
        if weights:
            vals, vecs = eigh_tridiagonal(d, e, select=select, select_range=select_range)
            return vals, _first_components(d, e, vals, vecs)
        vals = eigh_tridiagonal(d, e, eigvals_only=True, select=select, select_range=select_range)
        return vals, None
    except LinAlgError as exc:
        raise OracleError(f"tridiagonal eigensolver did not converge: {exc}") from exc


def _first_components(d, e, vals, vecs) -> np.ndarray:
    """Squared first eigenvector components with full relative accuracy.

    vecs[0] ** 2 is only accurate to ~1e-32 absolute, which wipes out the
    tiny weights of extreme nodes. The largest component v_k is accurate, and
    v_0 / v_k = 1 / p_k(x) with p_k from the forward recurrence, which is
    stable up to the peak of the eigenvector.
    """
    k = np.argmax(np.abs(vecs), axis=0)
    vk = np.abs(vecs[k, np.arange(vecs.shape[1])])
    prev = np.zeros_like(vals)
    cur = np.ones_like(vals)
    logp = np.zeros_like(vals)  # log|p_n| = logp + log|cur|
    pk = np.where(k == 0, 1.0, 0.0)
    logpk = np.zeros_like(vals)
    for n in range(int(k.max())):
        nxt = ((vals - d[n]) * cur - (e[n - 1] * prev if n else 0.0)) / e[n]
        prev, cur = cur, nxt
        big = np.abs(cur) > 1e150
        if big.any():
            f = np.where(big, 1e-150, 1.0)
            prev, cur = prev * f, cur * f
            logp = logp - np.log(f)
        hit = k == n + 1
        pk = np.where(hit, cur, pk)
        logpk = np.where(hit, logp, logpk)
    with np.errstate(divide="ignore"):
        lw = 2.0 * (np.log(vk) - np.log(np.abs(pk)) - logpk)
    w = np.exp(lw)
    # a vanishing p_k leaves the direct estimate as the only option
    return np.where(np.isfinite(lw), w, vecs[0] ** 2)


@dataclass(frozen=True)
class QuadratureRule:
    nodes: np.ndarray
    weights: np.ndarray
    N: int

    def integrate(self, f) -> float:
        return float(np.dot(self.weights, f(self.nodes)))

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["node", "weight"])
        for x, v in zip(self.nodes, self.weights):
            w.writerow([repr(float(x)), repr(float(v))])
        return buf.getvalue()


def gauss_rule(seq: CoefficientSequence, N: int) -> QuadratureRule:
    """Gauss rule of the N x N truncated Jacobi matrix (Golub-Welsch)."""
    N = int(N)
    if N < 1:
        raise ValueError("N must be >= 1")
    a, b = seq.arrays(N)
    nodes, w = tridiag_eigs(b[:N], a[1:N])
    return QuadratureRule(nodes, w, N)


def polynomials(seq: CoefficientSequence, n_max: int, x) -> np.ndarray:
    """p_0..p_{n_max} at ``x`` by the plain recurrence, shape (n_max + 1, len(x))."""
    x = np.atleast_1d(np.asarray(x, dtype=float))
    a, b = seq.arrays(n_max + 1)
    out = np.zeros((n_max + 1, x.size))
    out[0] = 1.0
    prev = np.zeros_like(x)
    for n in range(n_max):
        out[n + 1] = ((x - b[n]) * out[n] - a[n] * prev) / a[n + 1]
        prev = out[n]
    return out


def _gram_ac(xs: np.ndarray, ws: np.ndarray, P: np.ndarray, band) -> np.ndarray:
    if band is not None:
        lo, hi = band
        c, r = 0.5 * (lo + hi), 0.5 * (hi - lo)
        theta = np.arccos(np.clip((xs - c) / r, -1.0, 1.0))
        order = np.argsort(theta)
        theta = theta[order]
        jac = ws[order] * r * np.sin(theta)
        integrand = P[:, None, order] * P[None, :, order] * jac
        dt = np.diff(theta)
        if np.allclose(dt, dt.mean(), rtol=1e-9, atol=1e-13):
            return np.trapezoid(integrand, theta, axis=-1)
        return simpson(integrand, x=theta, axis=-1)
    return simpson(P[:, None, :] * P[None, :, :] * ws, x=xs, axis=-1)


def orthonormality_check(measure, n_max: int, refine_tol: float = 1e-3) -> float:
    """max_{i,j <= n_max} |int p_i p_j dmu - delta_ij| for a sampled measure.

    ``measure`` needs ``ac_samples``, ``points``, ``frozen_band`` and a
    ``provenance['sequence']`` description (as produced by the measures
    module). The AC part is integrated twice, on the full sample set and on
    every other sample; a disagreement above ``refine_tol`` means the grid
    does not resolve the integrand.
    """
    from .coeffs import from_json

    if n_max > 12:
        raise ValueError("orthonormality_check supports n_max <= 12")
    seq = from_json(measure.provenance["sequence"])
    return _orthonormality(seq, measure, n_max, refine_tol)


def _orthonormality(seq, measure, n_max, refine_tol):
    gram = np.zeros((n_max + 1, n_max + 1))
    if measure.ac_samples:
        xs = np.array([x for x, _ in measure.ac_samples], dtype=float)
        ws = np.array([w for _, w in measure.ac_samples], dtype=float)
        P = polynomials(seq, n_max, xs)
        band = measure.frozen_band
        full = _gram_ac(xs, ws, P, band)
        if xs.size >= 5:
            half = _gram_ac(xs[::2], ws[::2], P[:, ::2], band)
            gap = float(np.max(np.abs(full - half)))
            if gap > refine_tol:
                raise GridTooCoarseError(
                    f"sample grid too coarse for degree {n_max}: refinement changes the Gram matrix by {gap:.3g}"
                )
        gram += full
    if measure.points:
        xp = np.array([x for x, _ in measure.points], dtype=float)
        mp = np.array([m for _, m in measure.points], dtype=float)
        P = polynomials(seq, n_max, xp)
        gram += (P[:, None, :] * P[None, :, :] * mp).sum(axis=-1)
    return float(np.max(np.abs(gram - np.eye(n_max + 1))))


def classical_weight(name: str, x):
    """Normalized closed-form orthogonality weights."""
    if name == "hermite":
        x = np.asarray(x, dtype=float)
        out = np.exp(-x * x) / math.sqrt(math.pi)
        return float(out) if out.ndim == 0 else out
    raise ValueError(f"no closed-form weight for {name!r}")
