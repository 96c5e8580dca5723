"""Spectral measures: AC density, point spectrum, frozen-coefficient measures.

Everything here is built on the limit functions g, g1 together with the
products of transfer scalars:

* |d| < 1: density(x) = sqrt(1 - d^2) / (a_1 pi |g(x)|^2 prod_n |rho(u_n)|^2),
  the product running over the finitely many indices whose band misses x.
* |d| > 1: atoms at the real zeros of g, with mass g1 / (t1_1 g').
* frozen at n0: semicircle-type density on one band plus atoms at the
  zeros of phi_{n0} outside it.
"""
from __future__ import annotations

import csv
import io
import json
import math
import warnings
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np
from scipy.integrate import simpson
from scipy.optimize import brentq

from .coeffs import CoefficientSequence, estimate_d
from .engine import advance_batch, shared_table, start_batch
from .limits import DEFAULT_N_MAX, eval_g_batch, last_band_index
from .maps import rho_array
from .oracles import tridiag_eigs

__all__ = [
    "SpectralMeasure",
    "DensityValue",
    "RegimeMismatchError",
    "RootError",
    "ac_cutoff",
    "ac_density",
    "ac_density_batch",
    "ac_measure",
    "discrete_spectrum",
    "discrete_measure",
    "frozen_measure",
    "frozen_moments",
    "moments_jacobi",
    "weak_convergence_check",
]

AC, DISCRETE, FROZEN = "AC", "DISCRETE", "FROZEN"


class RegimeMismatchError(ValueError):
    code = "REGIME_MISMATCH"


class RootError(ArithmeticError):
    """A located zero contradicts simplicity or gives a non-positive mass."""

    def __init__(self, code: str, message: str):
        super().__init__(f"{code}: {message}")
        self.code = code


@lru_cache(maxsize=64)
def _d(seq: CoefficientSequence) -> float:
    return estimate_d(seq)


def _fmt(v: float) -> str:
    return repr(float(v))


# --------------------------------------------------------------------------
# measure container


@dataclass
class SpectralMeasure:
    kind: str
    ac_samples: list = field(default_factory=list)  # [(x, density), ...]
    points: list = field(default_factory=list)  # [(x_i, mass_i), ...]
    frozen_band: tuple | None = None
    provenance: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.kind not in (AC, DISCRETE, FROZEN):
            raise ValueError(f"unknown measure kind {self.kind!r}")
        if any(w < 0 for _, w in self.ac_samples):
            raise ValueError("negative density sample")
        if any(m <= 0 for _, m in self.points):
            raise ValueError("non-positive point mass")
        xs = [x for x, _ in self.points]
        if any(b <= a for a, b in zip(xs, xs[1:])):
            raise ValueError("point masses must be strictly increasing in x")

    def total_mass(self) -> float:
        return self.integrate(lambda x: np.ones_like(x))

    def integrate(self, f) -> float:
        """int f dmu from the samples (Simpson, or the band angle for FROZEN)
        plus the atoms."""
        total = sum(m * float(f(np.asarray(x))) for x, m in self.points)
        if len(self.ac_samples) >= 3:
            xs = np.array([x for x, _ in self.ac_samples])
            ws = np.array([w for _, w in self.ac_samples])
            if self.frozen_band is not None:
                total += _band_angle_integral(xs, ws * f(xs), self.frozen_band)
            else:
                total += float(simpson(ws * f(xs), x=xs))
        return float(total)

    def to_dict(self) -> dict:
        return {
            "kind": self.kind,
            "ac": [[float(x), float(w)] for x, w in self.ac_samples],
            "points": [[float(x), float(m)] for x, m in self.points],
            "frozen_band": None if self.frozen_band is None else [float(v) for v in self.frozen_band],
            "provenance": self.provenance,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True)

    @classmethod
    def from_dict(cls, doc: dict) -> "SpectralMeasure":
        band = doc.get("frozen_band")
        return cls(
            kind=doc["kind"],
            ac_samples=[tuple(r) for r in doc.get("ac", [])],
            points=[tuple(r) for r in doc.get("points", [])],
            frozen_band=None if band is None else tuple(band),
            provenance=doc.get("provenance", {}),
        )

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        if self.ac_samples:
            w.writerow([f"# {self.kind} ac"])
            w.writerow(["x", "density"])
            for x, d in self.ac_samples:
                w.writerow([_fmt(x), _fmt(d)])
        if self.points or not self.ac_samples:
            w.writerow([f"# {self.kind} points"])
            w.writerow(["x", "mass"])
            for x, m in self.points:
                w.writerow([_fmt(x), _fmt(m)])
        return buf.getvalue()


def _band_angle_integral(xs: np.ndarray, ys: np.ndarray, band) -> float:
    """int y dx over a band, integrated in theta with x = c + r cos(theta).

    The integrand y(x(theta)) r sin(theta) is smooth and even-periodic when y
    carries the square-root edge behaviour, so trapezoid on a uniform theta
    grid converges spectrally; other grids fall back to Simpson in theta.
    """
    lo, hi = band
    c, r = 0.5 * (lo + hi), 0.5 * (hi - lo)
    theta = np.arccos(np.clip((xs - c) / r, -1.0, 1.0))
    order = np.argsort(theta)
    theta, ys = theta[order], ys[order]
    h = ys * r * np.sin(theta)
    dt = np.diff(theta)
    covers = theta[0] < 1e-12 and abs(theta[-1] - math.pi) < 1e-12
    if covers and np.allclose(dt, dt.mean(), rtol=1e-9, atol=1e-13):
        return float(np.trapezoid(h, theta))
    return float(simpson(h, x=theta))


# --------------------------------------------------------------------------
# AC regime


def ac_cutoff(seq: CoefficientSequence, x, run: int = 32, n_limit: int = 1 << 22) -> np.ndarray:
    """Per x, the last index N whose band misses x, once ``run`` later indices
    are all in band with non-decreasing margin 1 - |u_n|."""
    x = np.atleast_1d(np.asarray(x, dtype=float))
    out = np.full(x.shape, -1, dtype=np.int64)
    todo = np.arange(x.size)
    n_hi = 1024
    while todo.size:
        n = np.arange(1, n_hi + 1)
        c = 1.0 / (2.0 * np.sqrt(seq.a(n) * seq.a(n + 1)))
        u = (x[todo, None] - seq.b(n)[None, :]) * c[None, :]
        margin = 1.0 - np.abs(u)
        out_band = margin < 0
        last = np.where(out_band.any(axis=1), n_hi - np.argmax(out_band[:, ::-1], axis=1), 0)
        tail = margin[:, -run:]
        ok = (n_hi - last >= run) & np.all(np.diff(tail, axis=1) >= 0, axis=1)
        out[todo[ok]] = last[ok]
        todo = todo[~ok]
        if todo.size and n_hi >= n_limit:
            raise RegimeMismatchError(
                f"no in-band run found up to n={n_limit} for x={x[todo[0]]}; is |d| < 1?"
            )
        n_hi *= 2
    return out


def _log_offband_product(seq: CoefficientSequence, x: np.ndarray, cutoff: np.ndarray) -> np.ndarray:
    """log prod_{n <= N(x)} |rho(u_n(x))|^2 (in-band factors are 1)."""
    out = np.zeros(x.shape)
    n_top = int(cutoff.max()) if cutoff.size else 0
    if n_top <= 0:
        return out
    n = np.arange(1, n_top + 1)
    c = 1.0 / (2.0 * np.sqrt(seq.a(n) * seq.a(n + 1)))
    bn = seq.b(n)
    for j in np.nonzero(cutoff > 0)[0]:
        m = cutoff[j]
        u = (x[j] - bn[:m]) * c[:m]
        out[j] = 2.0 * np.sum(np.log(np.abs(rho_array(u + 0j, boundary=True))))
    return out


@dataclass
class DensityValue:
    x: float
    density: float
    g: complex
    n_used: int
    converged: bool
    cutoff: int
    warnings: list = field(default_factory=list)


def _require_ac(seq: CoefficientSequence) -> float:
    d = _d(seq)
    if not abs(d) < 1.0:
        raise RegimeMismatchError(f"AC density needs |d| < 1, estimated d = {d:.6g}")
    return d


def ac_density_batch(
    seq: CoefficientSequence,
    x,
    tol: float = 1e-6,
    n_max: int = DEFAULT_N_MAX,
    threads: int | None = None,
    check: bool = True,
) -> list[DensityValue]:
    """Density of the spectral measure at real points, to relative error ``tol``.

    Only |g| enters, so the limit is monitored (and extrapolated) in modulus
    with relative tolerance tol/2, since d(density)/density = -2 d|g|/|g|.
    """
    d = _require_ac(seq)
    x = np.atleast_1d(np.asarray(x, dtype=float))
    cutoff = ac_cutoff(seq, x)
    logprod = _log_offband_product(seq, x, cutoff)
    k = math.sqrt(1.0 - d * d) / (float(seq.a(1)) * math.pi) * np.exp(-logprod)
    lvs = eval_g_batch(
        seq, x + 0j, tol=0.5 * tol, n_max=n_max, boundary=True, relative=True, second_kind=False,
        threads=threads, check=check, monitor="modulus", extrapolate=True,
    )
    out = []
    for j, lv in enumerate(lvs):
        dens = float(k[j] / abs(lv.g) ** 2)
        out.append(DensityValue(float(x[j]), dens, lv.g, lv.n_used, lv.converged, int(cutoff[j]), lv.warnings))
    return out


def ac_density(seq: CoefficientSequence, x: float, tol: float = 1e-6, n_max: int = DEFAULT_N_MAX, **kw) -> float:
    return ac_density_batch(seq, [x], tol=tol, n_max=n_max, **kw)[0].density


def ac_measure(
    seq: CoefficientSequence,
    grid,
    tol: float = 1e-6,
    n_max: int = DEFAULT_N_MAX,
    threads: int | None = None,
) -> SpectralMeasure:
    vals = ac_density_batch(seq, grid, tol=tol, n_max=n_max, threads=threads)
    n_used = [v.n_used for v in vals]
    return SpectralMeasure(
        kind=AC,
        ac_samples=[(v.x, v.density) for v in vals],
        provenance={
            "sequence": seq.to_dict(),
            "tol": tol,
            "n_max": n_max,
            "n_used_range": [min(n_used), max(n_used)] if n_used else [],
            "non_converged": sum(not v.converged for v in vals),
        },
    )


# --------------------------------------------------------------------------
# discrete regime


def _require_discrete(seq: CoefficientSequence) -> float:
    d = _d(seq)
    if not abs(d) > 1.0:
        raise RegimeMismatchError(f"point spectrum search needs |d| > 1, estimated d = {d:.6g}")
    return d


class _ScaledLimit:
    """G_n(x) = phi_n / prod_{s}^{n-1} t1 on a real interval whose bands all end
    before index s, so every factor is real and G_n is real-analytic."""

    def __init__(self, seq, s, n):
        self.seq, self.s, self.n = seq, s, n
        self.table = shared_table(seq)
        self.table.ensure(n + 4)

    def __call__(self, x, second_kind=False):
        st, _ = start_batch(self.seq, np.atleast_1d(x), boundary=True, start=self.s, table=self.table)
        advance_batch(st, self.table, self.n, second_kind=second_kind)
        if second_kind:
            return st.phi.real, st.phi1.real
        return st.phi.real


def _brackets(f, grid: np.ndarray, rounds: int = 3):
    """Sign-change brackets of f on ``grid``; intervals around interior local
    minima of |f| without a sign change are subdivided a few times."""
    grid = np.unique(grid)
    vals = f(grid)
    for _ in range(rounds):
        av = np.abs(vals)
        sc = np.sign(vals[:-1]) * np.sign(vals[1:]) <= 0
        dip = np.zeros(grid.size, bool)
        dip[1:-1] = (av[1:-1] < av[:-2]) & (av[1:-1] < av[2:])
        near = ~(np.r_[False, sc] | np.r_[sc, False])
        sus = np.nonzero(dip & near)[0]
        if sus.size == 0:
            break
        new = np.concatenate([np.linspace(grid[i - 1], grid[i + 1], 9)[1:-1] for i in sus])
        grid = np.concatenate([grid, new])
        order = np.argsort(grid)
        grid = grid[order]
        vals = np.concatenate([vals, f(new)])[order]
        grid, keep = np.unique(grid, return_index=True)
        vals = vals[keep]
    out = []
    for i in range(grid.size - 1):
        if vals[i] == 0.0:
            out.append((grid[i], grid[i], vals[i], vals[i]))
        elif vals[i] * vals[i + 1] < 0:
            out.append((grid[i], grid[i + 1], vals[i], vals[i + 1]))
    if vals[-1] == 0.0:
        out.append((grid[-1], grid[-1], 0.0, 0.0))
    return out


def _step(x: float) -> float:
    return max(1e-6, 1e-6 * abs(x))


def _roots_and_masses(G: _ScaledLimit, brackets, xtol: float):
    roots, masses = [], []
    for lo, hi, flo, fhi in brackets:
        x0 = lo if lo == hi else brentq(lambda t: float(G(t)[0]), lo, hi, xtol=xtol, rtol=4 * np.finfo(float).eps)
        h = _step(x0)
        gm, gp = G(np.array([x0 - h, x0 + h]))
        deriv = (gp - gm) / (2 * h)
        _, g1 = G(np.array([x0]), second_kind=True)
        width = max(hi - lo, h)
        scale = abs(flo) + abs(fhi) if (flo or fhi) else 1.0
        if abs(deriv) * width / scale < 1e-8:
            raise RootError("DOUBLE_ROOT_SUSPECTED", f"|g'| vanishes at x={x0!r}")
        mass = float(g1[0] / deriv)
        if not mass > 0:
            raise RootError("NEGATIVE_MASS", f"mass {mass!r} at x={x0!r}")
        roots.append(float(x0))
        masses.append(mass)
    return roots, masses


def discrete_spectrum(
    seq: CoefficientSequence,
    lo: float,
    hi: float,
    tol: float = 1e-12,
    n_max: int = DEFAULT_N_MAX,
    seed_size: int = 2000,
    grid_points: int = 64,
    check: bool = True,
) -> list[tuple[float, float]]:
    """Atoms (x_i, mass_i) of the spectral measure inside [lo, hi].

    Zeros of g are bracketed on a grid seeded with truncated-matrix
    eigenvalues, polished by Brent's method, and recomputed with the
    evaluation depth doubled until roots agree to ``tol`` (relative) and
    masses to 1e-8 (relative).
    """
    if not hi > lo:
        raise ValueError("need lo < hi")
    if check:
        _require_discrete(seq)
    s = last_band_index(seq, lo, hi) + 1
    a, b = seq.arrays(seed_size + 1)
    eig, _ = tridiag_eigs(b[:seed_size], a[1:seed_size], weights=False, select="v", select_range=(lo, hi))
    seeds = eig[(eig > lo) & (eig < hi)]
    mids = 0.5 * (seeds[1:] + seeds[:-1])
    grid = np.concatenate([[lo, hi], np.linspace(lo, hi, grid_points), mids])

    n = max(1024, 4 * s)
    prev = None
    while True:
        G = _ScaledLimit(seq, s, n)
        br = _brackets(G, grid)
        roots, masses = _roots_and_masses(G, br, xtol=tol * max(1.0, abs(lo), abs(hi)) * 1e-3)
        if prev is not None and len(prev[0]) == len(roots):
            r0, m0 = np.array(prev[0]), np.array(prev[1])
            r1, m1 = np.array(roots), np.array(masses)
            if np.all(np.abs(r1 - r0) <= tol * np.maximum(1.0, np.abs(r1))) and np.all(
                np.abs(m1 - m0) <= 1e-8 * m1
            ):
                break
        if 2 * n > n_max:
            warnings.warn(
                f"point spectrum not stable at n_max={n_max}", RuntimeWarning, stacklevel=2
            )
            break
        prev = (roots, masses)
        n *= 2
    return list(zip(roots, masses))


def discrete_measure(seq: CoefficientSequence, lo: float, hi: float, tol: float = 1e-12, **kw) -> SpectralMeasure:
    pts = discrete_spectrum(seq, lo, hi, tol=tol, **kw)
    return SpectralMeasure(
        kind=DISCRETE,
        points=pts,
        provenance={"sequence": seq.to_dict(), "interval": [lo, hi], "tol": tol},
    )


# --------------------------------------------------------------------------
# frozen coefficients


def _poly_pair(seq: CoefficientSequence, n0: int, x: np.ndarray):
    """p, p', p^1 at orders n0 - 1 and n0 by the plain recurrence."""
    a, b = seq.arrays(n0 + 1)
    x = np.asarray(x, dtype=float)
    p_prev, p = np.zeros_like(x), np.ones_like(x)
    d_prev, d = np.zeros_like(x), np.zeros_like(x)
    q_prev, q = np.zeros_like(x), np.zeros_like(x)
    for n in range(n0):
        pn = ((x - b[n]) * p - a[n] * p_prev) / a[n + 1]
        dn = (p + (x - b[n]) * d - a[n] * d_prev) / a[n + 1]
        qn = np.full_like(x, 1.0 / a[1]) if n == 0 else ((x - b[n]) * q - a[n] * q_prev) / a[n + 1]
        p_prev, p, d_prev, d, q_prev, q = p, pn, d, dn, q, qn
    return (p_prev, p), (d_prev, d), (q_prev, q)


def _inv_rho_real(u: np.ndarray) -> np.ndarray:
    """1/rho(u) for real |u| >= 1, i.e. u - sign(u) sqrt(u^2 - 1)."""
    return u - np.sign(u) * np.sqrt(np.maximum(u * u - 1.0, 0.0))


class _FrozenPhi:
    def __init__(self, seq, n0):
        self.seq, self.n0 = seq, n0
        self.a0, self.c = float(seq.a(n0)), float(seq.b(n0))

    def u(self, x):
        return (np.asarray(x, dtype=float) - self.c) / (2.0 * self.a0)

    def band_modulus2(self, x):
        """|phi_{n0}(x + i0)|^2 on the band."""
        (pm, p), _, _ = _poly_pair(self.seq, self.n0, x)
        u = np.clip(self.u(x), -1.0, 1.0)
        inv = u - 1j * np.sqrt((1.0 - u) * (1.0 + u))
        return np.abs(p - inv * pm) ** 2

    def density(self, x):
        x = np.asarray(x, dtype=float)
        a0, c = self.a0, self.c
        inside = np.abs(x - c) <= 2.0 * a0
        out = np.zeros(x.shape)
        xi = x[inside]
        out[inside] = np.sqrt(np.maximum(4 * a0 * a0 - (xi - c) ** 2, 0.0)) / (
            2.0 * self.band_modulus2(xi) * a0 * a0 * math.pi
        )
        return out

    def off_band(self, x, second_kind=False):
        """phi (and phi', phi^1) at real x outside the band."""
        x = np.asarray(x, dtype=float)
        (pm, p), (dm, dp), (qm, q) = _poly_pair(self.seq, self.n0, x)
        u = self.u(x)
        inv = _inv_rho_real(u)
        phi = p - inv * pm
        if not second_kind:
            return phi
        rho = 1.0 / inv
        dinv = -1.0 / (2.0 * self.a0 * rho * (rho - u))
        dphi = dp - inv * dm - dinv * pm
        return phi, dphi, q - inv * qm


def _theta_rule(fp: _FrozenPhi, m: int):
    """Nodes and weights of a trapezoid rule in theta for the band part."""
    theta = (np.arange(m) + 0.5) * math.pi / m
    x = fp.c + 2.0 * fp.a0 * np.cos(theta)
    w = (2.0 / math.pi) * np.sin(theta) ** 2 / fp.band_modulus2(x) * (math.pi / m)
    return x, w


def _frozen_atoms(seq: CoefficientSequence, fp: _FrozenPhi, seed_pad: int = 400):
    lo, hi = fp.c - 2.0 * fp.a0, fp.c + 2.0 * fp.a0
    n = np.arange(0, fp.n0 + 2)
    a = np.where(n == 0, 0.0, seq.a(np.maximum(np.minimum(n, fp.n0), 1)))
    bb = seq.b(np.minimum(n, fp.n0))
    R = float(np.max(np.abs(bb[:-1]) + a[:-1] + a[1:])) * (1 + 1e-9) + 1e-9
    size = fp.n0 + seed_pad
    idx = np.arange(size)
    diag = seq.b(np.minimum(idx, fp.n0))
    off = seq.a(np.minimum(idx[1:], fp.n0))
    eig, _ = tridiag_eigs(diag, off, weights=False)
    atoms = []
    for side_lo, side_hi in ((-R, lo), (hi, R)):
        if side_hi - side_lo <= 0:
            continue
        seeds = eig[(eig > side_lo) & (eig < side_hi)]
        # geometric refinement toward the band edge, where phi has a square-root branch
        edge = side_hi if side_hi == lo else side_lo
        width = side_hi - side_lo
        geo = edge + np.sign(side_lo + side_hi - 2 * edge) * width * np.geomspace(1e-12, 1.0, 200)
        grid = np.concatenate([np.linspace(side_lo, side_hi, 257), geo, seeds,
                               0.5 * (seeds[1:] + seeds[:-1])])
        grid = grid[(grid >= side_lo) & (grid <= side_hi)]
        f = fp.off_band
        for blo, bhi, flo, fhi in _brackets(f, grid):
            if blo == bhi:
                x0 = blo
            else:
                x0 = brentq(lambda t: float(f(np.array([t]))[0]), blo, bhi, xtol=1e-15, rtol=4 * np.finfo(float).eps)
            if x0 in (lo, hi):
                continue
            _, dphi, phi1 = fp.off_band(np.array([x0]), second_kind=True)
            scale = abs(flo) + abs(fhi) if (flo or fhi) else 1.0
            if abs(dphi[0]) * max(bhi - blo, 1e-12) / scale < 1e-8 and blo != bhi:
                raise RootError("DOUBLE_ROOT_SUSPECTED", f"frozen phi has a flat zero at x={x0!r}")
            mass = float(phi1[0] / dphi[0])
            if not mass > 0:
                raise RootError("NEGATIVE_MASS", f"mass {mass!r} at x={x0!r}")
            atoms.append((float(x0), mass))
    atoms.sort()
    return atoms


def frozen_measure(
    seq: CoefficientSequence,
    n0: int,
    grid=None,
    samples: int = 2049,
) -> SpectralMeasure:
    """Measure of the sequence with coefficients frozen from index ``n0`` on.

    Without ``grid`` the band is sampled at ``samples`` points uniform in the
    angle theta (x = centre + 2 a cos theta), which makes
    ``SpectralMeasure.integrate`` spectrally accurate.
    """
    n0 = int(n0)
    if n0 < 1:
        raise ValueError("n0 must be >= 1")
    fp = _FrozenPhi(seq, n0)
    lo, hi = fp.c - 2.0 * fp.a0, fp.c + 2.0 * fp.a0
    if grid is None:
        theta = np.linspace(math.pi, 0.0, samples)
        xs = fp.c + 2.0 * fp.a0 * np.cos(theta)
        xs[0], xs[-1] = lo, hi
    else:
        xs = np.asarray(grid, dtype=float)
        xs = xs[(xs >= lo) & (xs <= hi)]
    dens = fp.density(xs)
    atoms = _frozen_atoms(seq, fp)
    return SpectralMeasure(
        kind=FROZEN,
        ac_samples=list(zip(xs.tolist(), dens.tolist())),
        points=atoms,
        frozen_band=(lo, hi),
        provenance={"sequence": seq.to_dict(), "n0": n0},
    )


def frozen_moments(seq: CoefficientSequence, n0: int, k_max: int, quad_points: int | None = None) -> np.ndarray:
    """Moments int x^k dmu^{n0}, k = 0..k_max (band by angle quadrature plus atoms)."""
    fp = _FrozenPhi(seq, int(n0))
    m = quad_points or max(512, 8 * (n0 + k_max))
    x, w = _theta_rule(fp, m)
    atoms = _frozen_atoms(seq, fp)
    k = np.arange(k_max + 1)
    mom = (w[None, :] * x[None, :] ** k[:, None]).sum(axis=1)
    for xa, ma in atoms:
        mom = mom + ma * xa ** k
    return mom


# --------------------------------------------------------------------------
# moments


def moments_jacobi(seq: CoefficientSequence, k: int, N: int | None = None, scale: float = 1.0) -> float:
    """(J^k)_{00} for the N x N truncation of the Jacobi matrix (of J/scale if given)."""
    k = int(k)
    if k < 0:
        raise ValueError("moment order must be >= 0")
    need = k // 2 + 2
    if N is None:
        N = need
    if N < need:
        raise ValueError(f"truncation N={N} too small for moment {k}; need N >= {need}")
    a, b = seq.arrays(N)
    diag = b[:N] / scale
    off = a[1:N] / scale
    half = (k + 1) // 2
    v = np.zeros(N)
    v[0] = 1.0
    w = v.copy()
    for i in range(half):
        nv = diag * v
        nv[:-1] += off * v[1:]
        nv[1:] += off * v[:-1]
        v = nv
        if i == k // 2 - 1:
            w = v.copy()
    if k // 2 == 0:
        w = np.zeros(N)
        w[0] = 1.0
    return float(v @ w)


def weak_convergence_check(seq: CoefficientSequence, n0_list, k_max: int) -> dict:
    """Max deviation of frozen-measure moments from (J^k)_{00}, k <= min(2 n0, k_max).

    Deviation is |frozen - exact| / max(|exact|, 1); the floor keeps
    vanishing odd moments from producing meaningless ratios.
    """
    report = {}
    for n0 in n0_list:
        n0 = int(n0)
        kk = min(2 * n0, int(k_max))
        fm = frozen_moments(seq, n0, kk)
        dev = []
        for k in range(kk + 1):
            exact = moments_jacobi(seq, k)
            dev.append(abs(fm[k] - exact) / max(abs(exact), 1.0))
        report[n0] = {"k_max": kk, "max_deviation": float(max(dev)), "deviations": [float(v) for v in dev]}
    return report
