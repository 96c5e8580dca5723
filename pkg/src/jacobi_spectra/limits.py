"""Limit functions g = lim phihat_n and g1 = lim phihat^1_n.

Convergence is monitored at doubling checkpoints. A checkpoint passes when
the Cauchy difference |phihat_{2n} - phihat_n| is below tol/2 and the
estimated remainder is below tol. The remainder is the smaller of

* 4 C sum_{i > 2n} eps_i, with C fitted from the first three differences
  against the epsilon partial sums over the same ranges, and
* 2 d r / (1 - r), the geometric extrapolation of the last differences
  (r = worst of the last two difference ratios, used only when r < 0.9).

Neither estimate is trusted before three differences exist, except when eps
vanishes identically (frozen or constant tails), where the first vanishing
difference is exact.
"""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np

from .coeffs import CoefficientSequence, Regime, check_hypotheses
from .engine import CoeffTable, advance_batch, start_batch

__all__ = [
    "LimitValue",
    "NonConvergenceWarning",
    "HypothesisWarning",
    "XInBandError",
    "eval_g",
    "eval_g_batch",
    "eval_g_real_discrete",
    "last_band_index",
    "checkpoints",
]

DEFAULT_N_MAX = 2**20
_EDGE = 1e-8
_EDGE_SCAN = 4096
_RATIO_AGREE = 0.1


class NonConvergenceWarning(RuntimeWarning):
    pass


class HypothesisWarning(RuntimeWarning):
    pass


class XInBandError(ValueError):
    """x lies in the band of infinitely many indices (regime misclassified)."""

    code = "X_IN_BAND"


@dataclass
class LimitValue:
    g: complex
    g1: complex
    n_used: int
    tail_estimate: float
    converged: bool
    low_confidence: bool = False
    scale_start: int = 1
    # phihat values with products starting at scale_start (real on the real
    # axis in the discrete regime); equal to g, g1 when scale_start == 1
    g_scaled: complex = 0j
    g1_scaled: complex = 0j
    warnings: list = field(default_factory=list)


@lru_cache(maxsize=64)
def _regime(seq: CoefficientSequence) -> str:
    return check_hypotheses(seq, N=10_000).regime


def _hypothesis_warning(seq: CoefficientSequence) -> str | None:
    try:
        regime = _regime(seq)
    except (ValueError, FloatingPointError):
        regime = Regime.UNKNOWN
    if regime in (Regime.UNKNOWN, Regime.EXCLUDED):
        msg = f"HYPOTHESIS_VIOLATION: sequence {seq.label!r} has regime {regime}"
        warnings.warn(msg, HypothesisWarning, stacklevel=3)
        return msg
    return None


def checkpoints(start: int, n_max: int) -> list[int]:
    """start, then every power of two above it, then n_max if not reached."""
    out = [start]
    c = 1
    while c <= start:
        c *= 2
    while c < n_max:
        out.append(c)
        c *= 2
    if out[-1] != n_max and n_max > start:
        out.append(n_max)
    return out


def _eps_array(table: CoeffTable, n_hi: int) -> tuple[np.ndarray, np.ndarray]:
    """eps[i] for i = 0..n_hi-1 (eps[0] = 0) and its cumulative sum.

    Cached on the table, so repeated evaluations for one sequence share it.
    """
    cached = getattr(table, "_eps_cache", None)
    if cached is not None and cached[0].size >= n_hi:
        return cached[0][:n_hi], cached[1][:n_hi]
    table.ensure(n_hi)
    a, b = table.a, table.b
    i = np.arange(1, n_hi)
    with np.errstate(over="ignore", invalid="ignore", divide="ignore"):
        e = (
            np.abs(1.0 / a[i + 1] - 1.0 / a[i + 2])
            + np.abs(a[i] / a[i + 1] - a[i + 1] / a[i + 2])
            + np.abs(b[i] / a[i + 1] - b[i + 1] / a[i + 2])
        )
    eps = np.concatenate([[0.0], e])
    table._eps_cache = (eps, np.cumsum(eps))
    return table._eps_cache


def _remainder(eps: np.ndarray, N: int) -> float:
    """Power-law extrapolation of sum_{i > N} eps_i from the last decade below N."""
    lo = max(1, N // 10)
    if N - lo < 4:
        return math.inf if np.any(eps[1 : N + 1] > 0) else 0.0
    idx = np.unique(np.geomspace(lo, N, 32).astype(int))
    y = eps[idx]
    if np.all(y == 0):
        return 0.0
    if np.any(y <= 0):
        return math.inf
    slope, icept = np.polyfit(np.log(idx), np.log(y), 1)
    q = -slope
    if q <= 1.0:
        return math.inf
    return math.exp(icept) * (N + 0.5) ** (1.0 - q) / (q - 1.0)


def _near_edge(table: CoeffTable, x: np.ndarray, n_hi: int) -> np.ndarray:
    """True where |(x - b_n)/(2 sqrt(a_n a_{n+1}))| is within 1e-8 of 1 for some n <= n_hi."""
    out = np.zeros(x.shape, dtype=bool)
    real = x.imag == 0.0
    if not np.any(real):
        return out
    n_hi = min(n_hi, _EDGE_SCAN)
    table.ensure(n_hi + 2)
    n = np.arange(1, n_hi + 1)
    c = table.inv2sq[n - 1]  # 1/(2 sqrt(a_n a_{n+1}))
    u = (x.real[real, None] - table.b[n][None, :]) * c[None, :]
    out[real] = np.any(np.abs(np.abs(u) - 1.0) < _EDGE, axis=1)
    return out


def eval_g_batch(
    seq: CoefficientSequence,
    x,
    tol: float | None = None,
    n_max: int = DEFAULT_N_MAX,
    boundary: bool | None = None,
    relative: bool = False,
    second_kind: bool = True,
    start: int = 1,
    threads: int | None = None,
    check: bool = True,
    table: CoeffTable | None = None,
    monitor: str = "value",
    scale=None,
    extrapolate: bool = False,
) -> list[LimitValue]:
    """Evaluate g and g1 at every point of ``x`` (closed upper half plane).

    ``relative`` scales both tests by |phihat| instead of 1; ``scale`` is a
    callable ``(phihat, active_index) -> factor`` for anything more specific.
    ``monitor`` selects what the Cauchy test watches: the complex value
    (default) or only its modulus, for consumers that use |g| alone.

    With ``extrapolate`` (modulus only) the moduli at successive checkpoints
    are also Aitken-extrapolated once the last two difference ratios agree
    to within ``_RATIO_AGREE``; a point then passes when the last extrapolant
    moved by under tol/2 and the one before by under tol, and g is returned
    rescaled to the extrapolated modulus.
    """
    if monitor not in ("value", "modulus"):
        raise ValueError("monitor must be 'value' or 'modulus'")
    if extrapolate and monitor != "modulus":
        raise ValueError("extrapolate requires monitor='modulus'")
    x = np.atleast_1d(np.asarray(x, dtype=complex))
    if boundary is None:
        boundary = bool(np.any(x.imag == 0.0))
    if tol is None:
        tol = 1e-6 if boundary else 1e-8
    if tol <= 0:
        raise ValueError("tol must be positive")
    warn_msg = _hypothesis_warning(seq) if check else None

    state, table = start_batch(seq, x, boundary=boundary, start=start, table=table)
    table.ensure(n_max + 3)
    eps, ceps = _eps_array(table, n_max + 1)
    cps = checkpoints(start, n_max)

    nx = x.size
    res_g = np.zeros(nx, complex)
    res_g1 = np.zeros(nx, complex)
    res_n = np.zeros(nx, int)
    res_tail = np.full(nx, math.inf)
    res_conv = np.zeros(nx, bool)
    active = np.arange(nx)
    prev = state.phi.copy()
    diffs: list[np.ndarray] = []
    cfit = np.zeros(nx)
    mods: list[np.ndarray] = [np.abs(prev)]
    ext_prev = np.full(nx, np.nan)
    dext_prev = np.full(nx, np.inf)
    res_mod = np.full(nx, np.nan)
    for k, c in enumerate(cps[1:], start=1):
        advance_batch(state, table, c, second_kind=second_kind, threads=threads)
        cur = state.phi.copy()
        d = np.abs(np.abs(cur) - np.abs(prev)) if monitor == "modulus" else np.abs(cur - prev)
        diffs.append(d)
        esum = ceps[c] - ceps[cps[k - 1] - 1]
        if k <= 3:
            with np.errstate(divide="ignore", invalid="ignore"):
                ck = np.where(d == 0, 0.0, d / esum if esum > 0 else np.inf)
            cfit = np.maximum(cfit, ck)
        rem = _remainder(eps, c)
        if rem == 0.0:
            eps_bound = np.zeros(d.shape)
        elif k < 3:
            # C is not identifiable from fewer than three differences
            eps_bound = np.full(d.shape, np.inf)
        else:
            with np.errstate(invalid="ignore"):
                eps_bound = np.where(np.isfinite(cfit), 4.0 * cfit * rem, np.inf)
        if len(diffs) >= 3:
            with np.errstate(divide="ignore", invalid="ignore"):
                r1 = np.where(diffs[-2] == 0, np.where(d == 0, 0.0, np.inf), d / diffs[-2])
                r2 = np.where(
                    diffs[-3] == 0, np.where(diffs[-2] == 0, 0.0, np.inf), diffs[-2] / diffs[-3]
                )
                r = np.maximum(r1, r2)
                geo = np.where(r < 0.9, 2.0 * d * r / (1.0 - r), np.inf)
        else:
            geo = np.full(d.shape, np.inf)
        tail = np.minimum(eps_bound, geo)
        if scale is not None:
            fac = np.asarray(scale(cur, active), dtype=float)
        elif relative:
            fac = np.maximum(np.abs(cur), 1e-300)
        else:
            fac = 1.0
        passed = (d <= 0.5 * tol * fac) & (tail < tol * fac)
        ext = np.full(d.shape, np.nan)
        if extrapolate:
            mods.append(np.abs(cur))
            if len(mods) >= 4:
                e1, e2, e3 = mods[-3] - mods[-4], mods[-2] - mods[-3], mods[-1] - mods[-2]
                with np.errstate(divide="ignore", invalid="ignore"):
                    ra, rb = e2 / e1, e3 / e2
                    good = (rb > 0) & (rb < 0.9) & (np.abs(rb - ra) <= _RATIO_AGREE * np.abs(rb))
                    ext = np.where(good, mods[-1] + e3 * rb / (1.0 - rb), np.nan)
                    dext = np.abs(ext - ext_prev)
                # two consecutive agreements: a single one is often a coincidence
                ok = np.isfinite(dext) & (dext <= 0.5 * tol * fac) & (dext_prev <= tol * fac)
                tail = np.where(ok & ~passed, np.maximum(dext, dext_prev), tail)
                passed = passed | ok
                dext_prev = np.where(np.isfinite(dext), dext, np.inf)
            ext_prev = ext
        last = c == cps[-1]
        done = passed | last
        if np.any(done):
            sel = active[done]
            res_g[sel] = cur[done]
            res_g1[sel] = state.phi1_hat()[done]
            res_n[sel] = c
            res_tail[sel] = tail[done]
            res_conv[sel] = passed[done]
            res_mod[sel] = ext[done]
            keep = ~done
            active = active[keep]
            state = state.take(keep)
            cur = cur[keep]
            cfit = cfit[keep]
            diffs = [h[keep] for h in diffs]
            mods = [h[keep] for h in mods]
            ext_prev = ext_prev[keep]
            dext_prev = dext_prev[keep]
        if active.size == 0:
            break
        prev = cur

    low = _near_edge(table, x, int(res_n.max()) if nx else 0) if boundary else np.zeros(nx, bool)
    use = np.isfinite(res_mod) & (np.abs(res_g) > 0)
    res_g[use] *= res_mod[use] / np.abs(res_g[use])
    out = []
    for j in range(nx):
        w = [warn_msg] if warn_msg else []
        if not res_conv[j]:
            w.append(f"NON_CONVERGED: n_max={n_max} reached at x={x[j]}")
        lv = LimitValue(
            g=complex(res_g[j]),
            g1=complex(res_g1[j]),
            n_used=int(res_n[j]),
            tail_estimate=float(res_tail[j]),
            converged=bool(res_conv[j]),
            low_confidence=bool(low[j]),
            scale_start=start,
            g_scaled=complex(res_g[j]),
            g1_scaled=complex(res_g1[j]),
            warnings=w,
        )
        out.append(lv)
    if not res_conv.all():
        warnings.warn(
            f"{int((~res_conv).sum())} point(s) did not converge within n_max={n_max}",
            NonConvergenceWarning,
            stacklevel=2,
        )
    return out


def eval_g(
    seq: CoefficientSequence,
    x,
    tol: float | None = None,
    n_max: int = DEFAULT_N_MAX,
    boundary: bool | None = None,
    **kw,
) -> LimitValue:
    """g(x) and g1(x) at a single point of the closed upper half plane."""
    return eval_g_batch(seq, [x], tol=tol, n_max=n_max, boundary=boundary, **kw)[0]


# --------------------------------------------------------------------------
# real axis, discrete regime


def last_band_index(
    seq: CoefficientSequence,
    lo: float,
    hi: float | None = None,
    n_limit: int = 1 << 20,
    run: int = 32,
) -> int:
    """Largest n whose band [b_n - 2 sqrt(a_n a_{n+1}), b_n + 2 sqrt(a_n a_{n+1})]
    meets [lo, hi] (0 if none).

    Scanning stops after ``run`` consecutive disjoint bands whose distance to
    the interval does not shrink; raises XInBandError otherwise.
    """
    hi = lo if hi is None else hi
    n_hi = 256
    while True:
        n = np.arange(1, n_hi + 1)
        a, b = seq.a(n), seq.b(n)
        a1 = seq.a(n + 1)
        half = 2.0 * np.sqrt(a * a1)
        gap = np.maximum(b - half - hi, lo - (b + half))
        meets = gap <= 0
        last = int(n[meets][-1]) if np.any(meets) else 0
        tail_gap = gap[last:]
        if n_hi - last >= run and np.all(np.diff(tail_gap[-run:]) >= 0):
            return last
        if n_hi >= n_limit:
            raise XInBandError(
                f"[{lo}, {hi}] keeps meeting bands up to n={n_limit}; not a discrete-regime interval"
            )
        n_hi *= 2


def _t1_product(seq: CoefficientSequence, x: float, lo_idx: int, hi_idx: int) -> complex:
    from .maps import transfer

    prod = 1 + 0j
    for i in range(lo_idx, hi_idx + 1):
        prod *= transfer(seq, i, x, boundary=True).t1
    return prod


def eval_g_real_discrete(
    seq: CoefficientSequence,
    x: float,
    tol: float = 1e-8,
    n_max: int = DEFAULT_N_MAX,
    check: bool = True,
) -> LimitValue:
    """g on the real axis in the discrete regime.

    Indices past the last band containing x use real arithmetic (their t1 are
    real); the finitely many earlier factors are applied afterwards as
    boundary values from above.
    """
    x = float(x)
    N = last_band_index(seq, x)
    s = N + 1
    lv = eval_g_batch(
        seq, [x], tol=tol, n_max=max(n_max, 2 * s), boundary=True, relative=True, start=s, check=check
    )[0]
    G, G1 = lv.g_scaled, lv.g1_scaled
    if s == 1:
        return lv
    lv.g = G / _t1_product(seq, x, 1, s - 1)
    lv.g1 = G1 / _t1_product(seq, x, 2, s - 1)
    return lv
