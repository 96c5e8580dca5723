"""Residuals of the large-n asymptotics of p_n.

Inside the band (real x, |d| < 1)::

    sqrt(a_{n+1}) sqrt((1 - u_{n+1}^2) density(x)) p_n(x)
        ~ sqrt(sqrt(1 - d^2) / pi) sin(sum_{k<=n} arg t1_k + arg g(x))

with u_{n+1} = (x - b_{n+1}) / (2 sqrt(a_{n+1} a_{n+2})). Off the spectrum
phihat_n(x) ~ g(x). Both errors are expected to shrink like the epsilon tail
beyond n; the reports carry that tail for comparison.
"""
from __future__ import annotations

import json
import math
import warnings
from dataclasses import asdict, dataclass

import numpy as np

from .coeffs import CoefficientSequence, epsilon_tail
from .engine import run
from .limits import eval_g, eval_g_real_discrete, last_band_index
from .measures import _d, ac_cutoff, ac_density_batch, discrete_spectrum

__all__ = [
    "AsymptoticReport",
    "XOutsideBandError",
    "XTooCloseError",
    "check_band_asymptotic",
    "check_offband_asymptotic",
    "band_asymptotic_series",
    "offband_asymptotic_series",
    "to_jsonl",
]

# reference limits are computed much deeper than any checked n
_REF_N_MAX = 1 << 22


class XOutsideBandError(ValueError):
    code = "X_OUTSIDE_BAND"


class XTooCloseError(ValueError):
    code = "X_TOO_CLOSE_TO_SPECTRUM"


@dataclass
class AsymptoticReport:
    kind: str  # "band" or "offband"
    x: complex
    n: int
    lhs: complex
    rhs: complex
    residual: float
    predicted_tail: float

    def to_dict(self) -> dict:
        out = asdict(self)
        for key in ("x", "lhs", "rhs"):
            v = complex(out[key])
            out[key] = v.real if v.imag == 0 else [v.real, v.imag]
        return out


def to_jsonl(reports) -> str:
    return "".join(json.dumps(r.to_dict(), sort_keys=True) + "\n" for r in reports)


def _tail(seq: CoefficientSequence, n: int) -> float:
    t = epsilon_tail(seq, n, max(10 * n, 1024)).total
    return float(t) if math.isfinite(t) else math.inf


# --------------------------------------------------------------------------
# band


def band_asymptotic_series(
    seq: CoefficientSequence,
    x: float,
    ns,
    g_tol: float = 1e-10,
) -> list[AsymptoticReport]:
    """Band residuals at every n in ``ns`` for one real x (g computed once)."""
    d = _d(seq)
    if not abs(d) < 1.0:
        raise XOutsideBandError(f"band asymptotic needs |d| < 1, estimated d = {d:.6g}")
    x = float(x)
    ns = sorted(int(n) for n in ns)
    cutoff = int(ac_cutoff(seq, [x])[0])
    if ns[0] <= cutoff:
        raise XOutsideBandError(f"x={x!r} is outside band {cutoff}; need n > {cutoff}")
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        lv = eval_g(seq, x, tol=g_tol, n_max=_REF_N_MAX, boundary=True, second_kind=False)
        dens = ac_density_batch(seq, [x], tol=g_tol, n_max=_REF_N_MAX)[0].density
    amp = math.sqrt(math.sqrt(1.0 - d * d) / math.pi)
    arg_g = math.atan2(lv.g.imag, lv.g.real)
    states = run(seq, x, ns[-1], checkpoints=ns, boundary=True, track=True)
    out = []
    for st in states:
        n = st.n
        a1, a2 = float(seq.a(n + 1)), float(seq.a(n + 2))
        u = (x - float(seq.b(n + 1))) / (2.0 * math.sqrt(a1 * a2))
        lhs = math.sqrt(a1) * math.sqrt(max(1.0 - u * u, 0.0) * dens) * st.p().real
        rhs = amp * math.sin(st.phase + arg_g)
        out.append(AsymptoticReport("band", x, n, lhs, rhs, abs(lhs - rhs), _tail(seq, n + 1)))
    return out


def check_band_asymptotic(seq: CoefficientSequence, x: float, n: int, **kw) -> AsymptoticReport:
    return band_asymptotic_series(seq, x, [n], **kw)[0]


# --------------------------------------------------------------------------
# off the spectrum


def _reference_g(seq, x: complex, margin: float, g_tol: float) -> complex:
    if x.imag > 0:
        with warnings.catch_warnings():
            warnings.simplefilter("ignore")
            return eval_g(seq, x, tol=g_tol, n_max=_REF_N_MAX).g
    if x.imag < 0:
        raise ValueError("x must lie in the closed upper half plane")
    d = _d(seq)
    if not abs(d) > 1.0:
        raise XTooCloseError(f"real x is inside the AC spectrum support (|d| = {abs(d):.6g} < 1)")
    xr = x.real
    last_band_index(seq, xr)  # raises if x sits in infinitely many bands
    w = max(10.0 * margin, 1.0)
    atoms = discrete_spectrum(seq, xr - w, xr + w)
    if atoms:
        dist = min(abs(xr - xa) for xa, _ in atoms)
        if dist <= margin:
            raise XTooCloseError(f"x={xr!r} is within {dist:.3g} of an atom (margin {margin:.3g})")
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        return eval_g_real_discrete(seq, xr, tol=g_tol, n_max=_REF_N_MAX).g


def offband_asymptotic_series(
    seq: CoefficientSequence,
    x,
    ns,
    margin: float | None = None,
    g_tol: float = 1e-12,
) -> list[AsymptoticReport]:
    """Residuals |phihat_n(x) - g(x)| at every n in ``ns``."""
    x = complex(x)
    if margin is None:
        margin = 1e-3 * (1.0 + abs(x))
    ns = sorted(int(n) for n in ns)
    g = _reference_g(seq, x, margin, g_tol)
    states = run(seq, x, ns[-1], checkpoints=ns, boundary=x.imag == 0, track=False)
    return [
        AsymptoticReport("offband", x, st.n, st.phi_hat, g, abs(st.phi_hat - g), _tail(seq, st.n))
        for st in states
    ]


def check_offband_asymptotic(seq: CoefficientSequence, x, n: int, **kw) -> AsymptoticReport:
    return offband_asymptotic_series(seq, x, [n], **kw)[0]


def decay_ratios(reports) -> np.ndarray:
    """residual(n_{k+1}) / residual(n_k) along a series."""
    r = np.array([rep.residual for rep in reports])
    with np.errstate(divide="ignore", invalid="ignore"):
        return r[1:] / r[:-1]
