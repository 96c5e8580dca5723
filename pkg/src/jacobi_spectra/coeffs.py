"""Recurrence coefficient sequences, presets and hypothesis diagnostics.

Index convention throughout the package: ``a`` is indexed from 1 and ``b``
from 0, so that the polynomials obey

    a(n+1) p(n+1) + b(n) p(n) + a(n) p(n-1) = x p(n),  p(0) = 1, p(-1) = 0.
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Callable, Mapping

import numpy as np

__all__ = [
    "CoefficientSequence",
    "EpsilonTail",
    "HypothesisReport",
    "Regime",
    "preset",
    "from_json",
    "load",
    "epsilon",
    "epsilon_tail",
    "check_hypotheses",
    "frozen",
    "estimate_d",
]

PRESETS = ("hermite", "power_law", "linear_shift", "constant", "table")

# ASCII spellings accepted alongside the Greek parameter names.
_ALIASES = {
    "alpha": "α",
    "kappa": "κ",
    "gamma": "γ",
    "delta": "δ",
}


class Regime:
    AC = "AC"
    DISCRETE = "DISCRETE"
    EXCLUDED = "EXCLUDED"
    UNKNOWN = "UNKNOWN"


def _as_index(n):
    if np.isscalar(n):
        return int(n)
    return np.asarray(n, dtype=np.int64)


@dataclass(frozen=True, eq=False)
class CoefficientSequence:
    """Jacobi data ``(a_n, b_n)``.

    ``a_func`` and ``b_func`` must accept integer numpy arrays and return
    float arrays; scalar evaluation goes through the same path so repeated
    calls are bit-identical.
    """

    a_func: Callable[[np.ndarray], np.ndarray]
    b_func: Callable[[np.ndarray], np.ndarray]
    label: str = "custom"
    params: Mapping[str, Any] = field(default_factory=dict)

    def a(self, n):
        idx = _as_index(n)
        if np.any(np.asarray(idx) < 1):
            raise IndexError("a is indexed from 1")
        out = np.asarray(self.a_func(np.atleast_1d(idx)), dtype=float)
        return float(out[0]) if np.isscalar(idx) else out

    def b(self, n):
        idx = _as_index(n)
        if np.any(np.asarray(idx) < 0):
            raise IndexError("b is indexed from 0")
        out = np.asarray(self.b_func(np.atleast_1d(idx)), dtype=float)
        return float(out[0]) if np.isscalar(idx) else out

    def arrays(self, n_hi: int) -> tuple[np.ndarray, np.ndarray]:
        """Return ``(a, b)`` arrays of length ``n_hi + 1`` indexed by n.

        ``a[0]`` is a placeholder (0.0); it never enters the recurrence
        because ``p(-1) = 0``.
        """
        n = np.arange(1, n_hi + 1)
        a = np.empty(n_hi + 1)
        a[0] = 0.0
        with np.errstate(over="ignore"):
            a[1:] = self.a(n)
        b = self.b(np.arange(0, n_hi + 1))
        return a, b

    def to_dict(self) -> dict:
        if self.label == "table":
            return {"table": dict(self.params)}
        return {"preset": self.label, "params": dict(self.params)}


def _param(params: Mapping[str, Any], key: str, default=None):
    for k, v in params.items():
        if _ALIASES.get(k, k) == key:
            return float(v)
    if default is None:
        raise ValueError(f"missing parameter {key!r}")
    return float(default)


def _check_positive(seq: CoefficientSequence, n_check: int = 10_000) -> None:
    with np.errstate(over="ignore", invalid="ignore"):
        a = seq.a(np.arange(1, n_check + 1))
    bad = np.flatnonzero(~(a > 0))
    if bad.size:
        raise ValueError(f"preset {seq.label!r} produces nonpositive a({bad[0] + 1})")


def _power_fit(values: np.ndarray, first_index: int):
    """Fit ``y(n) = c * n**p + shift`` to the tail of a table.

    The exponent comes from a log-log fit of the increments over the last
    half of the table; the shift pins continuity at the last entry.
    """
    m = len(values)
    n = np.arange(first_index, first_index + m, dtype=float)
    if m < 4:
        raise ValueError("power_fit continuation needs at least 4 table entries")
    lo = m // 2
    y, x = values[lo:], n[lo:]
    dy = np.diff(y)
    if np.allclose(dy, 0.0):
        last = float(values[-1])
        return lambda k: np.full(np.shape(k), last)
    if np.any(dy == 0) or np.any(np.sign(dy) != np.sign(dy[0])):
        raise ValueError("power_fit continuation needs a strictly monotone table tail")
    xm = 0.5 * (x[1:] + x[:-1])
    # dy ≈ c p n^(p-1)
    slope, icept = np.polyfit(np.log(xm), np.log(np.abs(dy)), 1)
    p = slope + 1.0
    if abs(p) < 1e-12:
        raise ValueError("power_fit continuation: logarithmic growth is not supported")
    c = np.sign(dy[0]) * math.exp(icept) / p
    n_last = n[-1]
    shift = float(values[-1]) - c * n_last**p
    return lambda k: c * np.asarray(k, dtype=float) ** p + shift


def _table(params: Mapping[str, Any]) -> CoefficientSequence:
    try:
        a_tab = np.asarray(params["a"], dtype=float)
        b_tab = np.asarray(params["b"], dtype=float)
    except KeyError as exc:
        raise ValueError(f"table needs {exc.args[0]!r} list") from None
    rule = params.get("continuation")
    if rule is None:
        raise ValueError("table without continuation rule")
    if a_tab.size == 0 or b_tab.size == 0:
        raise ValueError("table lists must be nonempty")
    if rule == "freeze_last":
        a_tail = lambda k: np.full(np.shape(k), a_tab[-1])
        b_tail = lambda k: np.full(np.shape(k), b_tab[-1])
    elif rule == "power_fit":
        a_tail = _power_fit(a_tab, 1)
        b_tail = _power_fit(b_tab, 0)
    else:
        raise ValueError(f"unknown continuation rule {rule!r}")
    na, nb = a_tab.size, b_tab.size

    def a_func(n):
        n = np.asarray(n)
        inside = n <= na
        return np.where(inside, a_tab[np.clip(n - 1, 0, na - 1)], a_tail(n))

    def b_func(n):
        n = np.asarray(n)
        inside = n < nb
        return np.where(inside, b_tab[np.clip(n, 0, nb - 1)], b_tail(n))

    clean = {"a": a_tab.tolist(), "b": b_tab.tolist(), "continuation": rule}
    return CoefficientSequence(a_func, b_func, "table", clean)


def preset(name: str, params: Mapping[str, Any] | None = None) -> CoefficientSequence:
    """Build a named coefficient family.

    hermite       a_n = sqrt(n/2), b_n = 0
    power_law     a_n = α n^p + κ, b_n = γ n^p + δ   (κ, δ default to 0)
    linear_shift  a_n = α (n + κ), b_n = γ (n + δ)   (κ, δ default to 0)
    constant      a_n = a, b_n = b                    (b defaults to 0)
    table         explicit lists with a continuation rule
    """
    params = dict(params or {})
    if name == "hermite":
        seq = CoefficientSequence(
            lambda n: np.sqrt(np.asarray(n, dtype=float) / 2.0),
            lambda n: np.zeros(np.shape(n)),
            "hermite",
            {},
        )
    elif name == "power_law":
        al, p, ka = _param(params, "α"), _param(params, "p"), _param(params, "κ", 0)
        ga, de = _param(params, "γ"), _param(params, "δ", 0)
        if p < 0:
            raise ValueError("power_law exponent p must be nonnegative")

        def a_func(n, al=al, p=p, ka=ka):
            return al * np.asarray(n, dtype=float) ** p + ka

        def b_func(n, ga=ga, p=p, de=de):
            return ga * np.asarray(n, dtype=float) ** p + de

        seq = CoefficientSequence(
            a_func, b_func, "power_law", {"α": al, "p": p, "κ": ka, "γ": ga, "δ": de}
        )
    elif name == "linear_shift":
        al, ka = _param(params, "α"), _param(params, "κ", 0)
        ga, de = _param(params, "γ"), _param(params, "δ", 0)
        seq = CoefficientSequence(
            lambda n: al * (np.asarray(n, dtype=float) + ka),
            lambda n: ga * (np.asarray(n, dtype=float) + de),
            "linear_shift",
            {"α": al, "κ": ka, "γ": ga, "δ": de},
        )
    elif name == "constant":
        av, bv = _param(params, "a"), _param(params, "b", 0)
        seq = CoefficientSequence(
            lambda n: np.full(np.shape(n), av),
            lambda n: np.full(np.shape(n), bv),
            "constant",
            {"a": av, "b": bv},
        )
    elif name == "table":
        seq = _table(params)
    else:
        raise ValueError(f"unknown preset {name!r}; expected one of {PRESETS}")
    _check_positive(seq)
    return seq


def from_json(doc: Mapping[str, Any] | str) -> CoefficientSequence:
    """Load ``{"preset": .., "params": ..}`` or ``{"table": {...}}``."""
    if isinstance(doc, str):
        doc = json.loads(doc)
    if "table" in doc:
        return preset("table", doc["table"])
    if "preset" in doc:
        return preset(doc["preset"], doc.get("params", {}))
    raise ValueError("sequence document needs a 'preset' or 'table' key")


def load(path: str | Path) -> CoefficientSequence:
    return from_json(json.loads(Path(path).read_text()))


def frozen(seq: CoefficientSequence, n0: int) -> CoefficientSequence:
    """Coefficients held at ``a(n0), b(n0)`` for every index ``>= n0``."""
    if n0 < 1:
        raise ValueError("n0 must be >= 1")
    n0 = int(n0)
    return CoefficientSequence(
        lambda n: seq.a_func(np.minimum(np.asarray(n), n0)),
        lambda n: seq.b_func(np.minimum(np.asarray(n), n0)),
        f"frozen({seq.label},{n0})",
        {"base": seq.to_dict(), "n0": n0},
    )


# --------------------------------------------------------------------------
# variation increments


def _epsilon_terms(seq: CoefficientSequence, i: np.ndarray) -> np.ndarray:
    """The three increments making up ε_i, shape ``(3, len(i))``."""
    i = np.asarray(i, dtype=np.int64)
    with np.errstate(over="ignore", invalid="ignore", divide="ignore"):
        a0, a1, a2 = seq.a(i), seq.a(i + 1), seq.a(i + 2)
        b0, b1 = seq.b(i), seq.b(i + 1)
        return np.vstack(
            [
                np.abs(1.0 / a1 - 1.0 / a2),
                np.abs(a0 / a1 - a1 / a2),
                np.abs(b0 / a1 - b1 / a2),
            ]
        )


def epsilon(seq: CoefficientSequence, i):
    """ε_i = |1/a_{i+1} - 1/a_{i+2}| + |a_i/a_{i+1} - a_{i+1}/a_{i+2}|
    + |b_i/a_{i+1} - b_{i+1}/a_{i+2}|, for i >= 1 (scalar or array)."""
    idx = _as_index(i)
    if np.any(np.asarray(idx) < 1):
        raise ValueError("epsilon is defined for i >= 1")
    out = _epsilon_terms(seq, np.atleast_1d(idx)).sum(axis=0)
    return float(out[0]) if np.isscalar(idx) else out


@dataclass(frozen=True)
class EpsilonTail:
    partial: float  # Σ_{i=n}^{N} ε_i
    remainder: float  # extrapolated Σ_{i>N} ε_i; inf if not summable, nan if no fit
    exponent: float  # fitted decay exponent q in ε_i ~ C i^-q (nan if no fit)

    @property
    def total(self) -> float:
        r = self.remainder
        return self.partial + (0.0 if math.isnan(r) else r)


def _power_tail(n: np.ndarray, y: np.ndarray, upto: int) -> tuple[float, float]:
    """Fit ``y ≈ C n^-q`` and integrate it beyond ``upto``. Returns (remainder, q)."""
    if np.all(y == 0):
        return 0.0, math.inf
    mask = y > 0
    if mask.sum() < 4:
        return math.nan, math.nan
    slope, icept = np.polyfit(np.log(n[mask]), np.log(y[mask]), 1)
    q = -slope
    if q <= 1.0:
        return math.inf, q
    log_rem = icept + (1.0 - q) * math.log(upto + 0.5) - math.log(q - 1.0)
    return (math.exp(log_rem) if log_rem < 700.0 else math.inf), q


def epsilon_tail(seq: CoefficientSequence, n: int, N: int) -> EpsilonTail:
    """Partial sum of ε over ``[n, N]`` plus a power-law extrapolated remainder.

    The remainder is fitted on the last decade ``[max(n, N/10), N]``.
    """
    if not 1 <= n <= N:
        raise ValueError("need 1 <= n <= N")
    idx = np.arange(n, N + 1)
    eps = epsilon(seq, idx)
    partial = float(np.sum(eps))
    lo = max(n, N // 10)
    sel = idx >= lo
    if sel.sum() >= 4:
        remainder, q = _power_tail(idx[sel].astype(float), eps[sel], N)
    elif np.all(eps == 0):
        remainder, q = 0.0, math.inf
    else:
        remainder, q = math.nan, math.nan
    return EpsilonTail(partial, remainder, q)


# --------------------------------------------------------------------------
# hypothesis checks


def _fit_limit(n: np.ndarray, y: np.ndarray) -> float:
    """Least squares ``y ≈ L + c/n``; returns ``L``."""
    A = np.vstack([np.ones_like(n), 1.0 / n]).T
    coef, *_ = np.linalg.lstsq(A, y, rcond=None)
    return float(coef[0])


def estimate_d(seq: CoefficientSequence, N: int = 10_000) -> float:
    """Extrapolated limit of b_n / (2 a_{n+1}) from the last decade up to ``N``."""
    n = np.arange(max(1, N // 10), N + 1)
    with np.errstate(over="ignore", invalid="ignore"):
        r = seq.b(n) / (2.0 * seq.a(n + 1))
    ok = np.isfinite(r)
    if ok.sum() < 2:
        return math.nan
    return _fit_limit(n[ok].astype(float), r[ok])


@dataclass
class HypothesisReport:
    d_estimate: float
    ratio_limit_estimate: float
    epsilon_partial_sums: list  # [(N, Σ_{i<=N} ε_i), ...]
    summability_verdicts: list  # three of {True, False, None}
    tail_estimates: list  # extrapolated remainders for the three series
    a_diverges: bool
    carleman_diverges: bool
    hypotheses_hold: bool
    regime: str
    N: int
    warnings: list = field(default_factory=list)

    def to_dict(self) -> dict:
        return {
            "d_estimate": self.d_estimate,
            "ratio_limit_estimate": self.ratio_limit_estimate,
            "epsilon_partial_sums": [list(t) for t in self.epsilon_partial_sums],
            "summability_verdicts": self.summability_verdicts,
            "tail_estimates": self.tail_estimates,
            "a_diverges": self.a_diverges,
            "carleman_diverges": self.carleman_diverges,
            "hypotheses_hold": self.hypotheses_hold,
            "regime": self.regime,
            "N": self.N,
            "warnings": self.warnings,
        }


def _summable(n: np.ndarray, terms: np.ndarray, tol: float):
    """Tri-state summability verdict for one series and its tail estimate."""
    N = int(n[-1])
    half = N // 2
    s_full = float(terms.sum())
    s_half = float(terms[n <= half].sum())
    last = n >= max(1, N // 10)
    remainder, q = _power_tail(n[last].astype(float), terms[last], N)
    change = s_full - s_half
    if change <= tol * max(1.0, abs(s_full)):
        return True, (0.0 if math.isnan(remainder) else remainder)
    if math.isnan(q):
        return None, remainder
    if q > 1.05:
        # convergent power law: the doubling change must match the tail at N/2
        tail_half, _ = _power_tail(n[last].astype(float), terms[last], half)
        if change <= 2.0 * tail_half:
            return True, remainder
        return None, remainder
    if q < 0.95:
        return False, math.inf
    return None, remainder


def check_hypotheses(
    seq: CoefficientSequence,
    N: int = 10_000,
    tol: float = 1e-6,
    exclusion: float = 1e-3,
) -> HypothesisReport:
    """Numerically test the growth and summability conditions behind the limit functions.

    Verdicts that cannot be settled from the first ``N`` terms are reported
    as ``None`` and push the regime to UNKNOWN; nothing is guessed.
    """
    if N < 100:
        raise ValueError("check_hypotheses needs N >= 100")
    warnings: list[str] = []
    with np.errstate(over="ignore", invalid="ignore", divide="ignore"):
        a_all = seq.a(np.arange(1, N + 3))
    finite = np.isfinite(a_all)
    if not finite.all():
        N_eff = int(np.argmin(finite)) - 2
        warnings.append(f"a overflows beyond n={N_eff + 2}; truncated to N={N_eff}")
        N = N_eff
        if N < 20:
            raise ValueError("sequence overflows before enough terms are available")
    n = np.arange(1, N + 1)
    last = n >= max(1, N // 10)

    a = seq.a(n)
    with np.errstate(over="ignore", invalid="ignore"):
        ratio = seq.a(n) / seq.a(n + 1)
    ratio_limit = _fit_limit(n[last].astype(float), ratio[last])

    slope = np.polyfit(np.log(n[last]), np.log(a[last]), 1)[0]
    a_diverges = bool(a[-1] > a[N // 10 - 1] and slope > 0.05)

    d = estimate_d(seq, N)

    terms = _epsilon_terms(seq, n)
    verdicts, tails = [], []
    for k in range(3):
        v, t = _summable(n, terms[k], tol)
        verdicts.append(v)
        tails.append(t)
    eps = terms.sum(axis=0)
    cums = np.cumsum(eps)
    checkpoints = sorted({int(m) for m in np.unique(np.geomspace(1, N, 24).astype(int))} | {N})
    partial_sums = [(m, float(cums[m - 1])) for m in checkpoints]

    inv_a = 1.0 / a
    carleman_tail, q = _power_tail(n[last].astype(float), inv_a[last], N)
    carleman = bool(inv_a.sum() > 10.0 and q <= 1.0 + 0.05)
    if not carleman:
        warnings.append(
            "Carleman sum of 1/a_n does not clearly diverge; determinacy is not guaranteed"
        )

    hold = bool(
        a_diverges
        and abs(ratio_limit - 1.0) < 1e-3
        and all(v is True for v in verdicts)
    )
    if abs(abs(d) - 1.0) < exclusion:
        regime = Regime.EXCLUDED
    elif not hold or not math.isfinite(d):
        regime = Regime.UNKNOWN
    elif abs(d) < 1.0:
        regime = Regime.AC
    else:
        regime = Regime.DISCRETE
    return HypothesisReport(
        d_estimate=d,
        ratio_limit_estimate=ratio_limit,
        epsilon_partial_sums=partial_sums,
        summability_verdicts=verdicts,
        tail_estimates=tails,
        a_diverges=a_diverges,
        carleman_diverges=carleman,
        hypotheses_hold=hold,
        regime=regime,
        N=N,
        warnings=warnings,
    )
