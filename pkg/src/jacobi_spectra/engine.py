"""Forward iteration of p_n, the second-kind p^1_n and the scaled phi-hat.

Scaling: the state stores p_n / prod_{i=s}^{n} t1_i (one factor more than
phi-hat), with s = 1 by default. Dividing the phi recurrence
phi_{n+1} - t1_n phi_n = (t2_n - t2_{n+1}) p_n by prod_{i=s}^{n} t1_i gives
the telescoping update phihat_{n+1} = phihat_n + (t2_n - t2_{n+1}) phat_n.

A larger scale start ``s`` is used on the real axis in the discrete regime:
when every t1_i with i >= s is real, the scaled functions are real-analytic.
"""
from __future__ import annotations

import cmath
import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, replace
from functools import lru_cache

import numpy as np

from . import kernels
from .coeffs import CoefficientSequence
from .maps import transfer

__all__ = [
    "RecurrenceOverflow",
    "ScaledState",
    "init",
    "step",
    "run",
    "CoeffTable",
    "BatchState",
    "start_batch",
    "advance_batch",
    "resolve_threads",
]

_HUGE = 1e300


class RecurrenceOverflow(ArithmeticError):
    """The scaled state left the representable range (a convention bug, not user error)."""


@dataclass(frozen=True)
class ScaledState:
    n: int
    p_cur: complex  # p_n / prod_{1}^{n} t1
    p_prev: complex  # p_{n-1} / prod_{1}^{n-1} t1
    p1_cur: complex  # second kind, same scaling
    p1_prev: complex
    phi_hat: complex  # phi_n / prod_{1}^{n-1} t1
    phi1_hat: complex  # phi^1_n / prod_{2}^{n-1} t1
    log_scale: float  # sum_{1}^{n} log|t1_i|
    phase: float  # sum_{1}^{n} arg t1_i, principal terms
    x: complex = 0j
    boundary: bool = False
    # internal: t2_n, 1/t1_n, t1_1 and the phi^1 value scaled like phi_hat
    t2: complex = 1 + 0j
    inv_t1: complex = 1 + 0j
    t11: complex = 1 + 0j
    phi1_raw: complex = 0j

    def p(self) -> complex:
        """Unscaled p_n(x)."""
        return self.p_cur * cmath.exp(complex(self.log_scale, self.phase))

    def p_second(self) -> complex:
        """Unscaled p^1_n(x)."""
        return self.p1_cur * cmath.exp(complex(self.log_scale, self.phase))


def init(seq: CoefficientSequence, x, boundary: bool = False) -> ScaledState:
    """State at n = 0: p_0 = 1, p_{-1} = 0, p^1_0 = 0."""
    x = complex(x)
    if boundary and x.imag == 0.0:
        x = complex(x.real, 0.0)
    return ScaledState(0, 1 + 0j, 0j, 0j, 0j, 1 + 0j, 0j, 0.0, 0.0, x, boundary)


def step(state: ScaledState, seq: CoefficientSequence, x=None) -> ScaledState:
    """Advance one index. Pure Python; the batch kernels are the fast path."""
    if x is not None and complex(x) != state.x:
        raise ValueError("state was built for a different x")
    x, bd, n = state.x, state.boundary, state.n
    nxt = transfer(seq, n + 1, x, boundary=bd)
    inv_t1m = 1.0 / nxt.t1
    if n == 0:
        # the t_{i,0} = 1 convention does not satisfy the phi recurrence at n = 0
        a1 = seq.a(1)
        p1 = (x - seq.b(0)) / a1
        q1 = 1.0 / a1
        new = replace(
            state,
            n=1,
            p_cur=p1 * inv_t1m,
            p_prev=1 + 0j,
            p1_cur=q1 * inv_t1m,
            p1_prev=0j,
            phi_hat=p1 - nxt.t2,
            phi1_hat=complex(q1),
            phi1_raw=complex(q1),
            log_scale=math.log(abs(nxt.t1)),
            phase=nxt.arg_t1,
            t2=nxt.t2,
            inv_t1=inv_t1m,
            t11=nxt.t1,
        )
    else:
        an, an1, bn = seq.a(n), seq.a(n + 1), seq.b(n)
        dt = state.t2 - nxt.t2
        phi = state.phi_hat + dt * state.p_cur
        phi1_raw = state.phi1_raw + dt * state.p1_cur
        pn = ((x - bn) * state.p_cur - an * state.p_prev * state.inv_t1) * inv_t1m / an1
        qn = ((x - bn) * state.p1_cur - an * state.p1_prev * state.inv_t1) * inv_t1m / an1
        new = replace(
            state,
            n=n + 1,
            p_cur=pn,
            p_prev=state.p_cur,
            p1_cur=qn,
            p1_prev=state.p1_cur,
            phi_hat=phi,
            phi1_hat=phi1_raw * state.t11,
            phi1_raw=phi1_raw,
            log_scale=state.log_scale + math.log(abs(nxt.t1)),
            phase=state.phase + nxt.arg_t1,
            t2=nxt.t2,
            inv_t1=inv_t1m,
        )
    if not (math.isfinite(abs(new.p_cur)) and abs(new.p_cur) < _HUGE):
        raise RecurrenceOverflow(f"scaled p_n left the representable range at n={new.n}")
    return new


# --------------------------------------------------------------------------
# batch path


class CoeffTable:
    """Per-index coefficient arrays consumed by the kernels (grown on demand)."""

    def __init__(self, seq: CoefficientSequence, n_hi: int = 1024):
        self.seq = seq
        self._build(max(16, int(n_hi)))

    def _build(self, n_hi: int) -> None:
        a, b = self.seq.arrays(n_hi + 2)
        self.a, self.b, self.n_hi = a, b, n_hi
        n = np.arange(0, n_hi)
        self.an = a[n].copy()
        self.bn = b[n].copy()
        with np.errstate(divide="ignore"):
            self.inv_an1 = 1.0 / a[n + 1]
        self.b_next = b[n + 1].copy()
        self.inv2sq = 1.0 / (2.0 * np.sqrt(a[n + 1] * a[n + 2]))
        self.s_next = np.sqrt(a[n + 1] / a[n + 2])
        self.r_next = a[n + 1] / a[n + 2]

    def ensure(self, n_to: int) -> None:
        if n_to > self.n_hi:
            self._build(max(2 * self.n_hi, n_to))

    def segment(self, n_from: int, n_to: int):
        self.ensure(n_to)
        sl = slice(n_from, n_to)
        return (
            self.an[sl], self.bn[sl], self.inv_an1[sl], self.b_next[sl],
            self.inv2sq[sl], self.s_next[sl], self.r_next[sl],
        )


@lru_cache(maxsize=16)
def shared_table(seq: CoefficientSequence) -> CoeffTable:
    """One growing table per sequence, reused across evaluations."""
    return CoeffTable(seq)


@dataclass
class BatchState:
    """Scaled state for many x values sharing one index n."""

    x: np.ndarray
    real_axis: bool
    start: int
    n: int
    p0: np.ndarray
    p1: np.ndarray
    q0: np.ndarray
    q1: np.ndarray
    phi: np.ndarray
    phi1: np.ndarray
    t2: np.ndarray
    it1: np.ndarray
    logs: np.ndarray
    phase: np.ndarray
    t11: np.ndarray  # t1 at the scale start index

    _FIELDS = ("x", "p0", "p1", "q0", "q1", "phi", "phi1", "t2", "it1", "logs", "phase", "t11")

    def take(self, idx) -> "BatchState":
        kw = {f: getattr(self, f)[idx].copy() for f in self._FIELDS}
        return BatchState(real_axis=self.real_axis, start=self.start, n=self.n, **kw)

    def phi1_hat(self) -> np.ndarray:
        """phi^1 with the product starting at max(2, start)."""
        if self.start == 1 and self.n >= 2:
            return self.phi1 * self.t11
        return self.phi1.copy()

    def to_state(self, j: int) -> ScaledState:
        if self.start != 1:
            raise ValueError("ScaledState snapshots use the default scale start")
        return ScaledState(
            n=self.n,
            p_cur=complex(self.p1[j]),
            p_prev=complex(self.p0[j]),
            p1_cur=complex(self.q1[j]),
            p1_prev=complex(self.q0[j]),
            phi_hat=complex(self.phi[j]),
            phi1_hat=complex(self.phi1[j] * (self.t11[j] if self.n >= 2 else 1.0)),
            log_scale=float(self.logs[j]),
            phase=float(self.phase[j]),
            x=complex(self.x[j]),
            boundary=self.real_axis,
            t2=complex(self.t2[j]),
            inv_t1=complex(self.it1[j]),
            t11=complex(self.t11[j]),
            phi1_raw=complex(self.phi1[j]),
        )


def _rho_batch(z: np.ndarray, real_axis: bool) -> np.ndarray:
    if real_axis:
        return kernels._kernel_py._rho_real(z.real)
    return z + np.sqrt(z - 1.0) * np.sqrt(z + 1.0)


def _t_at(table: CoeffTable, n: int, x: np.ndarray, real_axis: bool):
    a, b = table.a, table.b
    z = np.empty(x.shape, dtype=complex)
    c = 1.0 / (2.0 * math.sqrt(a[n] * a[n + 1]))
    z.real = (x.real - b[n]) * c
    z.imag = x.imag * c
    t1 = math.sqrt(a[n] / a[n + 1]) * _rho_batch(z, real_axis)
    return t1, (a[n] / a[n + 1]) / t1


def start_batch(
    seq: CoefficientSequence,
    x,
    boundary: bool = False,
    start: int = 1,
    table: CoeffTable | None = None,
) -> tuple[BatchState, CoeffTable]:
    """Batch state at n = ``start`` (>= 1); products of t1 begin at ``start``."""
    if start < 1:
        raise ValueError("scale start must be >= 1")
    x = np.atleast_1d(np.asarray(x, dtype=complex)).copy()
    if boundary:
        x.imag = np.where(x.imag == 0.0, 0.0, x.imag)
        real_axis = bool(np.all(x.imag == 0.0))
    else:
        real_axis = False
        if np.any(x.imag <= 0.0):
            raise ValueError("x must lie in the open upper half plane unless boundary=True")
    if table is None:
        table = shared_table(seq)
    table.ensure(start + 4)
    a, b = table.a, table.b
    # unscaled p_{s-1}, p_s and the second kind by the plain recurrence
    pm, pc = np.zeros_like(x), np.ones_like(x)
    qm, qc = np.zeros_like(x), np.zeros_like(x)
    for n in range(0, start):
        pn = ((x - b[n]) * pc - a[n] * pm) / a[n + 1]
        qn = (1.0 / a[1]) * np.ones_like(x) if n == 0 else ((x - b[n]) * qc - a[n] * qm) / a[n + 1]
        pm, pc, qm, qc = pc, pn, qc, qn
    if not (np.all(np.isfinite(pc)) and np.all(np.abs(pc) < _HUGE)):
        raise RecurrenceOverflow(f"unscaled start values overflow at scale start {start}")
    t1, t2 = _t_at(table, start, x, real_axis)
    it1 = 1.0 / t1
    state = BatchState(
        x=x,
        real_axis=real_axis,
        start=start,
        n=start,
        p0=pm.copy(),
        p1=pc * it1,
        q0=qm.copy(),
        q1=qc * it1,
        phi=pc - t2 * pm,
        phi1=qc - t2 * qm,
        t2=t2,
        it1=it1,
        logs=np.log(np.abs(t1)),
        phase=np.angle(t1),
        t11=t1.copy(),
    )
    return state, table


def resolve_threads(threads: int | None) -> int:
    if threads is None:
        threads = int(os.environ.get("JACOBI_SPECTRA_THREADS", "1") or 1)
    if threads <= 0:
        threads = os.cpu_count() or 1
    return threads


def advance_batch(
    state: BatchState,
    table: CoeffTable,
    n_to: int,
    second_kind: bool = True,
    track: bool = False,
    threads: int | None = None,
    backend: str | None = None,
) -> BatchState:
    """Advance ``state`` in place to index ``n_to``."""
    if n_to < state.n:
        raise ValueError("cannot step backwards")
    if n_to == state.n or state.x.size == 0:
        state.n = n_to
        return state
    seg = table.segment(state.n, n_to)
    adv = kernels.get_advance(backend)
    threads = min(resolve_threads(threads), state.x.size)

    def work(lo: int, hi: int) -> None:
        sl = slice(lo, hi)
        adv(
            *seg, state.x[sl], state.real_axis,
            state.p0[sl], state.p1[sl], state.q0[sl], state.q1[sl],
            state.phi[sl], state.phi1[sl], state.t2[sl], state.it1[sl],
            state.logs[sl], state.phase[sl], second_kind, track,
        )

    if threads <= 1:
        work(0, state.x.size)
    else:
        bounds = np.linspace(0, state.x.size, threads + 1).astype(int)
        with ThreadPoolExecutor(threads) as pool:
            list(pool.map(lambda k: work(bounds[k], bounds[k + 1]), range(threads)))
    state.n = n_to
    mag = np.abs(state.p1)
    if not np.all(np.isfinite(mag) & (mag < _HUGE)):
        bad = int(np.argmax(~(np.isfinite(mag) & (mag < _HUGE))))
        raise RecurrenceOverflow(
            f"scaled p_n left the representable range near n={n_to} at x={state.x[bad]}"
        )
    return state


def run(
    seq: CoefficientSequence,
    x,
    n_max: int,
    checkpoints=None,
    boundary: bool = False,
    track: bool = True,
) -> list[ScaledState]:
    """Iterate to ``n_max``; return snapshots at ``checkpoints`` (default: powers of two)."""
    if n_max < 1:
        raise ValueError("n_max must be >= 1")
    if checkpoints is None:
        checkpoints = [2**k for k in range(int(math.log2(n_max)) + 1)]
        if checkpoints[-1] != n_max:
            checkpoints.append(n_max)
    checkpoints = sorted({int(c) for c in checkpoints if 1 <= c <= n_max})
    state, table = start_batch(seq, [x], boundary=boundary)
    table.ensure(n_max + 2)
    out = []
    for c in checkpoints:
        advance_batch(state, table, c, track=track)
        out.append(state.to_state(0))
    return out
