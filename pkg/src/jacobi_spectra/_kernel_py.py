"""Pure numpy fallback for the recurrence kernel (vectorised across x).

State arrays, one entry per x, at current index n (scale start s):

    p0, p1   p_{n-1}, p_n divided by prod_{i=s}^{n-1} t1_i, prod_{i=s}^{n} t1_i
    q0, q1   second-kind polynomials, same scaling
    phi      phi_n / prod_{i=s}^{n-1} t1_i
    phi1     second-kind analogue, same scaling
    t2, it1  t2_n and 1/t1_n
    logs     running sum of log|t1_i|
    phase    running sum of principal arg t1_i

Both running sums are compensated (Kahan) within a call.

``advance`` moves every x from n to n + len(an) in place. The coefficient
arrays are indexed by k = n' - n for each step n' -> n' + 1:

    an[k] = a_{n'}, bn[k] = b_{n'}, inv_an1[k] = 1/a_{n'+1},
    b_next[k] = b_{n'+1}, inv2sq_next[k] = 1/(2 sqrt(a_{n'+1} a_{n'+2})),
    s_next[k] = sqrt(a_{n'+1}/a_{n'+2}), r_next[k] = a_{n'+1}/a_{n'+2}.
"""
from __future__ import annotations

import cmath
import math

import numpy as np

# below this many points a plain scalar loop beats per-step numpy overhead
_SCALAR_MAX = 4


def _rho_real(u: np.ndarray) -> np.ndarray:
    out = np.empty(u.shape, dtype=complex)
    inside = np.abs(u) <= 1.0
    root = np.sqrt(np.abs((u - 1.0) * (u + 1.0)))
    out.real = np.where(inside, u, np.where(u > 0, u + root, u - root))
    out.imag = np.where(inside, root, 0.0)
    return out


def advance(
    an, bn, inv_an1, b_next, inv2sq_next, s_next, r_next,
    x, real_axis, p0, p1, q0, q1, phi, phi1, t2, it1, logs, phase,
    second_kind, track,
):
    if x.shape[0] <= _SCALAR_MAX:
        coef = [v.tolist() for v in (an, bn, inv_an1, b_next, inv2sq_next, s_next, r_next)]
        for j in range(x.shape[0]):
            out = _advance_one(
                *coef, complex(x[j]), real_axis,
                complex(p0[j]), complex(p1[j]), complex(q0[j]), complex(q1[j]),
                complex(phi[j]), complex(phi1[j]), complex(t2[j]), complex(it1[j]),
                float(logs[j]), float(phase[j]), second_kind, track,
            )
            (p0[j], p1[j], q0[j], q1[j], phi[j], phi1[j], t2[j], it1[j], logs[j], phase[j]) = out
        return
    xr, xi = x.real, x.imag
    P0, P1, Q0, Q1 = p0.copy(), p1.copy(), q0.copy(), q1.copy()
    PHI, PHI1, T2, IT1 = phi.copy(), phi1.copy(), t2.copy(), it1.copy()
    L, PH = logs.copy(), phase.copy()
    cL, cP = np.zeros_like(L), np.zeros_like(PH)
    for k in range(an.shape[0]):
        if real_axis:
            rh = _rho_real((xr - b_next[k]) * inv2sq_next[k])
        else:
            z = np.empty(x.shape, dtype=complex)
            z.real = (xr - b_next[k]) * inv2sq_next[k]
            z.imag = xi * inv2sq_next[k]
            rh = z + np.sqrt(z - 1.0) * np.sqrt(z + 1.0)
        t1m = s_next[k] * rh
        it1m = 1.0 / t1m
        t2m = r_next[k] * it1m
        dt = T2 - t2m
        PHI += dt * P1
        c = x - bn[k]
        pn = (c * P1 - an[k] * P0 * IT1) * it1m * inv_an1[k]
        P0, P1 = P1, pn
        if second_kind:
            PHI1 += dt * Q1
            qn = (c * Q1 - an[k] * Q0 * IT1) * it1m * inv_an1[k]
            Q0, Q1 = Q1, qn
        if track:
            y = np.log(np.abs(t1m)) - cL
            t = L + y
            cL = (t - L) - y
            L = t
            y = np.angle(t1m) - cP
            t = PH + y
            cP = (t - PH) - y
            PH = t
        T2, IT1 = t2m, it1m
    p0[:], p1[:], q0[:], q1[:] = P0, P1, Q0, Q1
    phi[:], phi1[:], t2[:], it1[:] = PHI, PHI1, T2, IT1
    logs[:], phase[:] = L, PH


def _advance_one(
    an, bn, inv_an1, b_next, inv2sq_next, s_next, r_next,
    x, real_axis, P0, P1, Q0, Q1, PHI, PHI1, T2, IT1, L, PH,
    second_kind, track,
):
    """Same update as ``advance`` for one x, in Python scalars."""
    xr, xi = x.real, x.imag
    cL = cP = 0.0
    for k in range(len(an)):
        if real_axis:
            u = (xr - b_next[k]) * inv2sq_next[k]
            root = math.sqrt(abs((u - 1.0) * (u + 1.0)))
            if abs(u) <= 1.0:
                rh = complex(u, root)
            else:
                rh = complex(u + root if u > 0 else u - root, 0.0)
        else:
            z = complex((xr - b_next[k]) * inv2sq_next[k], xi * inv2sq_next[k])
            rh = z + cmath.sqrt(z - 1.0) * cmath.sqrt(z + 1.0)
        t1m = s_next[k] * rh
        it1m = 1.0 / t1m
        t2m = r_next[k] * it1m
        dt = T2 - t2m
        PHI += dt * P1
        c = x - bn[k]
        P0, P1 = P1, (c * P1 - an[k] * P0 * IT1) * it1m * inv_an1[k]
        if second_kind:
            PHI1 += dt * Q1
            Q0, Q1 = Q1, (c * Q1 - an[k] * Q0 * IT1) * it1m * inv_an1[k]
        if track:
            y = math.log(abs(t1m)) - cL
            t = L + y
            cL = (t - L) - y
            L = t
            y = math.atan2(t1m.imag, t1m.real) - cP
            t = PH + y
            cP = (t - PH) - y
            PH = t
        T2, IT1 = t2m, it1m
    return P0, P1, Q0, Q1, PHI, PHI1, T2, IT1, L, PH
