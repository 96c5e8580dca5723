# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled inner loop of the scaled three-term recurrence.

Same contract as ``_kernel_py.advance``; see that module for the meaning of
every array. Each x is advanced independently with the GIL released.
Complex quantities are carried as (re, im) pairs of doubles. The running
log and phase sums are Kahan-compensated.
"""
from libc.math cimport sqrt, log, atan2, hypot, fabs, copysign

cdef extern from "complex.h" nogil:
    double creal(double complex)
    double cimag(double complex)


cdef inline void _rho_real(double u, double* re, double* im) noexcept nogil:
    # boundary value of rho at u + i0+
    if u > 1.0:
        re[0] = u + sqrt((u - 1.0) * (u + 1.0))
        im[0] = 0.0
    elif u < -1.0:
        re[0] = u - sqrt((u - 1.0) * (u + 1.0))
        im[0] = 0.0
    else:
        re[0] = u
        im[0] = sqrt((1.0 - u) * (1.0 + u))


cdef inline void _rho_cplx(double zr, double zi, double* re, double* im) noexcept nogil:
    # w = sqrt(z^2 - 1) on the branch with Re(conj(z) w) >= 0, i.e. |z + w| >= 1;
    # identical to sqrt(z - 1) sqrt(z + 1) off the cut
    cdef double sr, si, t, wr, wi
    if zi == 0.0:
        _rho_real(zr, re, im)
        return
    sr = (zr - zi) * (zr + zi) - 1.0
    si = 2.0 * zr * zi
    t = sqrt(0.5 * (fabs(sr) + hypot(sr, si)))
    if sr >= 0.0:
        wr = t
        wi = si / (2.0 * t)
    else:
        wr = fabs(si) / (2.0 * t)
        wi = copysign(t, si)
    if zr * wr + zi * wi < 0.0:
        wr = -wr
        wi = -wi
    re[0] = zr + wr
    im[0] = zi + wi


def advance(
    const double[::1] an,
    const double[::1] bn,
    const double[::1] inv_an1,
    const double[::1] b_next,
    const double[::1] inv2sq_next,
    const double[::1] s_next,
    const double[::1] r_next,
    const double complex[::1] x,
    bint real_axis,
    double complex[::1] p0,
    double complex[::1] p1,
    double complex[::1] q0,
    double complex[::1] q1,
    double complex[::1] phi,
    double complex[::1] phi1,
    double complex[::1] t2,
    double complex[::1] it1,
    double[::1] logs,
    double[::1] phase,
    bint second_kind,
    bint track,
):
    cdef Py_ssize_t nx = x.shape[0]
    cdef Py_ssize_t m = an.shape[0]
    cdef Py_ssize_t j, k
    cdef double xr, xi, L, PH
    cdef double p0r, p0i, p1r, p1i, q0r, q0i, q1r, q1i
    cdef double phr, phi_, ph1r, ph1i, t2r, t2i, it1r, it1i
    cdef double rr, ri, t1r, t1i, den, jr, ji, u2r, u2i, dtr, dti
    cdef double cr, ci, wr, wi, vr, vi, sc, ak
    cdef double cL, cP, ky, kt
    with nogil:
        for j in range(nx):
            xr = creal(x[j]); xi = cimag(x[j])
            p0r = creal(p0[j]); p0i = cimag(p0[j])
            p1r = creal(p1[j]); p1i = cimag(p1[j])
            q0r = creal(q0[j]); q0i = cimag(q0[j])
            q1r = creal(q1[j]); q1i = cimag(q1[j])
            phr = creal(phi[j]); phi_ = cimag(phi[j])
            ph1r = creal(phi1[j]); ph1i = cimag(phi1[j])
            t2r = creal(t2[j]); t2i = cimag(t2[j])
            it1r = creal(it1[j]); it1i = cimag(it1[j])
            L = logs[j]; PH = phase[j]
            cL = 0.0; cP = 0.0
            for k in range(m):
                if real_axis:
                    _rho_real((xr - b_next[k]) * inv2sq_next[k], &rr, &ri)
                else:
                    _rho_cplx((xr - b_next[k]) * inv2sq_next[k], xi * inv2sq_next[k], &rr, &ri)
                t1r = s_next[k] * rr
                t1i = s_next[k] * ri
                den = 1.0 / (t1r * t1r + t1i * t1i)
                jr = t1r * den          # 1/t1_{n+1}
                ji = -t1i * den
                u2r = r_next[k] * jr    # t2_{n+1}
                u2i = r_next[k] * ji
                dtr = t2r - u2r
                dti = t2i - u2i
                phr = phr + dtr * p1r - dti * p1i
                phi_ = phi_ + dtr * p1i + dti * p1r
                cr = xr - bn[k]
                ci = xi
                ak = an[k]
                sc = inv_an1[k]
                # w = c p1 - a_n p0 / t1_n ; p_{n+1} = w / (a_{n+1} t1_{n+1})
                vr = p0r * it1r - p0i * it1i
                vi = p0r * it1i + p0i * it1r
                wr = cr * p1r - ci * p1i - ak * vr
                wi = cr * p1i + ci * p1r - ak * vi
                p0r = p1r; p0i = p1i
                p1r = (wr * jr - wi * ji) * sc
                p1i = (wr * ji + wi * jr) * sc
                if second_kind:
                    ph1r = ph1r + dtr * q1r - dti * q1i
                    ph1i = ph1i + dtr * q1i + dti * q1r
                    vr = q0r * it1r - q0i * it1i
                    vi = q0r * it1i + q0i * it1r
                    wr = cr * q1r - ci * q1i - ak * vr
                    wi = cr * q1i + ci * q1r - ak * vi
                    q0r = q1r; q0i = q1i
                    q1r = (wr * jr - wi * ji) * sc
                    q1i = (wr * ji + wi * jr) * sc
                if track:
                    ky = log(hypot(t1r, t1i)) - cL
                    kt = L + ky
                    cL = (kt - L) - ky
                    L = kt
                    ky = atan2(t1i, t1r) - cP
                    kt = PH + ky
                    cP = (kt - PH) - ky
                    PH = kt
                t2r = u2r; t2i = u2i
                it1r = jr; it1i = ji
            p0[j] = p0r + 1j * p0i
            p1[j] = p1r + 1j * p1i
            q0[j] = q0r + 1j * q0i
            q1[j] = q1r + 1j * q1i
            phi[j] = phr + 1j * phi_
            phi1[j] = ph1r + 1j * ph1i
            t2[j] = t2r + 1j * t2i
            it1[j] = it1r + 1j * it1i
            logs[j] = L
            phase[j] = PH
