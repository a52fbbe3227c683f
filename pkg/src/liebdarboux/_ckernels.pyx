# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled hot kernels: double-double 3x3 solves, Hermitian 3x3
eigenvalues and the Dormand-Prince integrator for the reduced system.

Built with -ffp-contract=off so the error-free transformations below are
not rewritten by the compiler.
"""
import numpy as np
cimport numpy as cnp

from libc.math cimport fma, sqrt, fabs, tanh, acos, cos, pow, isfinite

from .errors import AlgebraicDegeneracy
from .ode import IntegrationError

cnp.import_array()

BACKEND = "cython"

cdef extern from "complex.h" nogil:
    double cabs(double complex)
    double creal(double complex)
    double cimag(double complex)
    double complex conj(double complex)

cdef double PI = 3.14159265358979323846
cdef double DEGENERACY_RTOL = 1e-8

# ---------------------------------------------------------------------------
# double-double

ctypedef struct dd:
    double hi
    double lo

ctypedef struct cdd:
    dd re
    dd im

cdef inline dd two_sum(double a, double b) noexcept nogil:
    cdef dd r
    cdef double bb
    r.hi = a + b
    bb = r.hi - a
    r.lo = (a - (r.hi - bb)) + (b - bb)
    return r

cdef inline dd quick_two_sum(double a, double b) noexcept nogil:
    cdef dd r
    r.hi = a + b
    r.lo = b - (r.hi - a)
    return r

cdef inline dd dd_add(dd a, dd b) noexcept nogil:
    cdef dd s = two_sum(a.hi, b.hi)
    cdef dd t = two_sum(a.lo, b.lo)
    cdef double e = s.lo + t.hi
    s = quick_two_sum(s.hi, e)
    e = s.lo + t.lo
    return quick_two_sum(s.hi, e)

cdef inline dd dd_neg(dd a) noexcept nogil:
    cdef dd r
    r.hi = -a.hi
    r.lo = -a.lo
    return r

cdef inline dd dd_sub(dd a, dd b) noexcept nogil:
    return dd_add(a, dd_neg(b))

cdef inline dd dd_mul(dd a, dd b) noexcept nogil:
    cdef double p = a.hi * b.hi
    cdef double e = fma(a.hi, b.hi, -p)
    e = e + (a.hi * b.lo + a.lo * b.hi)
    return quick_two_sum(p, e)

cdef inline dd dd_from(double a) noexcept nogil:
    cdef dd r
    r.hi = a
    r.lo = 0.0
    return r

cdef inline dd dd_div(dd a, dd b) noexcept nogil:
    cdef double q1 = a.hi / b.hi
    cdef dd r = dd_sub(a, dd_mul(b, dd_from(q1)))
    cdef double q2 = r.hi / b.hi
    r = dd_sub(r, dd_mul(b, dd_from(q2)))
    cdef double q3 = r.hi / b.hi
    cdef dd q = quick_two_sum(q1, q2)
    return dd_add(q, dd_from(q3))

cdef inline cdd c_from(double complex z) noexcept nogil:
    cdef cdd r
    r.re = dd_from(creal(z))
    r.im = dd_from(cimag(z))
    return r

cdef inline cdd c_add(cdd a, cdd b) noexcept nogil:
    cdef cdd r
    r.re = dd_add(a.re, b.re)
    r.im = dd_add(a.im, b.im)
    return r

cdef inline cdd c_sub(cdd a, cdd b) noexcept nogil:
    cdef cdd r
    r.re = dd_sub(a.re, b.re)
    r.im = dd_sub(a.im, b.im)
    return r

cdef inline cdd c_neg(cdd a) noexcept nogil:
    cdef cdd r
    r.re = dd_neg(a.re)
    r.im = dd_neg(a.im)
    return r

cdef inline cdd c_mul(cdd a, cdd b) noexcept nogil:
    cdef cdd r
    r.re = dd_sub(dd_mul(a.re, b.re), dd_mul(a.im, b.im))
    r.im = dd_add(dd_mul(a.re, b.im), dd_mul(a.im, b.re))
    return r

cdef inline cdd c_div(cdd a, cdd b) noexcept nogil:
    cdef dd den = dd_add(dd_mul(b.re, b.re), dd_mul(b.im, b.im))
    cdef cdd bc
    bc.re = b.re
    bc.im = dd_neg(b.im)
    cdef cdd num = c_mul(a, bc)
    cdef cdd r
    r.re = dd_div(num.re, den)
    r.im = dd_div(num.im, den)
    return r

cdef inline double complex c_round(cdd a) noexcept nogil:
    return (a.re.hi + a.re.lo) + 1j * (a.im.hi + a.im.lo)


cdef void adj_det(const double complex* u, cdd* adj, cdd* det) noexcept nogil:
    # adj is row-major 3x3
    cdef cdd e[9]
    cdef int i, j, r0, r1, c0, c1
    cdef cdd minor
    for i in range(3):
        for j in range(3):
            e[3 * i + j] = c_from(u[3 * i + j])
    for i in range(3):
        for j in range(3):
            r0 = 1 if j == 0 else 0
            r1 = 1 if j == 2 else 2
            c0 = 1 if i == 0 else 0
            c1 = 1 if i == 2 else 2
            minor = c_sub(c_mul(e[3 * r0 + c0], e[3 * r1 + c1]),
                          c_mul(e[3 * r0 + c1], e[3 * r1 + c0]))
            adj[3 * i + j] = minor if (i + j) % 2 == 0 else c_neg(minor)
    det[0] = c_add(c_add(c_mul(e[0], adj[0]), c_mul(e[1], adj[3])), c_mul(e[2], adj[6]))


cdef void times_adj(const double complex* b, cdd* adj, cdd det,
                    double complex* out) noexcept nogil:
    cdef int i, j
    cdef cdd acc
    for i in range(3):
        for j in range(3):
            acc = c_add(c_add(c_mul(c_from(b[3 * i]), adj[j]),
                              c_mul(c_from(b[3 * i + 1]), adj[3 + j])),
                        c_mul(c_from(b[3 * i + 2]), adj[6 + j]))
            out[3 * i + j] = c_round(c_div(acc, det))


def _as_stack(a):
    a = np.ascontiguousarray(a, dtype=np.complex128)
    if a.shape[-2:] != (3, 3):
        raise ValueError(f"expected (..., 3, 3) array, got {a.shape}")
    return a


def log_derivative(u, du, d2u=None):
    """``(du @ inv(u), d2u @ inv(u) or None, det(u))`` in double-double."""
    u = _as_stack(u)
    du = _as_stack(du)
    shape = u.shape
    cdef Py_ssize_t n = u.size // 9, k
    cdef const double complex[:, :, ::1] uu = u.reshape(n, 3, 3)
    cdef const double complex[:, :, ::1] dv = du.reshape(n, 3, 3)
    w_arr = np.empty((n, 3, 3), dtype=np.complex128)
    det_arr = np.empty(n, dtype=np.complex128)
    cdef double complex[:, :, ::1] w = w_arr
    cdef double complex[::1] dt = det_arr
    cdef const double complex[:, :, ::1] d2v
    cdef double complex[:, :, ::1] w2
    cdef bint second = d2u is not None
    w2_arr = None
    if second:
        d2v = _as_stack(d2u).reshape(n, 3, 3)
        w2_arr = np.empty((n, 3, 3), dtype=np.complex128)
        w2 = w2_arr
    cdef cdd adj[9]
    cdef cdd det
    with nogil:
        for k in range(n):
            adj_det(&uu[k, 0, 0], adj, &det)
            times_adj(&dv[k, 0, 0], adj, det, &w[k, 0, 0])
            if second:
                times_adj(&d2v[k, 0, 0], adj, det, &w2[k, 0, 0])
            dt[k] = c_round(det)
    out_w2 = None if w2_arr is None else w2_arr.reshape(shape)
    return w_arr.reshape(shape), out_w2, det_arr.reshape(shape[:-2])[()]


def inverse_det(u):
    """``(inv(u), det(u))`` with the adjugate and division in double-double."""
    u = _as_stack(u)
    shape = u.shape
    cdef Py_ssize_t n = u.size // 9, k
    cdef const double complex[:, :, ::1] uu = u.reshape(n, 3, 3)
    eye = np.ascontiguousarray(np.broadcast_to(np.eye(3, dtype=np.complex128), (n, 3, 3)))
    cdef const double complex[:, :, ::1] ev = eye
    inv_arr = np.empty((n, 3, 3), dtype=np.complex128)
    det_arr = np.empty(n, dtype=np.complex128)
    cdef double complex[:, :, ::1] iv = inv_arr
    cdef double complex[::1] dt = det_arr
    cdef cdd adj[9]
    cdef cdd det
    with nogil:
        for k in range(n):
            adj_det(&uu[k, 0, 0], adj, &det)
            times_adj(&ev[k, 0, 0], adj, det, &iv[k, 0, 0])
            dt[k] = c_round(det)
    return inv_arr.reshape(shape), det_arr.reshape(shape[:-2])[()]


# ---------------------------------------------------------------------------
# Hermitian 3x3 eigenvalues

cdef inline void charpoly(double d0, double d1, double d2, double p01, double p02,
                          double p12, double cross, double* f, double* df) noexcept nogil:
    f[0] = d0 * d1 * d2 + 2 * cross - d0 * p12 - d1 * p02 - d2 * p01
    df[0] = -(d1 * d2 + d0 * d2 + d0 * d1) + p12 + p02 + p01


def eigvalsh3(a):
    """Sorted eigenvalues of Hermitian ``(..., 3, 3)`` matrices."""
    a = _as_stack(a)
    shape = a.shape[:-2]
    cdef Py_ssize_t n = a.size // 9, k
    cdef const double complex[:, :, ::1] av = a.reshape(n, 3, 3)
    out_arr = np.empty((n, 3), dtype=np.float64)
    cdef double[:, ::1] out = out_arr
    cdef double a00, a11, a22, p01, p02, p12, cross, q, d0, d1, d2, p, r, phi
    cdef double f, df, fc, dfc, lam, cand, tmp
    cdef double ev[3]
    cdef int it, j
    with nogil:
        for k in range(n):
            a00 = creal(av[k, 0, 0])
            a11 = creal(av[k, 1, 1])
            a22 = creal(av[k, 2, 2])
            p01 = cabs(av[k, 0, 1]) ** 2
            p02 = cabs(av[k, 0, 2]) ** 2
            p12 = cabs(av[k, 1, 2]) ** 2
            cross = creal(av[k, 0, 1] * av[k, 1, 2] * conj(av[k, 0, 2]))
            q = (a00 + a11 + a22) / 3
            d0 = a00 - q
            d1 = a11 - q
            d2 = a22 - q
            p = sqrt((d0 * d0 + d1 * d1 + d2 * d2 + 2 * (p01 + p02 + p12)) / 6)
            charpoly(d0, d1, d2, p01, p02, p12, cross, &f, &df)
            if p > 0:
                r = f / (2 * p * p * p)
            else:
                r = f / 2.0
            if r < -1.0:
                r = -1.0
            elif r > 1.0:
                r = 1.0
            phi = acos(r) / 3
            ev[2] = q + 2 * p * cos(phi)
            ev[0] = q + 2 * p * cos(phi + 2 * PI / 3)
            ev[1] = 3 * q - ev[2] - ev[0]
            for j in range(3):
                lam = ev[j]
                for it in range(3):
                    charpoly(a00 - lam, a11 - lam, a22 - lam, p01, p02, p12, cross, &f, &df)
                    if df != 0:
                        cand = lam + f / df
                    else:
                        cand = lam
                    charpoly(a00 - cand, a11 - cand, a22 - cand, p01, p02, p12, cross, &fc, &dfc)
                    if isfinite(cand) and fabs(fc) < fabs(f):
                        lam = cand
                ev[j] = lam
            if ev[0] > ev[1]:
                tmp = ev[0]; ev[0] = ev[1]; ev[1] = tmp
            if ev[1] > ev[2]:
                tmp = ev[1]; ev[1] = ev[2]; ev[2] = tmp
            if ev[0] > ev[1]:
                tmp = ev[0]; ev[0] = ev[1]; ev[1] = tmp
            out[k, 0] = ev[0]
            out[k, 1] = ev[1]
            out[k, 2] = ev[2]
    return out_arr.reshape(shape + (3,))


# ---------------------------------------------------------------------------
# closed-form potentials and the reduced system

cdef int potential(int code, double* p, double x, double complex* v) noexcept nogil:
    cdef int i
    cdef double m, eps, hv, nu, sg, t, s2, den, f, mm, ts, tn, b, hs, d, g, xi, c
    cdef double sgn[3]
    for i in range(9):
        v[i] = 0
    if code == 0:
        v[5] = -1j * p[0]
        v[7] = 1j * p[0]
        return 0
    m = p[0]
    eps = p[1]
    hv = p[2]
    if code == 1:
        nu = sqrt(m * m - eps * eps) / hv
        t = tanh(nu * x)
        s2 = 1 - t * t
        den = -(m * m) / (hv * hv * nu * nu) + t * t
        f = -hv * nu * t * s2 / den
        mm = m * s2 / den
        v[1] = -1j * f
        v[3] = 1j * f
        v[5] = -1j * (m + mm)
        v[7] = 1j * (m + mm)
        return 0
    if code == 2 or code == 3:
        if code == 3:
            eps = -eps
        nu = sqrt(m * m - eps * eps) / hv
        sg = sqrt(m * (m + eps)) / hv
        ts = tanh(sg * x)
        tn = tanh(nu * x)
        b = -sqrt(m * (m - eps)) / (m + eps) + ts * tn
        hs = hv * sg
        f = eps * (-sqrt(m * (m - eps)) * ts + m * tn) / (hs * b)
        mm = m * (sqrt((m - eps) / m) - ts * tn) / b
        d = (m - eps) * (sqrt(m / (m - eps)) - ts * tn) / b
        g = m * eps * tn / (hs * b)
        v[0] = d
        v[1] = -1j * f
        v[2] = g
        v[3] = 1j * f
        v[4] = -d
        v[5] = -1j * (m + mm)
        v[6] = g
        v[7] = 1j * (m + mm)
        if code == 3:
            sgn[0] = 1
            sgn[1] = -1
            sgn[2] = 1
            for i in range(9):
                v[i] = -sgn[i // 3] * sgn[i % 3] * v[i]
        return 0
    if code == 4:
        xi = sqrt(m * m + eps * eps) / hv
        c = tanh(xi * x) / (hv * xi)
        v[1] = -1j * m * m * c
        v[3] = 1j * m * m * c
        v[2] = eps * m * c
        v[6] = eps * m * c
        return 0
    if code == 5:
        nu = sqrt(m * m - eps * eps) / hv
        c = hv * nu * tanh(nu * x)
        v[0] = -eps
        v[4] = eps
        v[1] = -1j * c
        v[3] = 1j * c
        return 0
    return -1


cdef int rhs(int code, double* p, double hv, double e, double x,
             double complex y0, double complex y1, double complex* out) noexcept nogil:
    cdef double complex v[9]
    cdef double complex den, ca, cb, k
    cdef double ae
    if potential(code, p, x, v) != 0:
        return -1
    den = e - v[8]
    ae = fabs(e)
    if cabs(den) <= DEGENERACY_RTOL * (ae if ae > 1.0 else 1.0):
        return -2
    ca = v[6] / den
    cb = v[7] / den
    k = 1j / hv
    out[0] = -k * (v[3] + v[5] * ca) * y0 + k * (e - v[4] - v[5] * cb) * y1
    out[1] = k * (e - v[0] - v[2] * ca) * y0 - k * (v[1] + v[2] * cb) * y1
    return 0


# Dormand-Prince 5(4) tableau
cdef double C2 = 1.0 / 5, C3 = 3.0 / 10, C4 = 4.0 / 5, C5 = 8.0 / 9
cdef double A21 = 1.0 / 5
cdef double A31 = 3.0 / 40, A32 = 9.0 / 40
cdef double A41 = 44.0 / 45, A42 = -56.0 / 15, A43 = 32.0 / 9
cdef double A51 = 19372.0 / 6561, A52 = -25360.0 / 2187, A53 = 64448.0 / 6561, A54 = -212.0 / 729
cdef double A61 = 9017.0 / 3168, A62 = -355.0 / 33, A63 = 46732.0 / 5247, A64 = 49.0 / 176
cdef double A65 = -5103.0 / 18656
cdef double B1 = 35.0 / 384, B3 = 500.0 / 1113, B4 = 125.0 / 192, B5 = -2187.0 / 6784, B6 = 11.0 / 84
cdef double E1 = 71.0 / 57600, E3 = -71.0 / 16695, E4 = 71.0 / 1920, E5 = -17253.0 / 339200
cdef double E6 = 22.0 / 525, E7 = -1.0 / 40


cdef int dopri(int code, double* p, double hv, double e, double x0, double x1,
               double complex* y, double rtol, double atol, double h0, long max_steps,
               long* steps_out, long* rejected_out, double* x_fail) noexcept nogil:
    cdef double span = x1 - x0
    cdef double direction, h, x, err, acc, sc, fac, ay, an
    cdef double complex k1[2]
    cdef double complex k2[2]
    cdef double complex k3[2]
    cdef double complex k4[2]
    cdef double complex k5[2]
    cdef double complex k6[2]
    cdef double complex k7[2]
    cdef double complex yt[2]
    cdef double complex yn[2]
    cdef double complex ee
    cdef long steps = 0, rejected = 0
    cdef int i, st
    steps_out[0] = 0
    rejected_out[0] = 0
    if span == 0:
        return 0
    direction = 1.0 if span > 0 else -1.0
    if h0 != 0:
        h = direction * fabs(h0)
    else:
        h = direction * (fabs(span) if fabs(span) < 1e-2 else 1e-2)
    x = x0
    st = rhs(code, p, hv, e, x, y[0], y[1], k1)
    if st != 0:
        x_fail[0] = x
        return st
    while direction * (x1 - x) > 0:
        if steps + rejected > max_steps:
            x_fail[0] = x
            return -3
        if direction * (x + h - x1) > 0:
            h = x1 - x
        for i in range(2):
            yt[i] = y[i] + h * (A21 * k1[i])
        st = rhs(code, p, hv, e, x + C2 * h, yt[0], yt[1], k2)
        if st != 0:
            x_fail[0] = x
            return st
        for i in range(2):
            yt[i] = y[i] + h * (A31 * k1[i]) + h * (A32 * k2[i])
        st = rhs(code, p, hv, e, x + C3 * h, yt[0], yt[1], k3)
        if st != 0:
            x_fail[0] = x
            return st
        for i in range(2):
            yt[i] = y[i] + h * (A41 * k1[i]) + h * (A42 * k2[i]) + h * (A43 * k3[i])
        st = rhs(code, p, hv, e, x + C4 * h, yt[0], yt[1], k4)
        if st != 0:
            x_fail[0] = x
            return st
        for i in range(2):
            yt[i] = (y[i] + h * (A51 * k1[i]) + h * (A52 * k2[i]) + h * (A53 * k3[i])
                     + h * (A54 * k4[i]))
        st = rhs(code, p, hv, e, x + C5 * h, yt[0], yt[1], k5)
        if st != 0:
            x_fail[0] = x
            return st
        for i in range(2):
            yt[i] = (y[i] + h * (A61 * k1[i]) + h * (A62 * k2[i]) + h * (A63 * k3[i])
                     + h * (A64 * k4[i]) + h * (A65 * k5[i]))
        st = rhs(code, p, hv, e, x + h, yt[0], yt[1], k6)
        if st != 0:
            x_fail[0] = x
            return st
        for i in range(2):
            yn[i] = (y[i] + h * (B1 * k1[i]) + h * (B3 * k3[i]) + h * (B4 * k4[i])
                     + h * (B5 * k5[i]) + h * (B6 * k6[i]))
        st = rhs(code, p, hv, e, x + h, yn[0], yn[1], k7)
        if st != 0:
            x_fail[0] = x
            return st
        acc = 0.0
        for i in range(2):
            ee = h * (E1 * k1[i] + E3 * k3[i] + E4 * k4[i] + E5 * k5[i] + E6 * k6[i] + E7 * k7[i])
            ay = cabs(y[i])
            an = cabs(yn[i])
            sc = atol + rtol * (ay if ay > an else an)
            acc += (cabs(ee) / sc) ** 2
        err = sqrt(acc / 2)
        if err <= 1.0:
            x = x + h
            y[0] = yn[0]
            y[1] = yn[1]
            k1[0] = k7[0]
            k1[1] = k7[1]
            steps += 1
            if err == 0:
                fac = 5.0
            else:
                fac = 0.9 * pow(err, -0.2)
                if fac > 5.0:
                    fac = 5.0
        else:
            rejected += 1
            fac = 0.9 * pow(err, -0.2)
            if fac < 0.2:
                fac = 0.2
        h = h * fac
        if fabs(h) < 1e-14 * (fabs(x) if fabs(x) > 1.0 else 1.0):
            x_fail[0] = x
            return -4
    steps_out[0] = steps
    rejected_out[0] = rejected
    return 0


def integrate_reduced(int code, params, double e, double x0, double x1, y0,
                      double rtol=1e-11, double atol=1e-13, double h0=0.0,
                      long max_steps=200_000):
    """Integrate the reduced system of a closed-form model.

    Returns ``(y(x1), accepted_steps, rejected_steps)``.
    """
    pa = np.ascontiguousarray(params, dtype=np.float64)
    if pa.size < 2:
        raise ValueError("params too short")
    cdef double[::1] pv = pa
    cdef double hv = pv[1] if code == 0 else pv[2]
    cdef double complex y[2]
    y[0] = complex(y0[0])
    y[1] = complex(y0[1])
    cdef long steps = 0, rejected = 0
    cdef double x_fail = 0
    cdef int st
    with nogil:
        st = dopri(code, &pv[0], hv, e, x0, x1, y, rtol, atol, h0, max_steps,
                   &steps, &rejected, &x_fail)
    if st == -1:
        raise ValueError(f"unknown potential code {code!r}")
    if st == -2:
        raise AlgebraicDegeneracy(e, x_fail)
    if st == -3:
        raise IntegrationError(f"step limit exceeded at x={x_fail!r}")
    if st == -4:
        raise IntegrationError(f"step size underflow at x={x_fail!r}")
    return np.array([y[0], y[1]], dtype=np.complex128), steps, rejected
