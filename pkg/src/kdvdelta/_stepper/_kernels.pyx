# cython: boundscheck=False, wraparound=False, cdivision=True, language_level=3
"""Fused stage kernels for the integrating-factor RK4 stepper.

Each function mirrors one expression in _fallback.py with the identical
floating-point evaluation tree, written out on interleaved (re, im)
doubles so no compiler complex-arithmetic shortcut (fused multiply-add,
__muldc3 NaN fixups) can change a bit.  Built with -ffp-contract=off;
see setup.py.  The canonical trees are documented in _fallback.py.
"""

import numpy as np


cdef inline double[::1] _f64(object arr):
    return arr.view(np.float64)


def square_real(object u):
    cdef double[::1] ui = u
    cdef Py_ssize_t n = ui.shape[0]
    out = np.empty(n, dtype=np.float64)
    cdef double[::1] ov = out
    cdef Py_ssize_t i
    with nogil:
        for i in range(n):
            ov[i] = ui[i] * ui[i]
    return out


def scale_spectrum(object g, object w):
    cdef double[::1] gv = _f64(g)
    cdef double[::1] wv = _f64(w)
    cdef Py_ssize_t n = gv.shape[0] // 2
    out = np.empty(n, dtype=np.complex128)
    cdef double[::1] ov = _f64(out)
    cdef Py_ssize_t i
    cdef double gr, gi, wr, wi
    with nogil:
        for i in range(n):
            gr = gv[2 * i]
            gi = gv[2 * i + 1]
            wr = wv[2 * i]
            wi = wv[2 * i + 1]
            ov[2 * i] = gr * wr - gi * wi
            ov[2 * i + 1] = gr * wi + gi * wr
    return out


def stage_b_in(object E, object v, object a):
    # E * (v + 0.5 * a)
    cdef double[::1] Ev = _f64(E)
    cdef double[::1] vv = _f64(v)
    cdef double[::1] av = _f64(a)
    cdef Py_ssize_t n = vv.shape[0] // 2
    out = np.empty(n, dtype=np.complex128)
    cdef double[::1] ov = _f64(out)
    cdef Py_ssize_t i
    cdef double sr, si, er, ei
    with nogil:
        for i in range(n):
            sr = vv[2 * i] + 0.5 * av[2 * i]
            si = vv[2 * i + 1] + 0.5 * av[2 * i + 1]
            er = Ev[2 * i]
            ei = Ev[2 * i + 1]
            ov[2 * i] = er * sr - ei * si
            ov[2 * i + 1] = er * si + ei * sr
    return out


def stage_c_in(object E, object v, object b):
    # E * v + 0.5 * b
    cdef double[::1] Ev = _f64(E)
    cdef double[::1] vv = _f64(v)
    cdef double[::1] bv = _f64(b)
    cdef Py_ssize_t n = vv.shape[0] // 2
    out = np.empty(n, dtype=np.complex128)
    cdef double[::1] ov = _f64(out)
    cdef Py_ssize_t i
    cdef double er, ei, vr, vi, t1r, t1i
    with nogil:
        for i in range(n):
            er = Ev[2 * i]
            ei = Ev[2 * i + 1]
            vr = vv[2 * i]
            vi = vv[2 * i + 1]
            t1r = er * vr - ei * vi
            t1i = er * vi + ei * vr
            ov[2 * i] = t1r + 0.5 * bv[2 * i]
            ov[2 * i + 1] = t1i + 0.5 * bv[2 * i + 1]
    return out


def stage_d_in(object E2, object v, object E, object c):
    # E2 * v + E * c
    cdef double[::1] Fv = _f64(E2)
    cdef double[::1] vv = _f64(v)
    cdef double[::1] Ev = _f64(E)
    cdef double[::1] cv = _f64(c)
    cdef Py_ssize_t n = vv.shape[0] // 2
    out = np.empty(n, dtype=np.complex128)
    cdef double[::1] ov = _f64(out)
    cdef Py_ssize_t i
    cdef double fr, fi, vr, vi, er, ei, cr, ci, t1r, t1i, t2r, t2i
    with nogil:
        for i in range(n):
            fr = Fv[2 * i]
            fi = Fv[2 * i + 1]
            vr = vv[2 * i]
            vi = vv[2 * i + 1]
            er = Ev[2 * i]
            ei = Ev[2 * i + 1]
            cr = cv[2 * i]
            ci = cv[2 * i + 1]
            t1r = fr * vr - fi * vi
            t1i = fr * vi + fi * vr
            t2r = er * cr - ei * ci
            t2i = er * ci + ei * cr
            ov[2 * i] = t1r + t2r
            ov[2 * i + 1] = t1i + t2i
    return out


def rk_combine(object E, object E2, object v, object a, object b,
               object c, object d):
    # E2 * v + (E2 * a + 2.0 * (E * (b + c)) + d) * (1.0 / 6.0)
    cdef double[::1] Ev = _f64(E)
    cdef double[::1] Fv = _f64(E2)
    cdef double[::1] vv = _f64(v)
    cdef double[::1] av = _f64(a)
    cdef double[::1] bv = _f64(b)
    cdef double[::1] cv = _f64(c)
    cdef double[::1] dv = _f64(d)
    cdef Py_ssize_t n = vv.shape[0] // 2
    out = np.empty(n, dtype=np.complex128)
    cdef double[::1] ov = _f64(out)
    cdef Py_ssize_t i
    cdef double c6 = 1.0 / 6.0
    cdef double er, ei, fr, fi, pr, pi
    cdef double q1r, q1i, sr, si, q2r, q2i, qr, qi
    with nogil:
        for i in range(n):
            er = Ev[2 * i]
            ei = Ev[2 * i + 1]
            fr = Fv[2 * i]
            fi = Fv[2 * i + 1]
            pr = fr * vv[2 * i] - fi * vv[2 * i + 1]
            pi = fr * vv[2 * i + 1] + fi * vv[2 * i]
            q1r = fr * av[2 * i] - fi * av[2 * i + 1]
            q1i = fr * av[2 * i + 1] + fi * av[2 * i]
            sr = bv[2 * i] + cv[2 * i]
            si = bv[2 * i + 1] + cv[2 * i + 1]
            q2r = er * sr - ei * si
            q2i = er * si + ei * sr
            qr = q1r + 2.0 * q2r + dv[2 * i]
            qi = q1i + 2.0 * q2i + dv[2 * i + 1]
            ov[2 * i] = pr + qr * c6
            ov[2 * i + 1] = pi + qi * c6
    return out
