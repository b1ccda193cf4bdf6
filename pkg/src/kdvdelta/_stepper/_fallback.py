"""Numpy reference implementation of the stepper stage kernels.

Complex products are spelled out on split re/im float64 arrays rather
than with numpy's complex multiply: the complex ufunc is SIMD-fused
(FMA contraction) and its rounding depends on the dispatch path, while
separate float64 multiplies/adds are each exactly rounded everywhere.
The compiled kernels replicate these evaluation trees term by term
(built with -ffp-contract=off); keep the two files in sync.

Canonical trees (componentwise unless written as a full product):
  cmul(x, y): re = xr*yr - xi*yi, im = xr*yi + xi*yr
  scale_spectrum  = cmul(g, w)
  stage_b_in      = cmul(E, v + 0.5*a)
  stage_c_in      = cmul(E, v) + 0.5*b
  stage_d_in      = cmul(E2, v) + cmul(E, c)
  rk_combine      = cmul(E2, v)
                    + ((cmul(E2, a) + 2*cmul(E, b + c)) + d) * (1/6)
"""

import numpy as np


def _pack(re, im):
    out = np.empty(re.shape, dtype=np.complex128)
    out.real = re
    out.imag = im
    return out


def _cmul_parts(xr, xi, yr, yi):
    return xr * yr - xi * yi, xr * yi + xi * yr


def square_real(u):
    return u * u


def scale_spectrum(g, w):
    re, im = _cmul_parts(g.real, g.imag, w.real, w.imag)
    return _pack(re, im)


def stage_b_in(E, v, a):
    sr = v.real + 0.5 * a.real
    si = v.imag + 0.5 * a.imag
    re, im = _cmul_parts(E.real, E.imag, sr, si)
    return _pack(re, im)


def stage_c_in(E, v, b):
    tr, ti = _cmul_parts(E.real, E.imag, v.real, v.imag)
    return _pack(tr + 0.5 * b.real, ti + 0.5 * b.imag)


def stage_d_in(E2, v, E, c):
    pr, pi = _cmul_parts(E2.real, E2.imag, v.real, v.imag)
    qr, qi = _cmul_parts(E.real, E.imag, c.real, c.imag)
    return _pack(pr + qr, pi + qi)


def rk_combine(E, E2, v, a, b, c, d):
    c6 = 1.0 / 6.0
    pr, pi = _cmul_parts(E2.real, E2.imag, v.real, v.imag)
    q1r, q1i = _cmul_parts(E2.real, E2.imag, a.real, a.imag)
    q2r, q2i = _cmul_parts(E.real, E.imag, b.real + c.real, b.imag + c.imag)
    qr = q1r + 2.0 * q2r + d.real
    qi = q1i + 2.0 * q2i + d.imag
    return _pack(pr + qr * c6, pi + qi * c6)
