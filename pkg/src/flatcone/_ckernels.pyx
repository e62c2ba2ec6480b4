# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled inner kernels; same contract as ``_pykernels``."""
import numpy as np
cimport numpy as cnp
from libc.math cimport log, atan2, hypot, exp, cos, sin, INFINITY

cnp.import_array()

from ._pykernels import NODES15, WK15, WG15

cdef double[::1] _NODES = np.ascontiguousarray(NODES15)
cdef double[::1] _WK = np.ascontiguousarray(WK15)
cdef double[::1] _WG = np.ascontiguousarray(WG15)


cdef inline double complex _log_sum_one(double complex z, double complex ref,
                                        const double[::1] args_ref,
                                        const double complex[::1] pos,
                                        const double[::1] exps,
                                        Py_ssize_t skip, double r_chart) noexcept nogil:
    cdef Py_ssize_t k, n = pos.shape[0]
    cdef double complex d, r, q, p
    cdef double modlog, arg, re = 0.0, im = 0.0, az
    cdef bint big = hypot(z.real, z.imag) > r_chart
    if big:
        az = log(hypot(z.real, z.imag))
    for k in range(n):
        if k == skip or exps[k] == 0.0:
            continue
        p = pos[k]
        d = z - p
        if big:
            q = 1.0 - p / z
            modlog = az + log(hypot(q.real, q.imag))
        else:
            modlog = log(hypot(d.real, d.imag))
        r = ref - p
        # Arg(d / r) without the division
        q = d * r.conjugate()
        arg = args_ref[k] + atan2(q.imag, q.real)
        re += exps[k] * modlog
        im += exps[k] * arg
    return re + 1j * im


def branch_log_sum(z, double complex ref, args_ref, pos, exps, Py_ssize_t skip=-1,
                   double r_chart=INFINITY):
    cdef double complex[::1] zz = np.ascontiguousarray(np.atleast_1d(np.asarray(z, dtype=complex)).ravel())
    cdef double[::1] a = np.ascontiguousarray(args_ref, dtype=float)
    cdef double complex[::1] p = np.ascontiguousarray(pos, dtype=complex)
    cdef double[::1] e = np.ascontiguousarray(exps, dtype=float)
    out = np.empty(zz.shape[0], dtype=complex)
    cdef double complex[::1] o = out
    cdef Py_ssize_t i
    with nogil:
        for i in range(zz.shape[0]):
            o[i] = _log_sum_one(zz[i], ref, a, p, e, skip, r_chart)
    return out.reshape(np.shape(z))


def gk15_segment(double complex a, double complex b, double complex ref, args_ref,
                 pos, exps, double complex log_scale, double r_chart):
    cdef double[::1] ar = np.ascontiguousarray(args_ref, dtype=float)
    cdef double complex[::1] p = np.ascontiguousarray(pos, dtype=complex)
    cdef double[::1] e = np.ascontiguousarray(exps, dtype=float)
    cdef double complex half = 0.5 * (b - a)
    cdef double complex mid = 0.5 * (a + b)
    cdef double complex ks = 0.0, gs = 0.0, f, l
    cdef double kabs = 0.0, m
    cdef Py_ssize_t i
    with nogil:
        for i in range(15):
            l = log_scale + _log_sum_one(mid + half * _NODES[i], ref, ar, p, e, -1, r_chart)
            m = exp(l.real)
            f = m * (cos(l.imag) + 1j * sin(l.imag))
            ks += _WK[i] * f
            gs += _WG[i] * f
            kabs += _WK[i] * m
    return ks * half, gs * half, kabs * hypot(half.real, half.imag)


def segment_turns(double complex a, double complex b, pos):
    cdef double complex[::1] p = np.ascontiguousarray(pos, dtype=complex)
    out = np.empty(p.shape[0], dtype=float)
    cdef double[::1] o = out
    cdef double complex q
    cdef Py_ssize_t k
    for k in range(p.shape[0]):
        q = (b - p[k]) * (a - p[k]).conjugate()
        o[k] = atan2(q.imag, q.real)
    return out


def log_derivative_values(z, pos, exps):
    cdef double complex[::1] zz = np.ascontiguousarray(np.atleast_1d(np.asarray(z, dtype=complex)).ravel())
    cdef double complex[::1] p = np.ascontiguousarray(pos, dtype=complex)
    cdef double[::1] e = np.ascontiguousarray(exps, dtype=float)
    out = np.zeros(zz.shape[0], dtype=complex)
    cdef double complex[::1] o = out
    cdef Py_ssize_t i, k
    with nogil:
        for i in range(zz.shape[0]):
            for k in range(p.shape[0]):
                if e[k] != 0.0:
                    o[i] = o[i] + e[k] / (zz[i] - p[k])
    return out.reshape(np.shape(z))
