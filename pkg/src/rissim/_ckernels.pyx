# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled versions of the batched hot loops in :mod:`rissim._pykernels`."""

import numpy as np
cimport numpy as cnp
from libc.math cimport acos, sqrt, cos, sin

cnp.import_array()


cdef inline double _angle(double num, double energy, double imag, bint signed) noexcept nogil:
    cdef double r
    if energy == 0.0:
        return 0.0
    r = num / energy
    if r > 1.0:
        r = 1.0
    elif r < -1.0:
        r = -1.0
    r = acos(r)
    if signed and imag < 0.0:
        r = -r
    return r


def cosine_angles(H, G, bint signed=False):
    cdef const double complex[:, :, ::1] h = np.ascontiguousarray(H, dtype=np.complex128)
    cdef const double complex[:, :, ::1] g = np.ascontiguousarray(G, dtype=np.complex128)
    cdef Py_ssize_t B = h.shape[0], N = h.shape[1], T = h.shape[2], R = g.shape[2]
    if g.shape[0] != B or g.shape[1] != N:
        raise ValueError("H and G batch/reflector dimensions differ")
    phi_h_arr = np.empty((B, N), dtype=np.float64)
    phi_g_arr = np.empty((B, N), dtype=np.float64)
    cdef double[:, ::1] phi_h = phi_h_arr
    cdef double[:, ::1] phi_g = phi_g_arr
    cdef Py_ssize_t b, i, l
    cdef double re, im, m2, m, num, en, imag
    with nogil:
        for b in range(B):
            for i in range(N):
                num = 0.0
                en = 0.0
                imag = 0.0
                for l in range(T):
                    re = h[b, i, l].real
                    im = h[b, i, l].imag
                    m2 = re * re + im * im
                    m = sqrt(m2)
                    num = num + re * m
                    en = en + m2
                    imag = imag + im * m
                phi_h[b, i] = _angle(num, en, imag, signed)
                num = 0.0
                en = 0.0
                imag = 0.0
                for l in range(R):
                    re = g[b, i, l].real
                    im = g[b, i, l].imag
                    m2 = re * re + im * im
                    m = sqrt(m2)
                    num = num + re * m
                    en = en + m2
                    imag = imag - im * m
                phi_g[b, i] = _angle(num, en, imag, signed)
    return phi_h_arr, phi_g_arr


def compose(G, phases, H):
    cdef const double complex[:, :, ::1] g = np.ascontiguousarray(G, dtype=np.complex128)
    cdef const double complex[:, :, ::1] h = np.ascontiguousarray(H, dtype=np.complex128)
    cdef const double[:, ::1] p = np.ascontiguousarray(phases, dtype=np.float64)
    cdef Py_ssize_t B = h.shape[0], N = h.shape[1], T = h.shape[2], R = g.shape[2]
    if g.shape[0] != B or g.shape[1] != N or p.shape[0] != B or p.shape[1] != N:
        raise ValueError("G, phases and H batch/reflector dimensions differ")
    out_arr = np.zeros((B, R, T), dtype=np.complex128)
    cdef double[:, :, ::1] out = out_arr.view(np.float64)
    cdef Py_ssize_t b, i, k, l
    cdef double wr, wi, gr, gi, ar, ai, hr, hi
    with nogil:
        for b in range(B):
            for i in range(N):
                wr = cos(p[b, i])
                wi = sin(p[b, i])
                for k in range(R):
                    # conj(g) * w
                    gr = g[b, i, k].real
                    gi = -g[b, i, k].imag
                    ar = gr * wr - gi * wi
                    ai = gr * wi + gi * wr
                    for l in range(T):
                        hr = h[b, i, l].real
                        hi = h[b, i, l].imag
                        out[b, k, 2 * l] += ar * hr - ai * hi
                        out[b, k, 2 * l + 1] += ar * hi + ai * hr
    return out_arr


def ml_detect(Y, C, X):
    cdef const double complex[:, ::1] y = np.ascontiguousarray(Y, dtype=np.complex128)
    cdef const double complex[:, :, ::1] c = np.ascontiguousarray(C, dtype=np.complex128)
    cdef const double complex[:, ::1] x = np.ascontiguousarray(X, dtype=np.complex128)
    cdef Py_ssize_t B = c.shape[0], R = c.shape[1], T = c.shape[2], K = x.shape[0]
    if y.shape[0] != B or y.shape[1] != R or x.shape[1] != T:
        raise ValueError("Y, C and X dimensions differ")
    out_arr = np.zeros(B, dtype=np.int64)
    cdef cnp.int64_t[::1] out = out_arr
    cdef Py_ssize_t b, m, k, l, best
    cdef double d, best_d
    cdef double complex acc
    with nogil:
        for b in range(B):
            best = 0
            best_d = -1.0
            for m in range(K):
                d = 0.0
                for k in range(R):
                    acc = y[b, k]
                    for l in range(T):
                        acc = acc - c[b, k, l] * x[m, l]
                    d = d + acc.real * acc.real + acc.imag * acc.imag
                if best_d < 0.0 or d < best_d:
                    best_d = d
                    best = m
            out[b] = best
    return out_arr
