# cython: boundscheck=False, wraparound=False, cdivision=True, language_level=3
"""Compiled kernel for the space-varying direct spectral sum.

Same contract as ``_varying_np.varying_spectral_sum``.  Rows of the output
are independent, so the pixel loop parallelizes over rows; the per-pixel
accumulation order is fixed, which keeps results bit-identical at any thread
count.
"""

import numpy as np

cimport cython
from cython.parallel cimport prange
from libc.math cimport exp, fmod, pi, sqrt


def varying_spectral_sum(
    double[::1] x1,
    double[::1] x2,
    double complex[:, ::1] phase1,
    double complex[:, ::1] phase2,
    double complex[:, ::1] noise,
    double[:, ::1] log_norm,
    double[:, ::1] arg_xi,
    double[:, ::1] h_field,
    double[:, ::1] alpha_field,
    double delta,
    double amp,
    double[:, ::1] edge_width,
    int threads=0,
):
    cdef Py_ssize_t n = h_field.shape[0]
    cdef Py_ssize_t nf = noise.shape[0]
    out_arr = np.empty((n, n), dtype=np.float64)
    cdef double[:, ::1] out = out_arr
    cdef int nthreads = threads if threads > 0 else 1
    cdef Py_ssize_t i, j, p, q
    cdef double a, d, w_edge, cov, acc_re, acc0_re, amp_b
    cdef double complex c1, ph, w
    cdef bint use_cone = delta > 0.0
    cdef double alpha, half = 0.5 * pi

    for i in prange(n, nogil=True, num_threads=nthreads, schedule="static"):
        for j in range(n):
            a = -(h_field[i, j] + 1.0)
            alpha = alpha_field[i, j]
            acc_re = 0.0
            acc0_re = 0.0
            for p in range(nf):
                c1 = phase1[i, p]
                for q in range(nf):
                    amp_b = 1.0
                    if use_cone:
                        d = fmod(arg_xi[p, q] - alpha, pi)
                        if d < 0.0:
                            d = d + pi
                        if d > half:
                            d = pi - d
                        w_edge = edge_width[p, q]
                        if w_edge > 0.0:
                            # covered fraction of the bin cell: linear ramp
                            # of width w_edge centered on the cone edge
                            cov = (delta - d) / w_edge + 0.5
                            if cov <= 0.0:
                                continue
                            if cov > 1.0:
                                cov = 1.0
                            amp_b = sqrt(cov)
                        elif d > delta:
                            continue
                    amp_b = amp_b * exp(a * log_norm[p, q])
                    w = noise[p, q] * amp_b
                    ph = c1 * phase2[j, q]
                    acc_re = acc_re + ph.real * w.real - ph.imag * w.imag
                    acc0_re = acc0_re + w.real
            out[i, j] = amp * (acc_re - acc0_re)
    return out_arr
