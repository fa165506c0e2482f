# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled hot loops: pairwise kernel evaluation and cyclic Jacobi."""

import numpy as np
cimport numpy as cnp
from libc.math cimport exp, fabs, hypot, pow, sqrt

cnp.import_array()

cdef enum:
    LINEAR = 0
    POLYNOMIAL = 1
    RBF = 2
    LAPLACIAN = 3
    RATIONAL_QUADRATIC = 4


cdef inline double _entry(const double[:, ::1] a, const double[:, ::1] b,
                          Py_ssize_t i, Py_ssize_t j, int kind, double gamma,
                          int degree, double coef0, double rq_alpha) noexcept nogil:
    cdef Py_ssize_t k, p = a.shape[1]
    cdef double acc = 0.0, d
    if kind == LINEAR or kind == POLYNOMIAL:
        for k in range(p):
            acc += a[i, k] * b[j, k]
        if kind == LINEAR:
            return acc
        return pow(acc + coef0, degree)
    if kind == LAPLACIAN:
        for k in range(p):
            acc += fabs(a[i, k] - b[j, k])
        return exp(-gamma * acc)
    for k in range(p):
        d = a[i, k] - b[j, k]
        acc += d * d
    if kind == RBF:
        return exp(-gamma * acc)
    return pow(1.0 + gamma * acc / (2.0 * rq_alpha), -rq_alpha)


def pairwise(const double[:, ::1] a, const double[:, ::1] b, int kind,
             double gamma, int degree, double coef0, double rq_alpha,
             bint symmetric):
    cdef Py_ssize_t n = a.shape[0], m = b.shape[0], i, j
    out_arr = np.empty((n, m), dtype=np.float64)
    cdef double[:, ::1] out = out_arr
    cdef double v
    with nogil:
        if symmetric:
            for i in range(n):
                for j in range(i, m):
                    v = _entry(a, b, i, j, kind, gamma, degree, coef0, rq_alpha)
                    out[i, j] = v
                    out[j, i] = v
        else:
            for i in range(n):
                for j in range(m):
                    out[i, j] = _entry(a, b, i, j, kind, gamma, degree, coef0, rq_alpha)
    return out_arr


def jacobi_eig(a_in, double tol, int max_sweeps):
    """Return (eigenvalues, eigenvectors, sweeps) in unsorted order.

    sweeps is -1 when the off-diagonal norm failed to drop below
    tol * ||A||_F within max_sweeps.
    """
    a_arr = np.array(a_in, dtype=np.float64, order="C", copy=True)
    cdef double[:, ::1] a = a_arr
    cdef Py_ssize_t n = a.shape[0], p, q, k
    v_arr = np.eye(n, dtype=np.float64)
    cdef double[:, ::1] v = v_arr
    cdef double frob = 0.0, off, theta, t, c, s, apq, akp, akq
    cdef int sweep
    for p in range(n):
        for q in range(n):
            frob += a[p, q] * a[p, q]
    frob = sqrt(frob)
    cdef double target = tol * frob
    with nogil:
        for sweep in range(max_sweeps + 1):
            off = 0.0
            for p in range(n):
                for q in range(p + 1, n):
                    off += 2.0 * a[p, q] * a[p, q]
            if sqrt(off) <= target:
                break
            if sweep == max_sweeps:
                sweep = -1
                break
            for p in range(n - 1):
                for q in range(p + 1, n):
                    apq = a[p, q]
                    if apq == 0.0:
                        continue
                    theta = (a[q, q] - a[p, p]) / (2.0 * apq)
                    if theta >= 0.0:
                        t = 1.0 / (theta + hypot(theta, 1.0))
                    else:
                        t = -1.0 / (-theta + hypot(theta, 1.0))
                    c = 1.0 / sqrt(t * t + 1.0)
                    s = t * c
                    for k in range(n):
                        akp = a[k, p]
                        akq = a[k, q]
                        a[k, p] = c * akp - s * akq
                        a[k, q] = s * akp + c * akq
                    for k in range(n):
                        akp = a[p, k]
                        akq = a[q, k]
                        a[p, k] = c * akp - s * akq
                        a[q, k] = s * akp + c * akq
                    a[p, q] = 0.0
                    a[q, p] = 0.0
                    for k in range(n):
                        akp = v[k, p]
                        akq = v[k, q]
                        v[k, p] = c * akp - s * akq
                        v[k, q] = s * akp + c * akq
    return np.diag(a_arr).copy(), v_arr, sweep
