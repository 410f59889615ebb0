# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled inner loops: fused residual passes over the rows of A."""
import numpy as np
cimport numpy as cnp
from libc.math cimport fabs
from libc.stdlib cimport malloc, free

cnp.import_array()


cdef inline double _sign(double v) noexcept nogil:
    return <double>((v > 0) - (v < 0))


cdef inline double _powp(double t, int p) noexcept nogil:
    if p == 2:
        return t * t
    return fabs(t)


cdef inline double _dot(const double[:, ::1] A, Py_ssize_t i,
                        const double[::1] x) noexcept nogil:
    cdef Py_ssize_t j
    cdef double acc = 0.0
    for j in range(A.shape[1]):
        acc += A[i, j] * x[j]
    return acc


def forward_map(const double[:, ::1] A, const double[::1] x, int p):
    cdef Py_ssize_t i, m = A.shape[0]
    out = np.empty(m, dtype=np.float64)
    cdef double[::1] o = out
    with nogil:
        for i in range(m):
            o[i] = _powp(_dot(A, i, x), p)
    return out


def objective(const double[:, ::1] A, const double[::1] b,
              const double[::1] x, int p):
    cdef Py_ssize_t i, m = A.shape[0]
    cdef double acc = 0.0
    with nogil:
        for i in range(m):
            acc += fabs(_powp(_dot(A, i, x), p) - b[i])
    return acc


def objective_subgradient(const double[:, ::1] A, const double[::1] b,
                          const double[::1] x, int p):
    cdef Py_ssize_t i, j, m = A.shape[0], n = A.shape[1]
    cdef double acc = 0.0, t, r, coef
    g = np.zeros(n, dtype=np.float64)
    cdef double[::1] gv = g
    with nogil:
        for i in range(m):
            t = _dot(A, i, x)
            r = _powp(t, p) - b[i]
            acc += fabs(r)
            if p == 2:
                coef = _sign(r) * 2.0 * t
            else:
                coef = _sign(r) * _sign(t)
            if coef != 0.0:
                for j in range(n):
                    gv[j] += coef * A[i, j]
    return acc, g


def abs_power_diff(const double[:, ::1] A, const double[::1] x,
                   const double[::1] y, int p):
    cdef Py_ssize_t i, m = A.shape[0]
    out = np.empty(m, dtype=np.float64)
    cdef double[::1] o = out
    with nogil:
        for i in range(m):
            o[i] = _powp(_dot(A, i, x), p) - _powp(_dot(A, i, y), p)
    return out


cdef void _select_top(double* buf, Py_ssize_t m, Py_ssize_t L) noexcept nogil:
    # Hoare quickselect: afterwards buf[:L] holds the L largest entries
    cdef Py_ssize_t lo = 0, hi = m - 1, i, j, mid
    cdef double pivot, tmp
    while lo < hi:
        mid = lo + (hi - lo) // 2
        # median of three, ordered descending
        if buf[mid] > buf[lo]:
            tmp = buf[mid]; buf[mid] = buf[lo]; buf[lo] = tmp
        if buf[hi] > buf[lo]:
            tmp = buf[hi]; buf[hi] = buf[lo]; buf[lo] = tmp
        if buf[hi] > buf[mid]:
            tmp = buf[hi]; buf[hi] = buf[mid]; buf[mid] = tmp
        pivot = buf[mid]
        i = lo
        j = hi
        while i <= j:
            while buf[i] > pivot:
                i += 1
            while buf[j] < pivot:
                j -= 1
            if i <= j:
                tmp = buf[i]; buf[i] = buf[j]; buf[j] = tmp
                i += 1
                j -= 1
        if L - 1 <= j:
            hi = j
        elif L - 1 >= i:
            lo = i
        else:
            break


def split_top(const double[::1] values, Py_ssize_t L):
    """Sum of the L largest |values| and of the remaining m - L."""
    cdef Py_ssize_t i, m = values.shape[0]
    cdef double top = 0.0, tail = 0.0
    cdef double* buf = <double*>malloc(max(m, 1) * sizeof(double))
    if buf == NULL:
        raise MemoryError()
    try:
        with nogil:
            for i in range(m):
                buf[i] = fabs(values[i])
            if 0 < L < m:
                _select_top(buf, m, L)
            for i in range(L):
                top += buf[i]
            for i in range(L, m):
                tail += buf[i]
    finally:
        free(buf)
    return top, tail
