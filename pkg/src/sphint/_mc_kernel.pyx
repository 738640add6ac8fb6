# cython: boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled Monte-Carlo kernels: per-sample Gram-Schmidt + tilt exponents.

Same contract as ``_mc_numpy``; selected by ``sphint._backend`` at import.
"""

import numpy as np

cimport numpy as cnp
from libc.math cimport sqrt

NAME = "compiled"


def exponents_diag(z, eta, thetas, double pref):
    z = np.ascontiguousarray(z)
    eta = np.ascontiguousarray(eta, dtype=np.float64)
    thetas = np.ascontiguousarray(thetas, dtype=np.float64)
    out = np.empty(z.shape[0], dtype=np.float64)
    if z.dtype == np.float64:
        _exponents_diag_f64(z, eta, thetas, pref, out)
    elif z.dtype == np.complex128:
        _exponents_diag_c128(z, eta, thetas, pref, out)
    else:
        raise TypeError(f"unsupported dtype {z.dtype}")
    return out


def orthonormalize_batch(z):
    z = np.ascontiguousarray(z)
    if z.dtype == np.float64:
        _mgs_f64(z)
    elif z.dtype == np.complex128:
        _mgs_c128(z)
    else:
        raise TypeError(f"unsupported dtype {z.dtype}")
    return z


cdef void _mgs_block_f64(double[:, ::1] v) noexcept nogil:
    cdef Py_ssize_t n = v.shape[0], m = v.shape[1]
    cdef Py_ssize_t i, j, r
    cdef double proj, nrm
    for i in range(m):
        for j in range(i):
            proj = 0.0
            for r in range(n):
                proj += v[r, j] * v[r, i]
            for r in range(n):
                v[r, i] -= proj * v[r, j]
        nrm = 0.0
        for r in range(n):
            nrm += v[r, i] * v[r, i]
        nrm = sqrt(nrm)
        for r in range(n):
            v[r, i] /= nrm


cdef void _mgs_block_c128(double complex[:, ::1] v) noexcept nogil:
    cdef Py_ssize_t n = v.shape[0], m = v.shape[1]
    cdef Py_ssize_t i, j, r
    cdef double complex proj
    cdef double nrm
    for i in range(m):
        for j in range(i):
            proj = 0.0
            for r in range(n):
                proj += v[r, j].conjugate() * v[r, i]
            for r in range(n):
                v[r, i] -= proj * v[r, j]
        nrm = 0.0
        for r in range(n):
            nrm += v[r, i].real * v[r, i].real + v[r, i].imag * v[r, i].imag
        nrm = sqrt(nrm)
        for r in range(n):
            v[r, i] /= nrm


def _mgs_f64(double[:, :, ::1] z):
    cdef Py_ssize_t b
    with nogil:
        for b in range(z.shape[0]):
            _mgs_block_f64(z[b])


def _mgs_c128(double complex[:, :, ::1] z):
    cdef Py_ssize_t b
    with nogil:
        for b in range(z.shape[0]):
            _mgs_block_c128(z[b])


def _exponents_diag_f64(double[:, :, ::1] z, double[::1] eta, double[::1] thetas,
                        double pref, double[::1] out):
    cdef Py_ssize_t b, i, r
    cdef Py_ssize_t n = z.shape[1], m = z.shape[2]
    cdef double q, s
    with nogil:
        for b in range(z.shape[0]):
            _mgs_block_f64(z[b])
            s = 0.0
            for i in range(m):
                q = 0.0
                for r in range(n):
                    q += eta[r] * z[b, r, i] * z[b, r, i]
                s += thetas[i] * q
            out[b] = pref * s


def _exponents_diag_c128(double complex[:, :, ::1] z, double[::1] eta, double[::1] thetas,
                         double pref, double[::1] out):
    cdef Py_ssize_t b, i, r
    cdef Py_ssize_t n = z.shape[1], m = z.shape[2]
    cdef double q, s
    with nogil:
        for b in range(z.shape[0]):
            _mgs_block_c128(z[b])
            s = 0.0
            for i in range(m):
                q = 0.0
                for r in range(n):
                    q += eta[r] * (z[b, r, i].real * z[b, r, i].real + z[b, r, i].imag * z[b, r, i].imag)
                s += thetas[i] * q
            out[b] = pref * s
