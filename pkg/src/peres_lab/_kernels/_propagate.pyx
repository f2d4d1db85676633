# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled propagation kernels; same contract as ``_fallback``."""
import numpy as np
cimport numpy as cnp
from libc.math cimport sqrt

ctypedef double complex cplx

cnp.import_array()


cdef inline double cabs2(cplx z) nogil:
    return z.real * z.real + z.imag * z.imag


def propagate(cplx[:, :, ::1] T, cplx[:, ::1] Y0):
    cdef Py_ssize_t n = T.shape[0], d = T.shape[1], m = Y0.shape[1]
    cdef Py_ssize_t k, a, b, c, col, prev, sweep
    cdef cplx acc, proj
    cdef double nrm
    Qarr = np.empty((n + 1, d, m), dtype=np.complex128)
    Rarr = np.zeros((n, m, m), dtype=np.complex128)
    cdef cplx[:, :, ::1] Q = Qarr
    cdef cplx[:, :, ::1] R = Rarr
    cdef cplx[:, ::1] Z = np.empty((d, m), dtype=np.complex128)

    Q[0, :, :] = Y0
    with nogil:
        for k in range(n):
            for a in range(d):
                for col in range(m):
                    acc = 0
                    for b in range(d):
                        acc = acc + T[k, a, b] * Q[k, b, col]
                    Z[a, col] = acc
            for col in range(m):
                # classical Gram-Schmidt, two sweeps
                for sweep in range(2):
                    for prev in range(col):
                        proj = 0
                        for a in range(d):
                            proj = proj + Q[k + 1, a, prev].conjugate() * Z[a, col]
                        R[k, prev, col] = R[k, prev, col] + proj
                        for a in range(d):
                            Z[a, col] = Z[a, col] - proj * Q[k + 1, a, prev]
                nrm = 0.0
                for a in range(d):
                    nrm = nrm + cabs2(Z[a, col])
                nrm = sqrt(nrm)
                R[k, col, col] = nrm
                if nrm > 0.0:
                    for a in range(d):
                        Q[k + 1, a, col] = Z[a, col] / nrm
                else:
                    for a in range(d):
                        Q[k + 1, a, col] = 0
    return Qarr, Rarr


def back_substitute(cplx[:, :, ::1] R, cplx[::1] c_end):
    cdef Py_ssize_t n = R.shape[0], m = R.shape[1]
    cdef Py_ssize_t k, a, b
    cdef cplx acc
    Carr = np.empty((n + 1, m), dtype=np.complex128)
    cdef cplx[:, ::1] C = Carr
    C[n, :] = c_end
    with nogil:
        for k in range(n - 1, -1, -1):
            for a in range(m - 1, -1, -1):
                acc = C[k + 1, a]
                for b in range(a + 1, m):
                    acc = acc - R[k, a, b] * C[k, b]
                C[k, a] = acc / R[k, a, a]
    return Carr
