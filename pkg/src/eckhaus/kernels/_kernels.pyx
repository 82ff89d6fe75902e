# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled Fourier-space convolution and Bloch-block kernels.

Mode arrays are indexed by ``eta + M`` with ``P = 2M + 1`` rows.
"""
import numpy as np
cimport numpy as cnp

cnp.import_array()

ctypedef double complex cplx


def quad_conv(const cplx[:, ::1] U, const cplx[:, ::1] tab, const cplx[:, :, ::1] T):
    cdef Py_ssize_t P = U.shape[0], n = U.shape[1], M = (P - 1) // 2
    cdef Py_ssize_t e, p, q, i, j, l
    cdef cplx w, acc
    out = np.zeros((P, n), dtype=np.complex128)
    cdef cplx[:, ::1] o = out
    for e in range(P):
        for p in range(P):
            q = e - p + M
            if q < 0 or q >= P:
                continue
            w = tab[p, q]
            if w == 0:
                continue
            for i in range(n):
                acc = 0
                for j in range(n):
                    for l in range(n):
                        acc = acc + T[i, j, l] * U[p, j] * U[q, l]
                o[e, i] = o[e, i] + w * acc
    return out


def cubic_conv(const cplx[:, ::1] U, const cplx[:, :, ::1] tab3, const cplx[:, :, :, ::1] T4):
    cdef Py_ssize_t P = U.shape[0], n = U.shape[1], M = (P - 1) // 2
    cdef Py_ssize_t e, p, q, r, i, j, k, l
    cdef cplx w, acc
    out = np.zeros((P, n), dtype=np.complex128)
    cdef cplx[:, ::1] o = out
    for e in range(P):
        for p in range(P):
            for q in range(P):
                r = e - p - q + 2 * M
                if r < 0 or r >= P:
                    continue
                w = tab3[p, q, r]
                if w == 0:
                    continue
                for i in range(n):
                    acc = 0
                    for j in range(n):
                        for k in range(n):
                            for l in range(n):
                                acc = acc + T4[i, j, k, l] * U[p, j] * U[q, k] * U[r, l]
                    o[e, i] = o[e, i] + w * acc
    return out


def quad_bloch(const cplx[:, ::1] U, const cplx[:, ::1] tab, const cplx[:, :, ::1] T, int slot):
    """Linearisation blocks of one quadratic term; ``slot`` marks the perturbation."""
    cdef Py_ssize_t P = U.shape[0], n = U.shape[1], M = (P - 1) // 2
    cdef Py_ssize_t e, f, p, i, a, b
    cdef cplx w, acc
    out = np.zeros((P * n, P * n), dtype=np.complex128)
    cdef cplx[:, ::1] o = out
    for e in range(P):
        for f in range(P):
            p = e - f + M
            if p < 0 or p >= P:
                continue
            w = tab[p, f]
            if w == 0:
                continue
            for i in range(n):
                for a in range(n):
                    acc = 0
                    for b in range(n):
                        if slot == 0:
                            acc = acc + T[i, a, b] * U[p, b]
                        else:
                            acc = acc + T[i, b, a] * U[p, b]
                    o[e * n + i, f * n + a] = o[e * n + i, f * n + a] + w * acc
    return out


def cubic_bloch(const cplx[:, ::1] U, const cplx[:, :, ::1] tab3, const cplx[:, :, :, ::1] T4, int slot):
    cdef Py_ssize_t P = U.shape[0], n = U.shape[1], M = (P - 1) // 2
    cdef Py_ssize_t e, f, p, q, i, a, b, c
    cdef cplx w, acc
    # contract the two profile slots once: TUU[p, q, i, a]
    tuu = np.zeros((P, P, n, n), dtype=np.complex128)
    cdef cplx[:, :, :, ::1] t = tuu
    for p in range(P):
        for q in range(P):
            for i in range(n):
                for a in range(n):
                    acc = 0
                    for b in range(n):
                        for c in range(n):
                            if slot == 0:
                                acc = acc + T4[i, a, b, c] * U[p, b] * U[q, c]
                            elif slot == 1:
                                acc = acc + T4[i, b, a, c] * U[p, b] * U[q, c]
                            else:
                                acc = acc + T4[i, b, c, a] * U[p, b] * U[q, c]
                    t[p, q, i, a] = acc
    out = np.zeros((P * n, P * n), dtype=np.complex128)
    cdef cplx[:, ::1] o = out
    # f innermost so tab3[p, q, :] is read contiguously
    for p in range(P):
        for q in range(P):
            for f in range(P):
                e = p + q + f - 2 * M
                if e < 0 or e >= P:
                    continue
                w = tab3[p, q, f]
                if w == 0:
                    continue
                for i in range(n):
                    for a in range(n):
                        o[e * n + i, f * n + a] = o[e * n + i, f * n + a] + w * t[p, q, i, a]
    return out
