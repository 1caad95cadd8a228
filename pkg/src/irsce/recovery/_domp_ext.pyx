# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled DOMP core. Same contract as ``_domp_py.domp_core``.

The joint correlation is one ZGEMM (shared base) or K ZGEMVs, and the
Gram-Schmidt projections are ZGEMVs. The residual update and
back-substitution are plain loops.
"""
import numpy as np

from libc.math cimport sqrt
from scipy.linalg.cython_blas cimport zgemm, zgemv

ctypedef double complex cplx


cdef inline double cabs2(cplx z) nogil:
    return z.real * z.real + z.imag * z.imag


cdef inline cplx cconj(cplx z) nogil:
    return z.real - 1j * z.imag


def domp_core(const cplx[:, :, ::1] base, const cplx[:, ::1] weights,
              const double[:, ::1] sel, const cplx[:, ::1] y, double eps, int max_iter, double dep_tol=1e-10):
    cdef int K = y.shape[0]
    cdef int n_p = y.shape[1]
    cdef int G = base.shape[2]
    cdef bint shared = base.shape[0] == 1

    r_arr = np.array(y, dtype=np.complex128, copy=True)
    rc_arr = np.empty((K, n_p), dtype=np.complex128)
    S_arr = np.empty((K, G), dtype=np.complex128)
    score_arr = np.empty(G, dtype=np.float64)
    taken_arr = np.zeros(G, dtype=np.uint8)
    Q_arr = np.zeros((K, max(max_iter, 1), n_p), dtype=np.complex128)
    R_arr = np.zeros((K, max(max_iter, 1), max(max_iter, 1)), dtype=np.complex128)
    support_arr = np.empty(max(max_iter, 1), dtype=np.intp)
    hist_arr = np.empty(max_iter + 1, dtype=np.float64)
    v_arr = np.empty(n_p, dtype=np.complex128)
    col_arr = np.empty(n_p, dtype=np.complex128)
    c_arr = np.empty(max(max_iter, 1), dtype=np.complex128)

    cdef cplx[:, ::1] r = r_arr
    cdef cplx[:, ::1] rc = rc_arr
    cdef cplx[:, ::1] S = S_arr
    cdef double[::1] score = score_arr
    cdef unsigned char[::1] taken = taken_arr
    cdef cplx[:, :, ::1] Q = Q_arr
    cdef cplx[:, :, ::1] R = R_arr
    cdef Py_ssize_t[::1] support = support_arr
    cdef double[::1] hist = hist_arr
    cdef cplx[::1] v = v_arr
    cdef cplx[::1] col = col_arr
    cdef cplx[::1] c = c_arr

    cdef int t = 0, k, n, j, g, best, kb, pas
    cdef double power = 0.0, best_score, nv, n0, acc_d
    cdef cplx alpha = 1.0, malpha = -1.0, beta = 0.0, w, acc
    cdef char transn = b'N'
    cdef char transc = b'C'
    cdef int inc1 = 1
    cdef bint converged = True

    for k in range(K):
        for n in range(n_p):
            power += cabs2(r[k, n])
    power /= K * n_p
    hist[0] = power

    while power > eps:
        if t >= max_iter:
            converged = False
            break

        # |B_k^H r_k| = |B_k^T conj(r_k)|; fortran views of C arrays are transposes
        for k in range(K):
            for n in range(n_p):
                rc[k, n] = cconj(r[k, n])
        if shared:
            zgemm(&transn, &transn, &G, &K, &n_p, &alpha, <cplx*>&base[0, 0, 0], &G,
                  &rc[0, 0], &n_p, &beta, &S[0, 0], &G)
        else:
            for k in range(K):
                zgemv(&transn, &G, &n_p, &alpha, <cplx*>&base[k, 0, 0], &G,
                      &rc[k, 0], &inc1, &beta, &S[k, 0], &inc1)

        for g in range(G):
            score[g] = 0.0
        for k in range(K):
            for g in range(G):
                score[g] += sqrt(cabs2(S[k, g])) * sel[k, g]
        best = -1
        best_score = -1.0
        for g in range(G):
            if not taken[g] and score[g] > best_score:
                best_score = score[g]
                best = g
        if best < 0:
            converged = False
            break
        taken[best] = 1
        support[t] = best

        power = 0.0
        for k in range(K):
            kb = 0 if shared else k
            w = weights[k, best]
            n0 = 0.0
            for n in range(n_p):
                col[n] = base[kb, n, best] * w
                v[n] = col[n]
                n0 += cabs2(col[n])
            n0 = sqrt(n0)
            # Q[k, :t] viewed in fortran order is the (n_p, t) basis
            for pas in range(2):
                if t == 0:
                    break
                zgemv(&transc, &n_p, &t, &alpha, &Q[k, 0, 0], &n_p, &v[0], &inc1,
                      &beta, &c[0], &inc1)
                zgemv(&transn, &n_p, &t, &malpha, &Q[k, 0, 0], &n_p, &c[0], &inc1,
                      &alpha, &v[0], &inc1)
                for j in range(t):
                    R[k, j, t] = R[k, j, t] + c[j]
            nv = 0.0
            for n in range(n_p):
                nv += cabs2(v[n])
            nv = sqrt(nv)
            if nv > dep_tol * n0:
                R[k, t, t] = nv
                acc = 0.0
                for n in range(n_p):
                    Q[k, t, n] = v[n] / nv
                    acc = acc + cconj(Q[k, t, n]) * r[k, n]
                for n in range(n_p):
                    r[k, n] = r[k, n] - Q[k, t, n] * acc
            for n in range(n_p):
                power += cabs2(r[k, n])
        power /= K * n_p
        t += 1
        hist[t] = power

    x_arr = np.zeros((K, t), dtype=np.complex128)
    cdef cplx[:, ::1] x = x_arr
    cdef cplx[::1] z = c
    for k in range(K):
        for j in range(t):
            acc = 0.0
            for n in range(n_p):
                acc = acc + cconj(Q[k, j, n]) * y[k, n]
            z[j] = acc
        for j in range(t - 1, -1, -1):
            if R[k, j, j] == 0:
                x[k, j] = 0.0
                continue
            acc = z[j]
            for g in range(j + 1, t):
                acc = acc - R[k, j, g] * x[k, g]
            x[k, j] = acc / R[k, j, j]

    return (np.array(support_arr[:t], dtype=np.intp), x_arr,
            np.array(hist_arr[:t + 1]), bool(converged))
