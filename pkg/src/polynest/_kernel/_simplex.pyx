# cython: language_level=3
"""Compiled tableau simplex; mirrors _simplex_py pivot for pivot.

Same algorithm, same tolerances, same tie-breaking as the python backend,
so the two must agree to floating-point roundoff. Keep them in sync.
"""
from libc.stdlib cimport free, malloc
from libc.math cimport fabs

import numpy as np

from ._errors import LpDegenerate, LpInfeasible, LpUnbounded

BACKEND = "compiled"


def lp_maximize(A, b, c, double tol=1e-11, int maxiter=0):
    """Return (x, tight) maximizing c.x s.t. Ax <= b; see python backend."""
    A = np.ascontiguousarray(A, dtype=np.float64)
    b = np.ascontiguousarray(b, dtype=np.float64)
    c = np.ascontiguousarray(c, dtype=np.float64)
    cdef double[:, ::1] Av = A
    cdef double[::1] bv = b
    cdef double[::1] cv = c
    cdef Py_ssize_t M = Av.shape[0]
    cdef Py_ssize_t N = Av.shape[1]
    cdef Py_ssize_t W = M + N
    if maxiter <= 0:
        maxiter = 500 + 10 * M

    cdef double *T = <double *> malloc(N * W * sizeof(double))
    cdef double *r = <double *> malloc(N * sizeof(double))
    cdef Py_ssize_t *basis = <Py_ssize_t *> malloc(N * sizeof(Py_ssize_t))
    cdef char *flip = <char *> malloc(N * sizeof(char))
    if T == NULL or r == NULL or basis == NULL or flip == NULL:
        free(T); free(r); free(basis); free(flip)
        raise MemoryError()

    cdef Py_ssize_t i, j, k, phase, enter, leave, niter
    cdef double sgn, cbi, rc, best_rc_seen, colv, ratio, best, piv, f, acc
    try:
        for i in range(N):
            flip[i] = 1 if cv[i] < 0.0 else 0
            sgn = -1.0 if flip[i] else 1.0
            for j in range(M):
                T[i * W + j] = sgn * Av[j, i]
            for j in range(N):
                T[i * W + M + j] = 1.0 if j == i else 0.0
            r[i] = fabs(cv[i])
            basis[i] = M + i

        for phase in range(1, 3):
            niter = 0
            while True:
                niter += 1
                if niter > maxiter:
                    raise LpDegenerate("simplex iteration limit")
                enter = -1
                for j in range(M):
                    rc = bv[j] if phase == 2 else 0.0
                    for i in range(N):
                        k = basis[i]
                        if phase == 2:
                            cbi = bv[k] if k < M else 0.0
                        else:
                            cbi = 1.0 if k >= M else 0.0
                        if cbi != 0.0:
                            rc -= cbi * T[i * W + j]
                    if rc < -tol:
                        for i in range(N):
                            if basis[i] == j:
                                break
                        else:
                            enter = j
                        if enter >= 0:
                            break
                if enter < 0:
                    break
                best = float("inf")
                leave = -1
                for i in range(N):
                    colv = T[i * W + enter]
                    if colv > tol:
                        ratio = r[i] / colv
                        if ratio < best - 1e-12:
                            best = ratio
                            leave = i
                        elif ratio < best + 1e-12 and leave >= 0 and basis[i] < basis[leave]:
                            leave = i
                if leave < 0:
                    raise LpInfeasible("no feasible point for Ax <= b")
                _pivot(T, r, basis, N, W, leave, enter)
            if phase == 1:
                acc = 0.0
                for i in range(N):
                    if basis[i] >= M:
                        acc += r[i]
                if acc > 1e-8:
                    raise LpUnbounded("objective unbounded above")
                for i in range(N):
                    if basis[i] < M:
                        continue
                    enter = -1
                    for j in range(M):
                        for k in range(N):
                            if basis[k] == j:
                                break
                        else:
                            if fabs(T[i * W + j]) > 1e-7:
                                enter = j
                                break
                    if enter < 0:
                        raise LpDegenerate("constraint gradients are rank deficient")
                    _pivot(T, r, basis, N, W, i, enter)

        x = np.empty(N, dtype=np.float64)
        for i in range(N):
            acc = 0.0
            for k in range(N):
                j = basis[k]
                cbi = bv[j] if j < M else 0.0
                if cbi != 0.0:
                    acc += cbi * T[k * W + M + i]
            x[i] = -acc if flip[i] else acc
        tight = sorted(basis[i] for i in range(N))
        return x, tight
    finally:
        free(T); free(r); free(basis); free(flip)


cdef void _pivot(double *T, double *r, Py_ssize_t *basis, Py_ssize_t N,
                 Py_ssize_t W, Py_ssize_t leave, Py_ssize_t enter):
    cdef Py_ssize_t i, j
    cdef double piv = T[leave * W + enter]
    cdef double f
    for j in range(W):
        T[leave * W + j] /= piv
    r[leave] /= piv
    for i in range(N):
        if i == leave:
            continue
        f = T[i * W + enter]
        if f != 0.0:
            for j in range(W):
                T[i * W + j] -= f * T[leave * W + j]
            r[i] -= f * r[leave]
    for i in range(N):
        T[i * W + enter] = 0.0
    T[leave * W + enter] = 1.0
    basis[leave] = enter
