"""Pure-python (numpy) tableau simplex for dense LPs with few variables.

Solves   max c.x   subject to   A x <= b,   x free,
where A is M x N with small N (here: N = dim+1, M = up to a few hundred).

The dual   min b.y  s.t.  A^T y = c, y >= 0   is solved by a two-phase
tableau method with Bland's rule. The primal optimum is the vector of
simplex multipliers of the optimal dual basis; it is read directly off the
artificial columns of the final tableau (those columns hold B^-1), so no
linear system is ever solved. That matters: the symmetric, highly degenerate
geometry LPs this kernel exists for routinely make the final basis matrix
numerically singular.
"""
import numpy as np

from ._errors import LpDegenerate, LpInfeasible, LpUnbounded

BACKEND = "python"


def lp_maximize(A, b, c, tol=1e-11, maxiter=0):
    """Return (x, tight) where x maximizes c.x s.t. Ax <= b.

    tight is the sorted list of row indices of A active at the optimum
    (one per dual basis column, so exactly N of them).
    """
    A = np.ascontiguousarray(A, dtype=float)
    b = np.ascontiguousarray(b, dtype=float)
    c = np.ascontiguousarray(c, dtype=float)
    M, N = A.shape
    if maxiter <= 0:
        maxiter = 500 + 10 * M

    # dual tableau: rows = primal variables, columns = constraints + artificials
    G = np.empty((N, M + N))
    G[:, :M] = A.T
    rhs = c.copy()
    flip = rhs < 0
    G[flip, :M] *= -1.0
    G[:, M:] = np.eye(N)
    r = np.abs(rhs)
    T = G.copy()
    basis = list(range(M, M + N))

    for phase in (1, 2):
        cost = np.zeros(M + N)
        if phase == 1:
            cost[M:] = 1.0
        else:
            cost[:M] = b
        niter = 0
        while True:
            niter += 1
            if niter > maxiter:
                raise LpDegenerate("simplex iteration limit")
            cb = cost[basis]
            rc = cost[:M] - cb @ T[:, :M]
            enter = -1
            for j in range(M):
                if rc[j] < -tol and j not in basis:
                    enter = j
                    break
            if enter < 0:
                break
            col = T[:, enter]
            best, leave = np.inf, -1
            for i in range(N):
                if col[i] > tol:
                    ratio = r[i] / col[i]
                    if ratio < best - 1e-12:
                        best, leave = ratio, i
                    elif ratio < best + 1e-12 and leave >= 0 and basis[i] < basis[leave]:
                        leave = i
            if leave < 0:
                # dual unbounded below means the primal is infeasible
                raise LpInfeasible("no feasible point for Ax <= b")
            _pivot(T, r, basis, leave, enter)
        if phase == 1:
            if sum(r[i] for i in range(N) if basis[i] >= M) > 1e-8:
                raise LpUnbounded("objective unbounded above")
            for i in range(N):
                if basis[i] < M:
                    continue
                enter = -1
                for j in range(M):
                    if j not in basis and abs(T[i, j]) > 1e-7:
                        enter = j
                        break
                if enter < 0:
                    raise LpDegenerate("constraint gradients are rank deficient")
                _pivot(T, r, basis, i, enter)

    cost = np.concatenate([b, np.zeros(N)])
    x = cost[basis] @ T[:, M:M + N]
    x[flip] *= -1.0
    return x, sorted(basis)


def _pivot(T, r, basis, leave, enter):
    piv = T[leave, enter]
    T[leave] /= piv
    r[leave] /= piv
    for i in range(len(r)):
        f = T[i, enter]
        if i != leave and f != 0.0:
            T[i] -= f * T[leave]
            r[i] -= f * r[leave]
    T[:, enter] = 0.0
    T[leave, enter] = 1.0
    basis[leave] = enter
