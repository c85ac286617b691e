# cython: boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled ADMM iteration kernel; signature-compatible with `_qp_py`.

Factors M = Q + sigma*I + rho*C^T C once per call (Cholesky) and iterates
with plain C loops; the sizes here are a few dozen variables, where loop
overhead dominates BLAS dispatch.
"""

import numpy as np

cimport numpy as cnp
from libc.math cimport fabs, sqrt

cnp.import_array()


cdef int _cholesky(double[:, ::1] M, int n) noexcept nogil:
    """In-place lower Cholesky; returns 0 on success."""
    cdef int i, j, k
    cdef double acc
    for j in range(n):
        acc = M[j, j]
        for k in range(j):
            acc -= M[j, k] * M[j, k]
        if acc <= 0.0:
            return -1
        M[j, j] = sqrt(acc)
        for i in range(j + 1, n):
            acc = M[i, j]
            for k in range(j):
                acc -= M[i, k] * M[j, k]
            M[i, j] = acc / M[j, j]
    return 0


cdef void _chol_solve(const double[:, ::1] L, double *b, int n) noexcept nogil:
    cdef int i, k
    cdef double acc
    for i in range(n):
        acc = b[i]
        for k in range(i):
            acc -= L[i, k] * b[k]
        b[i] = acc / L[i, i]
    for i in range(n - 1, -1, -1):
        acc = b[i]
        for k in range(i + 1, n):
            acc -= L[k, i] * b[k]
        b[i] = acc / L[i, i]


def admm_run(Q, p, C, d, double sigma, double rho, double alpha,
             x, y, z, double eps_abs, double eps_rel,
             int max_iters, int check_every):
    """Run at most max_iters iterations, mutating x, y, z in place.

    Returns (iterations_done, converged, primal_residual, dual_residual).
    """
    cdef double[:, ::1] Q_v = np.ascontiguousarray(Q)
    cdef double[::1] p_v = np.ascontiguousarray(p)
    cdef double[:, ::1] C_v = np.ascontiguousarray(C)
    cdef double[::1] d_v = np.ascontiguousarray(d)
    cdef double[::1] x_v = x
    cdef double[::1] y_v = y
    cdef double[::1] z_v = z
    cdef int n = Q_v.shape[0]
    cdef int m = C_v.shape[0]

    M = np.array(Q, dtype=np.float64, copy=True)
    cdef double[:, ::1] M_v = M
    cdef int i, j, k
    for i in range(n):
        M_v[i, i] += sigma
        for j in range(n):
            for k in range(m):
                M_v[i, j] += rho * C_v[k, i] * C_v[k, j]
    if _cholesky(M_v, n) != 0:
        raise np.linalg.LinAlgError("ADMM system matrix is not positive definite")

    work = np.empty(n + 3 * m)
    cdef double[::1] w_v = work
    cdef double *rhs = &w_v[0]
    cdef double *zt = &w_v[n] if m else NULL
    cdef double *zh = &w_v[n + m] if m else NULL
    cdef double *cx = &w_v[n + 2 * m] if m else NULL

    cdef int it = 0
    cdef int steps, s
    cdef double r_prim = 0.0
    cdef double r_dual = 0.0
    cdef double eps_p, eps_d, acc, v, n_cx, n_z, n_qx, n_cty, n_p, zn
    cdef bint converged = False

    with nogil:
        while it < max_iters:
            steps = check_every
            if steps > max_iters - it:
                steps = max_iters - it
            for s in range(steps):
                # rhs = sigma*x - p + C^T (rho*z - y)
                for i in range(n):
                    acc = sigma * x_v[i] - p_v[i]
                    for k in range(m):
                        acc += C_v[k, i] * (rho * z_v[k] - y_v[k])
                    rhs[i] = acc
                _chol_solve(M_v, rhs, n)
                for k in range(m):
                    acc = 0.0
                    for i in range(n):
                        acc += C_v[k, i] * rhs[i]
                    zt[k] = acc
                for i in range(n):
                    x_v[i] = alpha * rhs[i] + (1.0 - alpha) * x_v[i]
                for k in range(m):
                    zh[k] = alpha * zt[k] + (1.0 - alpha) * z_v[k] + y_v[k] / rho
                    zn = zh[k] if zh[k] < d_v[k] else d_v[k]
                    y_v[k] = rho * (zh[k] - zn)
                    z_v[k] = zn
            it += steps

            # unscaled residuals and tolerance scales
            r_prim = 0.0
            n_cx = 0.0
            n_z = 0.0
            for k in range(m):
                acc = 0.0
                for i in range(n):
                    acc += C_v[k, i] * x_v[i]
                cx[k] = acc
                v = fabs(acc - z_v[k])
                if v > r_prim:
                    r_prim = v
                if fabs(acc) > n_cx:
                    n_cx = fabs(acc)
                if fabs(z_v[k]) > n_z:
                    n_z = fabs(z_v[k])
            r_dual = 0.0
            n_qx = 0.0
            n_cty = 0.0
            n_p = 0.0
            for i in range(n):
                acc = 0.0
                for j in range(n):
                    acc += Q_v[i, j] * x_v[j]
                if fabs(acc) > n_qx:
                    n_qx = fabs(acc)
                v = acc + p_v[i]
                acc = 0.0
                for k in range(m):
                    acc += C_v[k, i] * y_v[k]
                if fabs(acc) > n_cty:
                    n_cty = fabs(acc)
                if fabs(p_v[i]) > n_p:
                    n_p = fabs(p_v[i])
                v = fabs(v + acc)
                if v > r_dual:
                    r_dual = v
            eps_p = eps_abs + eps_rel * (n_cx if n_cx > n_z else n_z)
            v = n_qx
            if n_cty > v:
                v = n_cty
            if n_p > v:
                v = n_p
            eps_d = eps_abs + eps_rel * v
            if r_prim <= eps_p and r_dual <= eps_d:
                converged = True
                break

    return it, bool(converged), r_prim, r_dual
