# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled hot inner-loop kernel.

The accelerated dual projection loop runs hundreds of iterations per
outer solver step, each touching only a K x K matrix; at typical problem
sizes the per-iteration work is too small for numpy to amortize its call
overhead, which is why this lives in C.
"""

import numpy as np

cimport numpy as cnp

cnp.import_array()


def dfgp(double[:, ::1] B, double[::1] a, double mu, int max_iter,
         double grad_tol):
    """Accelerated projected gradient on  min_{z >= 0}  z'Bz/4 + a'z.

    Same iteration and early-exit rule as the numpy fallback; returns
    (z, iterations_run).
    """
    cdef Py_ssize_t K = a.shape[0]
    cdef cnp.ndarray[double, ndim=1] z_arr = np.zeros(K)
    cdef double[::1] z = z_arr
    cdef double[::1] z_prev = np.zeros(K)
    cdef double[::1] zt = np.zeros(K)
    cdef Py_ssize_t i, j
    cdef int l, it = 0
    cdef double g, znew, step, step_sq, beta
    cdef double tol_sq = mu * grad_tol * mu * grad_tol

    for l in range(1, max_iter + 1):
        it = l
        step_sq = 0.0
        for i in range(K):
            g = 0.0
            for j in range(K):
                g += B[i, j] * zt[j]
            g = 0.5 * g + a[i]
            znew = zt[i] - mu * g
            if znew < 0.0:
                znew = 0.0
            step = znew - zt[i]
            step_sq += step * step
            z[i] = znew
        if grad_tol > 0.0 and step_sq <= tol_sq:
            break
        beta = (l - 1.0) / (l + 2.0)
        for i in range(K):
            zt[i] = z[i] + beta * (z[i] - z_prev[i])
            z_prev[i] = z[i]
    return z_arr, it
