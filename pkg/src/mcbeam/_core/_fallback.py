"""Pure-numpy implementation of the hot inner-loop kernel.

Used when the compiled extension is unavailable or when
``MCBEAM_PURE_PYTHON=1`` is set. Semantics match ``_kernels.pyx``
exactly; only the arithmetic grouping of the matrix-vector product may
differ at the last-ulp level.
"""

import numpy as np


def dfgp(B, a, mu, max_iter, grad_tol):
    """Accelerated projected gradient on  min_{z >= 0}  z'Bz/4 + a'z.

    Iterates
        z_l  = max(zt_{l-1} - mu * (B zt_{l-1} / 2 + a), 0)
        zt_l = z_l + (l - 1)/(l + 2) * (z_l - z_{l-1})
    from z_0 = zt_0 = 0, and exits early once the projected-gradient norm
    ||z_l - zt_{l-1}|| / mu drops to ``grad_tol`` (pass 0 to disable).

    Returns (z, iterations_run).
    """
    K = a.shape[0]
    z_prev = np.zeros(K)
    zt = np.zeros(K)
    z = np.zeros(K)
    it = 0
    for l in range(1, max_iter + 1):
        it = l
        g = 0.5 * (B @ zt) + a
        z = np.maximum(zt - mu * g, 0.0)
        if grad_tol > 0.0 and np.linalg.norm(z - zt) <= mu * grad_tol:
            break
        zt = z + ((l - 1.0) / (l + 2.0)) * (z - z_prev)
        z_prev = z
    return z, it
