"""Pure-numpy ADMM iteration kernel (mirror of the compiled `_qp_cy`).

Operator-splitting iterations for
    min 1/2 x'Qx + p'x   s.t.  Cx <= d
with scalar step rho, regularization sigma and relaxation alpha. The
wrapper in `qp.py` owns step-size adaptation and solution polishing; this
kernel just iterates and reports unscaled residuals.
"""

from __future__ import annotations

import numpy as np


def admm_run(Q, p, C, d, sigma, rho, alpha, x, y, z,
             eps_abs, eps_rel, max_iters, check_every):
    """Run at most `max_iters` iterations, mutating x, y, z in place.

    Returns (iterations_done, converged, primal_residual, dual_residual).
    Residual checks happen every `check_every` iterations.
    """
    n = Q.shape[0]
    M = Q + sigma * np.eye(n) + rho * (C.T @ C)
    M_inv = np.linalg.inv(M)
    Ct = np.ascontiguousarray(C.T)

    it = 0
    r_prim = np.inf
    r_dual = np.inf
    while it < max_iters:
        steps = min(check_every, max_iters - it)
        for _ in range(steps):
            rhs = sigma * x - p + Ct @ (rho * z - y)
            x_t = M_inv @ rhs
            z_t = C @ x_t
            x[:] = alpha * x_t + (1.0 - alpha) * x
            z_hat = alpha * z_t + (1.0 - alpha) * z + y / rho
            z_new = np.minimum(z_hat, d)
            y[:] = rho * (z_hat - z_new)
            z[:] = z_new
        it += steps

        cx = C @ x
        r_prim = float(np.max(np.abs(cx - z))) if len(d) else 0.0
        qx = Q @ x
        cty = Ct @ y
        r_dual = float(np.max(np.abs(qx + p + cty)))
        eps_p = eps_abs + eps_rel * max(
            np.max(np.abs(cx), initial=0.0), np.max(np.abs(z), initial=0.0)
        )
        eps_d = eps_abs + eps_rel * max(
            np.max(np.abs(qx)), np.max(np.abs(cty), initial=0.0), np.max(np.abs(p))
        )
        if r_prim <= eps_p and r_dual <= eps_d:
            return it, True, r_prim, r_dual
    return it, False, r_prim, r_dual
