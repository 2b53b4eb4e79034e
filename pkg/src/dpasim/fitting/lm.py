"""Levenberg-Marquardt least-squares solver.

Minimises ``0.5 * ||r(x)||^2`` with Marquardt's diagonal scaling
``(J^T J + lam diag(J^T J)) dx = -J^T r``. The Jacobian is taken by central
differences unless supplied.
"""

from dataclasses import dataclass

import numpy as np

__all__ = ["LMResult", "levenberg_marquardt", "numerical_jacobian"]


@dataclass(frozen=True)
class LMResult:
    x: np.ndarray
    cost: float
    residuals: np.ndarray
    jac: np.ndarray
    n_iterations: int
    n_evaluations: int
    converged: bool
    message: str

    def covariance(self):
        """Linearised covariance ``pinv(J^T J) s^2`` with ``s^2 = 2 cost / (m - n)``."""
        m, n = self.jac.shape
        dof = m - n
        s2 = 2.0 * self.cost / dof if dof > 0 else 0.0
        cov = np.linalg.pinv(self.jac.T @ self.jac) * s2
        return 0.5 * (cov + cov.T)


def numerical_jacobian(fun, x, rel_step=6e-6):
    """Central-difference Jacobian of ``fun`` at ``x``."""
    x = np.asarray(x, dtype=float)
    cols = []
    for j in range(x.size):
        h = rel_step * max(abs(x[j]), 1.0)
        xp, xm = x.copy(), x.copy()
        xp[j] += h
        xm[j] -= h
        cols.append((fun(xp) - fun(xm)) / (2 * h))
    return np.column_stack(cols)


def levenberg_marquardt(
    fun,
    x0,
    jac=None,
    max_iter=200,
    ftol=1e-10,
    xtol=1e-12,
    lam0=1e-3,
    lam_max=1e16,
):
    """Minimise ``0.5 ||fun(x)||^2``.

    Parameters
    ----------
    fun : callable
        Residual vector ``r(x)``.
    x0 : array_like
        Starting point.
    jac : callable, optional
        ``J(x)``; central differences when omitted.
    max_iter : int
        Cap on accepted plus rejected iterations.
    ftol, xtol : float
        Stop when an accepted step changes the cost by less than ``ftol``
        relative, or when the step norm falls below ``xtol`` (relative to
        ``||x||`` or absolute, whichever is larger).

    Returns
    -------
    LMResult
        ``converged`` is False when ``max_iter`` was reached first.
    """
    x = np.asarray(x0, dtype=float).copy()
    n_eval = 0

    def evaluate(p):
        nonlocal n_eval
        n_eval += 1
        return np.asarray(fun(p), dtype=float)

    def jacobian(p):
        nonlocal n_eval
        if jac is not None:
            return np.asarray(jac(p), dtype=float)
        n_eval += 2 * p.size
        return numerical_jacobian(fun, p)

    r = evaluate(x)
    cost = 0.5 * float(r @ r)
    J = jacobian(x)
    lam = lam0
    message, converged = "iteration cap reached", False
    it = 0

    for it in range(1, max_iter + 1):
        if cost == 0.0:
            message, converged = "zero residual", True
            break
        A = J.T @ J
        g = J.T @ r
        diag = np.maximum(np.diag(A), np.finfo(float).tiny)
        try:
            step = np.linalg.solve(A + lam * np.diag(diag), -g)
        except np.linalg.LinAlgError:
            step = -np.linalg.pinv(A + lam * np.diag(diag)) @ g
        step_norm = float(np.linalg.norm(step))
        if step_norm < xtol * max(1.0, float(np.linalg.norm(x))):
            message, converged = "step norm below tolerance", True
            break
        x_new = x + step
        r_new = evaluate(x_new)
        cost_new = 0.5 * float(r_new @ r_new)
        if np.isfinite(cost_new) and cost_new < cost:
            rel = (cost - cost_new) / cost
            x, r, cost = x_new, r_new, cost_new
            lam = max(lam / 10.0, 1e-12)
            J = jacobian(x)
            if rel < ftol:
                message, converged = "relative cost change below tolerance", True
                break
        else:
            lam *= 10.0
            if lam > lam_max:
                message, converged = "no further decrease possible", True
                break

    return LMResult(
        x=x,
        cost=cost,
        residuals=r,
        jac=J,
        n_iterations=it,
        n_evaluations=n_eval,
        converged=converged,
        message=message,
    )
