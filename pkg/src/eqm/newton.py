"""Damped Newton iteration for the 2x2 endpoint systems.

The residual callables may raise a feasibility error (NegativeRadicand,
InvalidInterval, DomainError) at points outside the domain of the
square-root equations; the line search treats that exactly like a
residual increase and halves the step.  An infeasible starting point
propagates the error to the caller.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DomainError, InvalidInterval, NegativeRadicand

__all__ = ["NewtonResult", "damped_newton"]

_FEASIBILITY_ERRORS = (NegativeRadicand, InvalidInterval, DomainError)


@dataclass
class NewtonResult:
    x: np.ndarray
    residual: np.ndarray
    residual_norm: float
    converged: bool
    iterations: int
    message: str


def _norm(f):
    return float(np.max(np.abs(f)))


def _jacobian(fun, x, f0, h):
    """Central-difference Jacobian with one-sided fallback at domain edges."""
    n = len(x)
    jac = np.empty((n, n))
    for j in range(n):
        e = np.zeros(n)
        e[j] = h
        fp = fm = None
        try:
            fp = fun(x + e)
        except _FEASIBILITY_ERRORS:
            pass
        try:
            fm = fun(x - e)
        except _FEASIBILITY_ERRORS:
            pass
        if fp is not None and fm is not None:
            jac[:, j] = (fp - fm) / (2.0 * h)
        elif fp is not None:
            jac[:, j] = (fp - f0) / h
        elif fm is not None:
            jac[:, j] = (f0 - fm) / h
        else:
            return None
    return jac


def damped_newton(fun, x0, tol=1e-10, max_iter=100, step_scale=None,
                  validate=None, max_halvings=30):
    """Minimize ||fun(x)||_inf to below tol by damped Newton steps.

    Parameters
    ----------
    fun : callable
        x (ndarray) -> residual ndarray of the same length.  May raise a
        feasibility error off the domain.
    x0 : array_like
        Starting point; a feasibility error here propagates.
    tol : float
        Convergence threshold on the max-norm of the residual.
    max_iter : int
        Newton iteration budget.
    step_scale : callable, optional
        x -> finite-difference step h for the Jacobian (default 1e-6).
    validate : callable, optional
        x -> bool; False marks a trial point infeasible before fun runs.

    Returns
    -------
    NewtonResult
        converged is False when the budget or the line search is
        exhausted; the best iterate seen is returned either way.
    """
    x = np.asarray(x0, dtype=float).copy()
    f = np.asarray(fun(x), dtype=float)
    fnorm = _norm(f)
    best_x, best_f, best_norm = x.copy(), f.copy(), fnorm
    message = "iteration budget exhausted"

    for it in range(max_iter):
        if fnorm <= tol:
            return NewtonResult(x, f, fnorm, True, it, "converged")
        h = float(step_scale(x)) if step_scale is not None else 1e-6
        jac = _jacobian(fun, x, f, h)
        if jac is None or not np.all(np.isfinite(jac)):
            message = "Jacobian unavailable at the current iterate"
            break
        try:
            step = np.linalg.solve(jac, -f)
        except np.linalg.LinAlgError:
            message = "singular Jacobian"
            break
        lam = 1.0
        accepted = False
        for _ in range(max_halvings + 1):
            trial = x + lam * step
            if validate is not None and not validate(trial):
                lam *= 0.5
                continue
            try:
                ftrial = np.asarray(fun(trial), dtype=float)
            except _FEASIBILITY_ERRORS:
                lam *= 0.5
                continue
            tnorm = _norm(ftrial)
            if not np.isfinite(tnorm):
                lam *= 0.5
                continue
            if tnorm < fnorm or tnorm <= tol:
                x, f, fnorm = trial, ftrial, tnorm
                accepted = True
                break
            lam *= 0.5
        if not accepted:
            message = "line search stalled"
            break
        if fnorm < best_norm:
            best_x, best_f, best_norm = x.copy(), f.copy(), fnorm

    if fnorm <= tol:
        return NewtonResult(x, f, fnorm, True, max_iter, "converged")
    return NewtonResult(best_x, best_f, best_norm, False, max_iter, message)
