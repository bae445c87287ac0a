"""Dense BFGS with a strong-Wolfe line search.

Self-contained quasi-Newton minimizer used by both the circuit optimizer and
the tensor-network parameter sweeps' BFGS arm.  The inverse Hessian
approximation is kept dense, which is fine at the few-hundred-parameter scale
of chi=2 circuits.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable

import numpy as np

__all__ = ["OptimizeResult", "bfgs"]

# Wolfe constants: sufficient decrease c1, curvature c2 (standard values for
# quasi-Newton methods).
_C1 = 1e-4
_C2 = 0.9
# Line-search evaluation budget; exhausting it ends the run gracefully with
# the best point found instead of aborting a batch.
_MAX_LS_EVALS = 60


@dataclass
class OptimizeResult:
    x: np.ndarray
    fun: float
    grad_norm: float
    n_iters: int
    trace: list[float] = field(default_factory=list)
    reason: str = "max_iter"  # "converged" | "max_iter" | "line_search_failure"


def _line_search(
    f: Callable[[np.ndarray], float],
    g: Callable[[np.ndarray], np.ndarray],
    x: np.ndarray,
    f0: float,
    g0: np.ndarray,
    d: np.ndarray,
) -> tuple[float, float, np.ndarray | None, bool]:
    """Strong-Wolfe search along d.  Returns (alpha, f_new, g_new, ok).

    Bracket-then-zoom (bisection refinement).  On budget exhaustion returns
    the best sufficient-decrease point seen, ok=False, g_new possibly None.
    """
    dphi0 = float(g0 @ d)
    evals = 0
    best_alpha, best_f = 0.0, f0

    def phi(alpha: float) -> float:
        nonlocal evals, best_alpha, best_f
        evals += 1
        val = f(x + alpha * d)
        if val < best_f and val <= f0 + _C1 * alpha * dphi0:
            best_alpha, best_f = alpha, val
        return val

    def zoom(lo: float, f_lo: float, hi: float) -> tuple[float, float, np.ndarray | None, bool]:
        while evals < _MAX_LS_EVALS:
            mid = 0.5 * (lo + hi)
            f_mid = phi(mid)
            if f_mid > f0 + _C1 * mid * dphi0 or f_mid >= f_lo:
                hi = mid
                continue
            g_mid = g(x + mid * d)
            dphi = float(g_mid @ d)
            if abs(dphi) <= -_C2 * dphi0:
                return mid, f_mid, g_mid, True
            if dphi * (hi - lo) >= 0:
                hi = lo
            lo, f_lo = mid, f_mid
        return best_alpha, best_f, None, False

    alpha_prev, f_prev = 0.0, f0
    alpha = 1.0
    first = True
    while evals < _MAX_LS_EVALS:
        f_a = phi(alpha)
        if f_a > f0 + _C1 * alpha * dphi0 or (not first and f_a >= f_prev):
            return zoom(alpha_prev, f_prev, alpha)
        g_a = g(x + alpha * d)
        dphi = float(g_a @ d)
        if abs(dphi) <= -_C2 * dphi0:
            return alpha, f_a, g_a, True
        if dphi >= 0:
            return zoom(alpha, f_a, alpha_prev)
        alpha_prev, f_prev = alpha, f_a
        alpha *= 2.0
        first = False
    return best_alpha, best_f, None, False


def bfgs(
    f: Callable[[np.ndarray], float],
    g: Callable[[np.ndarray], np.ndarray],
    x0: np.ndarray,
    max_iter: int,
    grad_tol: float = 1e-8,
) -> OptimizeResult:
    """Minimize f with BFGS.  Deterministic given (f, g, x0, settings).

    The trace records f after every accepted step, starting with f(x0), and
    is monotone non-increasing: a step is taken only when the line search
    found a decrease.  max_iter=0 returns x0 untouched.
    """
    x = np.array(x0, dtype=float)
    fx = float(f(x))
    gx = np.asarray(g(x), dtype=float)
    trace = [fx]
    n = x.size
    h_inv = np.eye(n)
    reason = "max_iter"
    n_iters = 0

    for _ in range(max_iter):
        if np.linalg.norm(gx) < grad_tol:
            reason = "converged"
            break
        d = -h_inv @ gx
        if d @ gx >= 0.0:  # numerical loss of descent: reset curvature model
            h_inv = np.eye(n)
            d = -gx
        alpha, f_new, g_new, ok = _line_search(f, g, x, fx, gx, d)
        if not ok:
            if alpha > 0.0 and f_new < fx:  # keep the best point found
                x = x + alpha * d
                fx = f_new
                gx = np.asarray(g(x), dtype=float)
                trace.append(fx)
                n_iters += 1
            reason = "line_search_failure"
            break
        s = alpha * d
        y = g_new - gx
        x = x + s
        fx = f_new
        gx = g_new
        trace.append(fx)
        n_iters += 1
        sy = float(y @ s)
        if sy > 1e-10:  # skip update when curvature information is unreliable
            rho = 1.0 / sy
            v = np.eye(n) - rho * np.outer(s, y)
            h_inv = v @ h_inv @ v.T + rho * np.outer(s, s)
    else:
        reason = "max_iter"
    if reason != "max_iter" and np.linalg.norm(gx) < grad_tol:
        reason = "converged"

    return OptimizeResult(x=x, fun=fx, grad_norm=float(np.linalg.norm(gx)), n_iters=n_iters, trace=trace, reason=reason)
