"""Dense bounded-variable primal simplex with Bland's rule.

Solves   max c.x   s.t.  A x = b,  0 <= x <= upper   (upper may be +inf).

Two phases: artificials establish feasibility, then the real objective is
optimized with the artificials locked at zero. Bland's smallest-index rule
applies to entering and leaving choices, which guarantees termination and
makes the solve path fully deterministic. The basis system is re-solved
densely each iteration; problem sizes here are desk-scale (a few hundred
rows at most), so exactness wins over speed.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

_TOL = 1e-9


class LpInfeasibleError(ValueError):
    """Phase 1 ended with positive artificials; rows lists the offenders."""

    def __init__(self, rows: list[int]):
        self.rows = rows
        super().__init__(f"LP infeasible; unsatisfiable constraint rows: {rows}")


class LpUnboundedError(ValueError):
    """The objective increases without bound along a feasible ray."""


@dataclass
class LpResult:
    x: np.ndarray
    objective: float
    basis: list[int]
    iterations: int
    status: str = "optimal"


def _core(c, a, b, upper, basis, at_upper, max_iter):
    """Primal simplex sweeps from a feasible basis; mutates basis/at_upper."""
    m, n = a.shape
    iterations = 0
    while True:
        iterations += 1
        if iterations > max_iter:
            raise RuntimeError(f"simplex exceeded {max_iter} iterations")
        bmat = a[:, basis]
        in_basis = np.zeros(n, dtype=bool)
        in_basis[basis] = True
        nb_up = at_upper & ~in_basis
        rhs = b - a[:, nb_up] @ upper[nb_up]
        x_b = np.linalg.solve(bmat, rhs)
        y = np.linalg.solve(bmat.T, c[basis])
        rc = c - a.T @ y

        entering = -1
        for j in range(n):
            if in_basis[j]:
                continue
            if not at_upper[j] and rc[j] > _TOL:
                entering = j
                break
            if at_upper[j] and rc[j] < -_TOL:
                entering = j
                break
        if entering < 0:
            x = np.zeros(n)
            x[nb_up] = upper[nb_up]
            x[basis] = x_b
            return x, iterations

        # entering moves by step >= 0: up from 0, or down from its upper bound
        direction = 1.0 if not at_upper[entering] else -1.0
        d = np.linalg.solve(bmat, a[:, entering]) * direction

        step = upper[entering] if np.isfinite(upper[entering]) else np.inf
        leave_row = -1
        leave_at_upper = False
        for i in range(m):
            if d[i] > _TOL:
                t_i = x_b[i] / d[i]
                hit_upper = False
            elif d[i] < -_TOL and np.isfinite(upper[basis[i]]):
                t_i = (upper[basis[i]] - x_b[i]) / (-d[i])
                hit_upper = True
            else:
                continue
            # Bland tie-break: strictly smaller step, or same step with a
            # smaller basic variable index
            if t_i < step - _TOL or (t_i < step + _TOL and leave_row >= 0
                                     and basis[i] < basis[leave_row]):
                step = max(t_i, 0.0)
                leave_row = i
                leave_at_upper = hit_upper
        if not np.isfinite(step):
            raise LpUnboundedError("objective unbounded above")

        if leave_row < 0:
            # bound flip: the entering variable runs to its other bound
            at_upper[entering] = not at_upper[entering]
            continue
        leaving = basis[leave_row]
        basis[leave_row] = entering
        at_upper[entering] = False
        at_upper[leaving] = leave_at_upper


def solve_bounded_lp(c, a, b, upper, *, max_iter: int | None = None) -> LpResult:
    """Maximize c.x subject to A x = b and 0 <= x <= upper."""
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    c = np.asarray(c, dtype=float)
    upper = np.asarray(upper, dtype=float)
    m, n = a.shape
    if len(b) != m or len(c) != n or len(upper) != n:
        raise ValueError("inconsistent LP dimensions")
    if np.any(upper < -_TOL):
        raise ValueError("upper bounds must be non-negative")
    max_iter = max_iter or 50 * (m + n + 10)

    # phase 1: artificials with +/-1 coefficients so they start at |b| >= 0
    signs = np.where(b < 0.0, -1.0, 1.0)
    a1 = np.hstack([a, np.diag(signs)])
    c1 = np.concatenate([np.zeros(n), -np.ones(m)])
    u1 = np.concatenate([upper, np.full(m, np.inf)])
    basis = list(range(n, n + m))
    at_upper = np.zeros(n + m, dtype=bool)
    x1, it1 = _core(c1, a1, b, u1, basis, at_upper, max_iter)
    infeas = float(np.sum(x1[n:]))
    if infeas > 1e-7 * max(1.0, float(np.max(np.abs(b))) if m else 1.0):
        bad = [i for i in range(m) if x1[n + i] > 1e-7 * max(1.0, abs(b[i]))]
        raise LpInfeasibleError(bad)

    # phase 2: lock artificials at zero and optimize the real objective
    u1[n:] = 0.0
    c2 = np.concatenate([c, np.zeros(m)])
    x2, it2 = _core(c2, a1, b, u1, basis, at_upper, max_iter)
    x = x2[:n]
    return LpResult(x=x, objective=float(c @ x), basis=[j for j in basis if j < n],
                    iterations=it1 + it2)
