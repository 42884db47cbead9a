"""Newton iteration for the equilibrium of the truncated discrete model.

The stationary problem ``S f = P(f)`` is linearized around ``f^n``:

    V(df) := S df - 2 p(f^n, df) = -S f^n + P(f^n) =: H

``V`` maps into the mass-orthogonal subspace ``{g : sum_i i g_i = 0}``, so one
operator row is redundant. Row N is replaced by the constraint
``sum_i i df_i = 0``, which keeps the mass fixed and makes the system square
and (generically) invertible.
"""

from __future__ import annotations

import logging
import warnings
from dataclasses import dataclass

import numpy as np
import scipy.linalg

from .errors import DivergenceError, SingularSystemError, SolverError
from .model import (
    CLAMP_TOL,
    Distribution,
    Grid,
    RateVector,
    bilinear_kernel,
    fragmentation_kernel,
    rhs_kernel,
)

logger = logging.getLogger(__name__)

PIVOT_TOL = 1e-13


def exponential_init(m1: float, grid: Grid) -> Distribution:
    """``f_i ∝ exp(-i h)`` normalized to mass ``m1``."""
    if not m1 > 0:
        raise ValueError(f"m1 must be positive, got {m1}")
    h = grid.h
    i = np.arange(1, grid.N + 1)
    w = np.exp(-i * h)
    return Distribution(grid, m1 * w / (h * np.sum(i * h * w)))


def linearized_operator(fn, df) -> RateVector:
    """Apply ``V_{f^n}(df) = S df - 2 p(f^n, df)`` on all N rows."""
    a = np.asarray(fn.values, dtype=float)
    d = np.asarray(df.values, dtype=float)
    out = -fragmentation_kernel(d) - 2.0 * bilinear_kernel(a, d, fn.grid.h)
    return RateVector(fn.grid, out)


@dataclass
class NewtonSystem:
    matrix: np.ndarray
    rhs: np.ndarray


def assemble_newton_system(fn) -> NewtonSystem:
    """Dense matrix of ``V_{f^n}`` with row N swapped for the mass constraint.

    Entries of operator row ``i`` (column ``k``)::

        -2/(k+1)             for k >= i        (from S)
        -2 h f_{i-k}         for k < i         (convolution)
        +2 h f_i             for k <= N - i    (loss of partners of size i)
        + 1 + 2 h F_{N-i}    on the diagonal   (loss of size i itself)

    with ``F_m = sum_{j<=m} f_j``.
    """
    a = np.asarray(fn.values, dtype=float)
    h = fn.grid.h
    n = a.size
    k = np.arange(1, n + 1)
    upper = -2.0 / (k + 1.0)
    prefix = np.concatenate(([0.0], np.cumsum(a)))
    mat = np.zeros((n, n))
    for r in range(n - 1):  # r = i - 1
        row = mat[r]
        row[r:] = upper[r:]
        if r:
            row[:r] -= 2.0 * h * a[r - 1 :: -1]
        row[: n - r - 1] += 2.0 * h * a[r]
        row[r] += 1.0 + 2.0 * h * prefix[n - r - 1]
    mat[n - 1] = k
    rhs = rhs_kernel(a, h)  # H = -S f + P(f) is exactly the model right-hand side
    rhs[n - 1] = 0.0
    return NewtonSystem(mat, rhs)


def _solve_dense(system: NewtonSystem) -> np.ndarray:
    """LU solve with partial pivoting; overwrites ``system.matrix``."""
    mat = system.matrix
    scale = max(abs(float(mat.max())), abs(float(mat.min())))
    # lu_factor wants Fortran order; factor the transpose to avoid a copy of
    # a possibly very large matrix and solve with trans=1.
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", scipy.linalg.LinAlgWarning)  # handled by the pivot test below
        lu, piv = scipy.linalg.lu_factor(mat.T, overwrite_a=True, check_finite=False)
    pivots = np.abs(np.diag(lu))
    if not np.all(np.isfinite(pivots)) or pivots.min() < PIVOT_TOL * scale:
        raise SingularSystemError(
            f"linearization not invertible: smallest pivot {pivots.min():.3e} "
            f"vs matrix scale {scale:.3e}"
        )
    return scipy.linalg.lu_solve((lu, piv), system.rhs, trans=1, check_finite=False)


@dataclass
class NewtonStep:
    f_next: Distribution | RateVector  # signed if the step overshoots below zero
    increment_norm: float


@dataclass
class _Iterate:
    grid: Grid
    values: np.ndarray


def _update(a: np.ndarray, grid: Grid) -> np.ndarray:
    """Newton increment for the (possibly not yet non-negative) iterate ``a``."""
    system = assemble_newton_system(_Iterate(grid, a))
    return _solve_dense(system)


def newton_step(fn: Distribution) -> NewtonStep:
    """One Newton update ``f^{n+1} = f^n + df`` from a dense LU solve.

    Intermediate iterates far from equilibrium may dip below zero; they are
    then returned as a :class:`RateVector` so the iteration can continue.
    """
    a = np.asarray(fn.values, dtype=float)
    df = _update(a, fn.grid)
    new = a + df
    nxt = Distribution(fn.grid, new) if new.min() >= -CLAMP_TOL else RateVector(fn.grid, new)
    return NewtonStep(nxt, float(np.max(np.abs(df))))


@dataclass
class NewtonReport:
    iterations: int
    residual_norm: float
    increment_norm: float
    converged: bool
    solution: Distribution
    residual_history: list
    increment_history: list

    def summary(self) -> dict:
        return {
            "iterations": self.iterations,
            "residual_norm": self.residual_norm,
            "increment_norm": self.increment_norm,
            "converged": self.converged,
            "mass": self.solution.mass(),
        }


def solve_equilibrium(
    m1: float,
    grid: Grid,
    max_iter: int = 5,
    tol_residual: float = 1e-10,
    initial: Distribution | None = None,
) -> NewtonReport:
    """Newton iteration from the exponential initial guess (or ``initial``).

    Runs until ``max |S f - P(f)| <= tol_residual`` or ``max_iter`` steps.
    Raises :class:`DivergenceError` if the increment grows three times in a
    row, and :class:`SingularSystemError` if a linear solve fails.
    """
    if not m1 > 0:
        raise ValueError(f"m1 must be positive, got {m1}")
    if max_iter < 1:
        raise ValueError(f"max_iter must be >= 1, got {max_iter}")
    f = exponential_init(m1, grid) if initial is None else initial
    a = np.array(f.values, dtype=float)
    residuals, increments = [], []
    growth = 0
    converged = False
    for it in range(1, max_iter + 1):
        df = _update(a, grid)
        a = a + df
        inc = float(np.max(np.abs(df)))
        res = float(np.max(np.abs(rhs_kernel(a, grid.h))))
        growth = growth + 1 if increments and inc > increments[-1] else 0
        increments.append(inc)
        residuals.append(res)
        logger.info("newton it=%d |df|=%.3e residual=%.3e", it, inc, res)
        if not np.all(np.isfinite(a)):
            raise DivergenceError(f"Newton diverged: non-finite iterate at iteration {it}")
        if growth >= 3:
            raise DivergenceError(f"Newton diverged: increment grew 3 times in a row {increments}")
        if res <= tol_residual:
            converged = True
            break
    if a.min() < -CLAMP_TOL:
        i = int(np.argmin(a)) + 1
        raise SolverError(f"Newton solution negative: {a.min():.3e} at i={i} (x={i * grid.h:g})")
    return NewtonReport(
        iterations=len(increments),
        residual_norm=residuals[-1],
        increment_norm=increments[-1],
        converged=converged,
        solution=Distribution(grid, a),
        residual_history=residuals,
        increment_history=increments,
    )
