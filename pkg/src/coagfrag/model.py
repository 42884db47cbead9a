"""Grids, distributions and the discrete coagulation/fragmentation operators.

All formulas are written with 1-based size indices ``i = 1..N`` (grid point
``x_i = i*h``); arrays are 0-based, so ``values[i-1]`` holds ``f_i``.

The truncated discrete model evolves

    df_i/dt = h * sum_{j=1}^{i-1} f_{i-j} f_j - 2h f_i sum_{j=1}^{N-i} f_j
              - f_i + 2 sum_{j=i}^{N} f_j / (j+1)

and conserves the mass ``h * sum_i (i h) f_i``.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from typing import Union

import numpy as np

CLAMP_TOL = 1e-14


@dataclass(frozen=True)
class Grid:
    """Uniform size grid ``x_i = i*h``, ``i = 1..N``, truncated at ``L = N*h``."""

    h: float
    L: float

    def __post_init__(self):
        h, L = float(self.h), float(self.L)
        if not (math.isfinite(h) and h > 0):
            raise ValueError(f"grid spacing must be positive, got h={self.h}")
        if not (math.isfinite(L) and L > h):
            raise ValueError(f"truncation size must exceed h, got L={self.L}, h={h}")
        n = round(L / h)
        if abs(n * h - L) > h * 1e-9:
            raise ValueError(f"L={L} is not an integer multiple of h={h}")
        object.__setattr__(self, "h", h)
        object.__setattr__(self, "L", L)

    @property
    def N(self) -> int:
        return int(round(self.L / self.h))

    @property
    def x(self) -> np.ndarray:
        """Grid sizes ``h, 2h, ..., N h``."""
        return self.h * np.arange(1, self.N + 1)

    def index_of(self, x: float) -> int:
        """1-based index of the grid point closest to size ``x``."""
        i = int(round(x / self.h))
        if not 1 <= i <= self.N:
            raise ValueError(f"size {x} lies outside the grid (0, {self.L}]")
        return i


def _frozen(values, n: int) -> np.ndarray:
    arr = np.array(values, dtype=float)
    if arr.shape != (n,):
        raise ValueError(f"expected {n} values, got shape {arr.shape}")
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True, eq=False)
class Distribution:
    """Non-negative size distribution ``f_i ~ f(i h)`` on a :class:`Grid`.

    Negative entries no larger than 1e-14 in magnitude are clamped to zero;
    anything more negative is rejected.
    """

    grid: Grid
    values: np.ndarray

    def __post_init__(self):
        arr = np.array(self.values, dtype=float)
        if arr.shape != (self.grid.N,):
            raise ValueError(f"expected {self.grid.N} values, got shape {arr.shape}")
        if not np.all(np.isfinite(arr)):
            raise ValueError("distribution contains NaN or Inf")
        neg = arr < 0
        if np.any(neg):
            worst = arr.min()
            if worst < -CLAMP_TOL:
                i = int(np.argmin(arr)) + 1
                raise ValueError(f"negative value {worst:.3e} at index i={i}")
            arr[neg] = 0.0
        object.__setattr__(self, "values", _frozen(arr, self.grid.N))

    @property
    def x(self) -> np.ndarray:
        return self.grid.x

    def mass(self) -> float:
        return moment(self, 1, MassConvention.MODEL_D_PRIME)


@dataclass(frozen=True, eq=False)
class RateVector:
    """Signed per-size array (time derivatives, Newton increments)."""

    grid: Grid
    values: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "values", _frozen(self.values, self.grid.N))


@dataclass(frozen=True)
class ModelRates:
    """Fragmentation parameter ``p`` and coagulation parameter ``q``."""

    p: float = 1.0
    q: float = 1.0

    def __post_init__(self):
        if not (self.p > 0 and self.q > 0):
            raise ValueError(f"rates must be positive, got p={self.p}, q={self.q}")


class MassConvention(enum.Enum):
    """How moments are weighted.

    MODEL_D sums over a sequence ``f^h`` (``f_i^h ~ h f(ih)``);
    MODEL_D_PRIME integrates a density sampled on the grid, hence the extra ``h``.
    """

    MODEL_D = "model_d"
    MODEL_D_PRIME = "model_d_prime"


Field = Union[Distribution, RateVector]


def moment(f, k: int, convention: MassConvention) -> float:
    """Zeroth or first moment of a distribution or equilibrium sequence."""
    if k not in (0, 1):
        raise ValueError(f"only moments 0 and 1 are supported, got k={k}")
    h = f.grid.h if hasattr(f, "grid") else f.h
    vals = np.asarray(f.values, dtype=float)
    sizes = h * np.arange(1, vals.size + 1)
    total = float(np.sum(vals * sizes**k))
    if convention is MassConvention.MODEL_D_PRIME:
        return h * total
    return total


def _check_same_grid(f: Field, g: Field) -> None:
    if f.grid != g.grid:
        raise ValueError(f"grid mismatch: {f.grid} vs {g.grid}")


# -- array kernels -----------------------------------------------------------
# These take plain 0-based arrays and are shared by the solvers' inner loops.

def _prefix(a: np.ndarray) -> np.ndarray:
    """``P[m] = sum_{j=1}^{m} a_j`` for m = 0..N."""
    out = np.empty(a.size + 1)
    out[0] = 0.0
    np.cumsum(a, out=out[1:])
    return out


def _reverse_cumsum(w: np.ndarray) -> np.ndarray:
    """``R_i = sum_{j=i}^{N} w_j``, accumulated from j=N downwards."""
    return np.cumsum(w[::-1])[::-1]


def bilinear_kernel(a: np.ndarray, b: np.ndarray, h: float) -> np.ndarray:
    n = a.size
    out = np.zeros(n)
    if n > 1:
        out[1:] = h * np.convolve(a, b)[: n - 1]
    pa, pb = _prefix(a), _prefix(b)
    # partner sums run over j = 1..N-i
    out -= h * a * pb[n - 1 :: -1]
    out -= h * b * pa[n - 1 :: -1]
    return out


def coagulation_kernel(a: np.ndarray, h: float) -> np.ndarray:
    n = a.size
    out = np.zeros(n)
    if n > 1:
        out[1:] = h * np.convolve(a, a)[: n - 1]
    out -= 2.0 * h * a * _prefix(a)[n - 1 :: -1]
    return out


def fragmentation_kernel(a: np.ndarray) -> np.ndarray:
    j = np.arange(1, a.size + 1)
    return -a + 2.0 * _reverse_cumsum(a / (j + 1.0))


def rhs_kernel(a: np.ndarray, h: float) -> np.ndarray:
    return coagulation_kernel(a, h) + fragmentation_kernel(a)


# -- public operators --------------------------------------------------------

def coagulation_rhs(f: Field) -> RateVector:
    """Coagulation gain minus loss ``Q_C(f)`` on the truncated grid."""
    return RateVector(f.grid, coagulation_kernel(np.asarray(f.values), f.grid.h))


def fragmentation_rhs(f: Field) -> RateVector:
    """Fragmentation term ``Q_F(f)_i = -f_i + 2 sum_{j>=i} f_j/(j+1)``."""
    return RateVector(f.grid, fragmentation_kernel(np.asarray(f.values)))


def full_rhs(f: Field) -> RateVector:
    return RateVector(f.grid, rhs_kernel(np.asarray(f.values), f.grid.h))


def apply_S(f: Field) -> RateVector:
    """Linear part of the stationary problem, ``S f = -Q_F(f)``."""
    return RateVector(f.grid, -fragmentation_kernel(np.asarray(f.values)))


def apply_p(f: Field, g: Field) -> RateVector:
    """Symmetric bilinear form with ``p(f, f) = Q_C(f)``."""
    _check_same_grid(f, g)
    return RateVector(f.grid, bilinear_kernel(np.asarray(f.values), np.asarray(g.values), f.grid.h))


def stationary_residual(f: Field) -> float:
    """``max_i |S f - P(f)|_i``, i.e. the sup-norm of the right-hand side."""
    return float(np.max(np.abs(rhs_kernel(np.asarray(f.values), f.grid.h))))


# -- scaling -----------------------------------------------------------------

def _scales(rates: ModelRates, m1: float) -> tuple[float, float]:
    if not m1 > 0:
        raise ValueError(f"mass must be positive, got m1={m1}")
    size_scale = rates.p / (m1 * rates.q)
    amplitude = rates.p**2 / (m1 * rates.q**2)
    return size_scale, amplitude


def time_scale(rates: ModelRates, m1: float) -> float:
    """Factor ``p^3/(m1^2 q^2)`` mapping physical time to normalized time."""
    _scales(rates, m1)
    return rates.p**3 / (m1**2 * rates.q**2)


def rescale_solution(f: Distribution, rates: ModelRates, m1: float, inverse: bool = False) -> Distribution:
    """Map a normalized (p = q = m1 = 1) solution to general parameters.

    ``f_{p,q}(x) = A f_{1,1}(s x)`` with ``s = p/(m1 q)`` and
    ``A = p^2/(m1 q^2)``, so the grid spacing becomes ``h/s``. With
    ``inverse=True`` the map goes the other way. The accompanying time
    rescaling is available from :func:`time_scale`.
    """
    s, amp = _scales(rates, m1)
    if inverse:
        s, amp = 1.0 / s, 1.0 / amp
    grid = Grid(f.grid.h / s, f.grid.L / s)
    return Distribution(grid, amp * np.asarray(f.values))
