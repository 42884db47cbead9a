"""Exact equilibrium of the discrete model by forward recursion.

For a number moment ``m0`` in (0, 1) the stationary sequence satisfies

    b_1     = (m0 - m0^2) / 2
    f_i     = (2 b_i + sum_{j=1}^{i-1} f_j f_{i-j}) / (1 + 2 m0)
    b_{i+1} = b_i - f_i / (i + 1)

where ``b_i = sum_{j>=i} f_j/(j+1)``. The recursion is forward-closed, so
computing more terms never changes earlier ones. ``m0`` is tied to the mass
``m1`` by ``m0 / (1 - m0)^3 = m1 / h``.

``b_i`` is obtained by subtraction from an O(1) start value while the true
tail decays like ``z^-i``, so in double precision terms below roughly
``1e-16 * b_1`` are noise. Pass ``dps`` to run the recursion in
``mpmath`` with that many decimal digits when the deep tail matters.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np

from .errors import RecursionBreakdown
from .model import Distribution, Grid, MassConvention, moment

NEG_TOL = 1e-13
BISECTION_STEPS = 60


@dataclass(frozen=True, eq=False)
class EquilibriumSequence:
    """Model D equilibrium ``f_i^h`` (``~ h f(ih)``) for ``i = 1..M``."""

    h: float
    m0: float
    m1: float
    values: np.ndarray
    b_tail: float  # b_{M+1}

    @property
    def M(self) -> int:
        return self.values.size

    @property
    def x(self) -> np.ndarray:
        return self.h * np.arange(1, self.M + 1)

    @property
    def density(self) -> np.ndarray:
        """Values rescaled to a density, ``f_i^h / h``."""
        return self.values / self.h

    def number(self) -> float:
        return moment(self, 0, MassConvention.MODEL_D)

    def mass(self) -> float:
        return moment(self, 1, MassConvention.MODEL_D)

    def to_distribution(self, N: int | None = None) -> Distribution:
        """First ``N`` terms as a density on the grid ``L = N h``."""
        N = self.M if N is None else N
        if not 1 <= N <= self.M:
            raise ValueError(f"N={N} outside 1..{self.M}")
        return Distribution(Grid(self.h, N * self.h), self.values[:N] / self.h)


def solve_m0(m1: float, h: float) -> float:
    """Root in (0, 1) of ``m0/(1-m0)^3 = m1/h`` by bisection.

    The left side is increasing on (0, 1), so the bracket always holds; 60
    halvings take the interval far below 1e-14.
    """
    if not (m1 > 0 and h > 0):
        raise ValueError(f"m1 and h must be positive, got m1={m1}, h={h}")
    r = m1 / h
    lo, hi = 0.0, 1.0
    for _ in range(BISECTION_STEPS):
        mid = 0.5 * (lo + hi)
        # m/(1-m)^3 - r has the sign of m - r (1-m)^3
        if mid - r * (1.0 - mid) ** 3 > 0:
            hi = mid
        else:
            lo = mid
    return 0.5 * (lo + hi)


def _recursion_double(m0: float, M: int, debug: bool):
    f = np.zeros(M)
    denom = 1.0 + 2.0 * m0
    b1 = 0.5 * (m0 - m0 * m0)
    b = b1
    removed = []
    for i in range(1, M + 1):
        if b < -NEG_TOL:
            raise RecursionBreakdown(f"b_{i} = {b:.3e} < 0; m0={m0} is invalid or precision is exhausted")
        conv = float(np.dot(f[: i - 1], f[i - 2 :: -1])) if i > 1 else 0.0
        fi = (2.0 * b + conv) / denom
        if fi < -NEG_TOL:
            raise RecursionBreakdown(f"f_{i} = {fi:.3e} < 0")
        fi = max(fi, 0.0)
        f[i - 1] = fi
        b -= fi / (i + 1)
        if debug:
            removed.append(fi / (i + 1))
            ref = b1 - math.fsum(removed)
            scale = max(abs(ref), abs(b))
            if scale > 0 and abs(ref - b) > 1e-8 * scale:
                warnings.warn(
                    f"b_{i + 1} cancellation: running {b:.6e} vs summed {ref:.6e}",
                    RuntimeWarning,
                    stacklevel=3,
                )
    return f, b


def _recursion_mp(m0: float, M: int, dps: int):
    import mpmath

    with mpmath.workdps(dps):
        m0m = mpmath.mpf(m0)
        denom = 1 + 2 * m0m
        b = (m0m - m0m**2) / 2
        f: list = []
        for i in range(1, M + 1):
            if b < -NEG_TOL:
                raise RecursionBreakdown(f"b_{i} = {float(b):.3e} < 0")
            conv = mpmath.fdot(f, f[::-1]) if f else mpmath.mpf(0)
            fi = (2 * b + conv) / denom
            if fi < -NEG_TOL:
                raise RecursionBreakdown(f"f_{i} = {float(fi):.3e} < 0")
            f.append(fi)
            b -= fi / (i + 1)
        return np.array([max(float(v), 0.0) for v in f]), float(b)


def equilibrium_sequence(m0: float, h: float, M: int, *, dps: int | None = None, debug: bool = False) -> EquilibriumSequence:
    """First ``M`` terms of the model D equilibrium with number moment ``m0``.

    Cost is O(M^2). With ``dps`` the arithmetic runs at that many decimal
    digits; ``debug`` re-sums ``b_i`` at each step and warns when the running
    value drifts by more than 1e-8 relative.
    """
    if not 0 < m0 < 1:
        raise ValueError(f"m0 must lie in (0, 1), got {m0}")
    if not h > 0:
        raise ValueError(f"h must be positive, got {h}")
    if int(M) != M or M < 1:
        raise ValueError(f"M must be a positive integer, got {M}")
    M = int(M)
    if dps is None:
        values, b = _recursion_double(m0, M, debug)
    else:
        values, b = _recursion_mp(m0, M, dps)
    values.setflags(write=False)
    m1 = h * m0 / (1.0 - m0) ** 3
    return EquilibriumSequence(h=float(h), m0=float(m0), m1=m1, values=values, b_tail=b)


def equilibrium_for_mass(m1: float, h: float, M: int, **kwargs) -> EquilibriumSequence:
    """Convenience wrapper: solve for ``m0`` then run the recursion."""
    return equilibrium_sequence(solve_m0(m1, h), h, M, **kwargs)


def stationarity_defect(seq: EquilibriumSequence, N: int | None = None) -> np.ndarray:
    """``sum_{j<i} f_j f_{i-j} - (2 m0 + 1) f_i + 2 b_i`` for ``i = 1..N``.

    ``b_i`` is rebuilt from the stored terms, so this is an independent check
    of the recursion output rather than a replay of it.
    """
    f = np.asarray(seq.values)
    N = f.size if N is None else N
    i = np.arange(1, f.size + 1)
    b1 = 0.5 * (seq.m0 - seq.m0**2)
    removed = np.concatenate(([0.0], np.cumsum(f / (i + 1))))
    b = b1 - removed[:N]
    conv = np.zeros(N)
    full = np.convolve(f[:N], f[:N])
    conv[1:] = full[: N - 1]
    return conv - (2 * seq.m0 + 1) * f[:N] + 2 * b


@dataclass(frozen=True)
class SmallSizeIndicator:
    f1_exact: float
    f1_leading: float

    @property
    def ratio(self) -> float:
        return self.f1_exact / self.f1_leading


def small_size_indicator(h: float, m1: float) -> SmallSizeIndicator:
    """First equilibrium term and its small-``h`` leading form.

    ``f_1^h = m0 (1 - m0)/(1 + 2 m0)`` behaves like ``(1/3)(h/m1)^{1/3}``
    as ``h -> 0``.
    """
    m0 = solve_m0(m1, h)
    exact = m0 * (1.0 - m0) / (1.0 + 2.0 * m0)
    leading = (h / m1) ** (1.0 / 3.0) / 3.0
    return SmallSizeIndicator(exact, leading)
