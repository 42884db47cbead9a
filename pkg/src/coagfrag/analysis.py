"""Asymptotic profiles, monotonicity checks and convergence-rate estimates."""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from .model import Distribution
from .recursive import equilibrium_for_mass

LOG10E = math.log10(math.e)
DECAY = 4.0 / 27.0  # exponential decay rate of the normalized equilibrium
C_SMALL_CONST = 1.0 / (3.0 * math.gamma(4.0 / 3.0))
C_LARGE_CONST = 9.0 / (16.0 * math.gamma(1.5))


class AsymptoteKind(enum.Enum):
    C_SMALL = "c_small"
    C_LARGE = "c_large"
    D_LARGE = "d_large"
    NIWA = "niwa"


@dataclass(frozen=True)
class AsymptoteModel:
    """Closed-form profile.

    ``C_SMALL``/``C_LARGE`` are the small- and large-size forms of the
    continuous equilibrium with unit mass, evaluated at a size ``x``.
    ``D_LARGE`` is the large-index form of the discrete sequence ``f_n^h``
    for mass ``m1`` and spacing ``h``, evaluated at an index ``n``. ``NIWA``
    is the unnormalized profile ``N^-1 exp[-(N/N_P)(1 - exp(-N/N_P)/2)]``.
    """

    kind: AsymptoteKind
    m1: float = 1.0
    h: Optional[float] = None
    n_p: Optional[float] = None

    def __post_init__(self):
        if self.kind is AsymptoteKind.D_LARGE and not (self.h and self.h > 0 and self.m1 > 0):
            raise ValueError("D_LARGE needs positive h and m1")
        if self.kind is AsymptoteKind.NIWA and not (self.n_p and self.n_p > 0):
            raise ValueError("NIWA needs a positive N_P")

    @property
    def z(self) -> float:
        return 1.0 + 4.0 * self.h / (27.0 * self.m1)

    @property
    def d_const(self) -> float:
        return 9.0 / 8.0 * math.sqrt(self.m1 * self.z / (self.h * math.pi))


def _positive(arg):
    a = np.asarray(arg, dtype=float)
    if np.any(~(a > 0)):
        raise ValueError(f"asymptote argument must be positive, got {arg}")
    return a


def _out(a):
    return float(a) if np.ndim(a) == 0 else a


def asymptote_eval(model: AsymptoteModel, arg):
    """Evaluate the profile directly (may underflow for large arguments)."""
    x = _positive(arg)
    k = model.kind
    if k is AsymptoteKind.C_SMALL:
        v = C_SMALL_CONST * x ** (-2.0 / 3.0) * np.exp(-DECAY * x)
    elif k is AsymptoteKind.C_LARGE:
        v = C_LARGE_CONST * x**-1.5 * np.exp(-DECAY * x)
    elif k is AsymptoteKind.D_LARGE:
        v = model.d_const * model.z ** (-x) * x**-1.5
    else:
        r = x / model.n_p
        v = np.exp(-r * (1.0 - 0.5 * np.exp(-r))) / x
    return _out(v)


def log10_asymptote(model: AsymptoteModel, arg):
    """Base-10 log of :func:`asymptote_eval`, computed without underflow."""
    x = _positive(arg)
    k = model.kind
    lx = np.log10(x)
    if k is AsymptoteKind.C_SMALL:
        v = math.log10(C_SMALL_CONST) - DECAY * x * LOG10E - (2.0 / 3.0) * lx
    elif k is AsymptoteKind.C_LARGE:
        v = math.log10(C_LARGE_CONST) - DECAY * x * LOG10E - 1.5 * lx
    elif k is AsymptoteKind.D_LARGE:
        v = math.log10(model.d_const) - x * math.log10(model.z) - 1.5 * lx
    else:
        r = x / model.n_p
        v = -lx - r * (1.0 - 0.5 * np.exp(-r)) * LOG10E
    return _out(v)


def log10_density_asymptote(model: AsymptoteModel, x):
    """Profile on the density scale as a function of size ``x``.

    Only ``D_LARGE`` differs from :func:`log10_asymptote`: the index is
    ``n = x/h`` and the sequence value is divided by ``h``.
    """
    if model.kind is AsymptoteKind.D_LARGE:
        x = _positive(x)
        return _out(np.asarray(log10_asymptote(model, x / model.h)) - math.log10(model.h))
    return log10_asymptote(model, x)


def asymptote_gap(h: float, x, m1: float = 1.0):
    """Discrete minus continuous large-size asymptote, log10, density scale."""
    d = log10_density_asymptote(AsymptoteModel(AsymptoteKind.D_LARGE, m1=m1, h=h), x)
    c = log10_asymptote(AsymptoteModel(AsymptoteKind.C_LARGE), x)
    return _out(np.asarray(d) - np.asarray(c))


def gamma_profile(f: Distribution) -> np.ndarray:
    """``f_i exp(4 i h / 27)``: the completely monotone factor of an equilibrium."""
    return np.asarray(f.values) * np.exp(DECAY * f.grid.x)


@dataclass(frozen=True)
class MonotonicityReport:
    order_satisfied: int
    first_violation: Optional[tuple]  # (order, 1-based index)


def complete_monotonicity_check(values, max_order: int) -> MonotonicityReport:
    """Largest ``k <= max_order`` with ``(-1)^j Δ^j f >= 0`` for all ``j <= k``.

    ``Δf_n = f_{n+1} - f_n``; entries down to ``-1e-12 max|f|`` count as
    non-negative.
    """
    if max_order < 1:
        raise ValueError(f"max_order must be >= 1, got {max_order}")
    d = np.asarray(values, dtype=float)
    tol = -1e-12 * (float(np.max(np.abs(d))) if d.size else 0.0)
    for k in range(1, max_order + 1):
        d = np.diff(d)
        signed = (-1) ** k * d
        bad = np.nonzero(signed < tol)[0]
        if bad.size:
            return MonotonicityReport(k - 1, (k, int(bad[0]) + 1))
    return MonotonicityReport(max_order, None)


def relative_distance(f_t: Distribution, f_inf: Distribution, indices: Sequence[int]) -> list:
    """``|f_i(t) - f_i^inf| / f_i^inf`` at 1-based ``indices``."""
    if f_t.grid != f_inf.grid:
        raise ValueError("relative_distance needs distributions on the same grid")
    out = []
    for i in indices:
        ref = f_inf.values[i - 1]
        if not ref > 0:
            raise ValueError(f"equilibrium vanishes at index {i}")
        out.append(float(abs(f_t.values[i - 1] - ref) / ref))
    return out


def convergence_rate(mu1: float, mu2: float, t1: float, t2: float) -> float:
    """Exponential rate ``log(mu1/mu2)/(t2 - t1)`` (natural log)."""
    if not t2 > t1:
        raise ValueError(f"need t2 > t1, got t1={t1}, t2={t2}")
    if not (mu1 > 0 and mu2 > 0):
        raise ValueError(f"relative distances must be positive, got {mu1}, {mu2}")
    return math.log(mu1 / mu2) / (t2 - t1)


@dataclass
class RateTable:
    """Relative distances ``mu[s, t]`` and rates between consecutive times."""

    sizes: list
    times: list
    mu: np.ndarray
    delta: np.ndarray = field(default=None)

    def __post_init__(self):
        self.mu = np.asarray(self.mu, dtype=float)
        if self.delta is None:
            self.delta = self._rates()

    def _rates(self) -> np.ndarray:
        out = np.full((len(self.sizes), max(len(self.times) - 1, 0)), np.nan)
        for s in range(len(self.sizes)):
            for k in range(len(self.times) - 1):
                a, b = self.mu[s, k], self.mu[s, k + 1]
                if a > 0 and b > 0:
                    out[s, k] = convergence_rate(a, b, self.times[k], self.times[k + 1])
        return out

    def rows(self):
        """``(x, t, mu)`` in size-major order."""
        for s, x in enumerate(self.sizes):
            for k, t in enumerate(self.times):
                yield x, t, float(self.mu[s, k])


def rate_table(trajectory, f_inf: Distribution, sizes: Sequence[float], times: Sequence[float]) -> RateTable:
    """Distances of trajectory snapshots at ``times`` from ``f_inf`` at ``sizes``."""
    grid = f_inf.grid
    idx = [grid.index_of(x) for x in sizes]
    mu = np.array([[relative_distance(trajectory.at(t), f_inf, [i])[0] for t in times] for i in idx])
    return RateTable(list(sizes), list(times), mu)


def loglog_slope(x, y, lo: float, hi: float) -> float:
    """Least-squares slope of ``log10 y`` against ``log10 x`` on ``[lo, hi]``."""
    x, y = np.asarray(x, float), np.asarray(y, float)
    sel = (x >= lo * (1 - 1e-12)) & (x <= hi * (1 + 1e-12)) & (y > 0)
    if sel.sum() < 2:
        raise ValueError(f"fewer than two points in [{lo}, {hi}]")
    return float(np.polyfit(np.log10(x[sel]), np.log10(y[sel]), 1)[0])


@dataclass
class RefinementRow:
    h: float
    x: float
    log10_density: float
    log10_c_large: float
    log10_d_large: float

    @property
    def gap(self) -> float:
        return abs(self.log10_density - self.log10_c_large)


def grid_refinement_study(m1: float, h_list: Sequence[float], L: float, x_points: Sequence[float]) -> list:
    """Recursive equilibria for decreasing ``h`` against the continuous asymptote.

    Terms are computed only up to the largest requested ``x``; the recursion
    is forward-closed, so further terms would not change them.
    """
    hs = list(h_list)
    if any(b >= a for a, b in zip(hs, hs[1:])):
        raise ValueError(f"h_list must be strictly descending, got {hs}")
    c_model = AsymptoteModel(AsymptoteKind.C_LARGE)
    rows = []
    for h in hs:
        n_total = L / h
        if abs(n_total - round(n_total)) > 1e-9 * n_total:
            raise ValueError(f"h={h} does not divide L={L}")
        if any(not 0 < x <= L for x in x_points):
            raise ValueError(f"evaluation points must lie in (0, {L}]")
        idx = [int(round(x / h)) for x in x_points]
        seq = equilibrium_for_mass(m1, h, max(idx))
        d_model = AsymptoteModel(AsymptoteKind.D_LARGE, m1=m1, h=h)
        for x, i in zip(x_points, idx):
            rows.append(
                RefinementRow(
                    h=h,
                    x=x,
                    log10_density=math.log10(seq.values[i - 1] / h),
                    log10_c_large=log10_asymptote(c_model, x),
                    log10_d_large=log10_density_asymptote(d_model, x),
                )
            )
    return rows
