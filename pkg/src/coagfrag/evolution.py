"""Explicit Euler time stepping of the truncated discrete model.

``f^{k+1} = f^k + dt * rhs(f^k)`` with either a fixed step or the adaptive
rule: a candidate that is non-negative and non-increasing in size is
accepted and the step grows by 10% (capped at ``dt_max``); otherwise it is
discarded, the step shrinks by 10% and the same state is retried.

The truncated equilibrium itself rises slightly in a thin layer below the
cut-off ``L`` (coagulation partners above ``L`` are missing), so the
monotonicity test ignores the top ``monotone_exclude`` fraction of the grid.
Setting it to 0 checks every point.
"""

from __future__ import annotations

import enum
import logging
from dataclasses import dataclass, field

import numpy as np

from .errors import BlowUpError, NegativeStateError, StepCollapseError
from .model import CLAMP_TOL, Distribution, Grid, MassConvention, moment, rhs_kernel

logger = logging.getLogger(__name__)

DT_MIN = 1e-8
MONO_RTOL = 1e-12
MONO_ATOL = 1e-300
_LANDING_TOL = 1e-12


class StepMode(enum.Enum):
    FIXED = "fixed"
    ADAPTIVE = "adaptive"


@dataclass(frozen=True)
class StepPolicy:
    mode: StepMode = StepMode.ADAPTIVE
    dt0: float = 1e-2
    dt_fixed: float = 1.0
    dt_max: float = 1.1
    grow: float = 1.10
    shrink: float = 0.90
    monotone_exclude: float = 0.05

    def __post_init__(self):
        if not 0 < self.shrink < 1 < self.grow:
            raise ValueError(f"need 0 < shrink < 1 < grow, got {self.shrink}, {self.grow}")
        if not (self.dt0 > 0 and self.dt_fixed > 0 and self.dt_max > 0):
            raise ValueError("time steps must be positive")
        if self.dt0 > self.dt_max:
            raise ValueError(f"dt0={self.dt0} exceeds dt_max={self.dt_max}")
        if not 0 <= self.monotone_exclude < 1:
            raise ValueError(f"monotone_exclude must be in [0, 1), got {self.monotone_exclude}")

    @classmethod
    def fixed(cls, dt: float, **kw) -> "StepPolicy":
        return cls(mode=StepMode.FIXED, dt_fixed=dt, **kw)


@dataclass
class Trajectory:
    times: list = field(default_factory=list)
    states: list = field(default_factory=list)
    accepted_steps: int = 0
    rejected_steps: int = 0
    final_dt: float = 0.0
    flagged_steps: int = 0  # FIXED mode: accepted steps that broke a criterion

    @property
    def snapshots(self) -> list:
        return list(zip(self.times, self.states))

    @property
    def final(self) -> Distribution:
        return self.states[-1]

    def at(self, t: float) -> Distribution:
        for ts, f in zip(self.times, self.states):
            if abs(ts - t) <= 1e-9 * max(1.0, abs(t)):
                return f
        raise KeyError(f"no snapshot at t={t}; have {self.times}")

    def mass_drift(self) -> float:
        masses = [moment(f, 1, MassConvention.MODEL_D_PRIME) for f in self.states]
        ref = masses[0]
        if ref == 0:
            return 0.0
        return max(abs(m - ref) for m in masses) / abs(ref)


def uniform_init(m1: float, grid: Grid) -> Distribution:
    """Constant distribution with mass ``m1``."""
    if not m1 > 0:
        raise ValueError(f"m1 must be positive, got {m1}")
    n, h = grid.N, grid.h
    return Distribution(grid, np.full(n, 2.0 * m1 / (h * h * n * (n + 1))))


def is_monotone(a: np.ndarray, exclude: float = 0.0) -> bool:
    """Non-increasing in the index, up to roundoff, below the excluded top layer."""
    n = a.size
    stop = n - int(exclude * n)
    head = a[:stop]
    return bool(np.all(head[1:] <= head[:-1] * (1.0 + MONO_RTOL) + MONO_ATOL))


@dataclass
class Candidate:
    values: np.ndarray
    nonnegative: bool
    monotone: bool

    @property
    def acceptable(self) -> bool:
        return self.nonnegative and self.monotone


def euler_step(f, dt: float, monotone_exclude: float = 0.0) -> Candidate:
    """Candidate ``f + dt * rhs(f)`` with positivity/monotonicity flags."""
    if not dt > 0:
        raise ValueError(f"dt must be positive, got {dt}")
    a = np.asarray(f.values, dtype=float)
    new = a + dt * rhs_kernel(a, f.grid.h)
    return Candidate(new, bool(np.all(new >= 0)), is_monotone(new, monotone_exclude))


def evolve(f0: Distribution, t_end: float, policy: StepPolicy | None = None, snapshot_times=()) -> Trajectory:
    """Integrate from ``f0`` to ``t_end``, recording snapshots.

    The initial state and the state at ``t_end`` are always recorded; steps
    are shortened to land exactly on every requested snapshot time.
    """
    policy = policy or StepPolicy()
    if t_end < 0:
        raise ValueError(f"t_end must be non-negative, got {t_end}")
    targets = sorted({float(t) for t in snapshot_times} | {float(t_end)})
    if any(t <= 0 or t > t_end for t in snapshot_times):
        raise ValueError(f"snapshot times must lie in (0, t_end={t_end}]")
    targets = [t for t in targets if t > 0]

    grid = f0.grid
    h = grid.h
    a = np.array(f0.values, dtype=float)
    traj = Trajectory(times=[0.0], states=[f0])
    adaptive = policy.mode is StepMode.ADAPTIVE
    dt = policy.dt0 if adaptive else policy.dt_fixed
    t = 0.0

    for target in targets:
        while target - t > _LANDING_TOL * max(1.0, target):
            step = min(dt, target - t)
            with np.errstate(over="ignore", invalid="ignore"):
                new = a + step * rhs_kernel(a, h)
            if not np.all(np.isfinite(new)):
                raise BlowUpError(f"numerical blow-up at t={t:.6g} with dt={step:.3g}")
            ok = bool(np.all(new >= 0)) and is_monotone(new, policy.monotone_exclude)
            if adaptive:
                if not ok:
                    traj.rejected_steps += 1
                    dt *= policy.shrink
                    if dt < DT_MIN:
                        raise StepCollapseError(f"step collapse at t={t:.6g}: dt={dt:.3g}")
                    continue
                dt = min(dt * policy.grow, policy.dt_max)
            elif not ok:
                traj.flagged_steps += 1
            a = new
            t += step
            traj.accepted_steps += 1
        t = target
        if a.min() < -CLAMP_TOL:
            i = int(np.argmin(a)) + 1
            raise NegativeStateError(
                f"state negative at t={t:.6g}: {a.min():.3e} at i={i} (x={i * h:g}); "
                f"fixed step {policy.dt_fixed:g} is too large"
            )
        traj.times.append(target)
        traj.states.append(Distribution(grid, a))
    traj.final_dt = dt
    logger.info(
        "evolve: t_end=%g accepted=%d rejected=%d flagged=%d final_dt=%g",
        t_end, traj.accepted_steps, traj.rejected_steps, traj.flagged_steps, dt,
    )
    return traj
