"""Logistic meme-amplitude dynamics.

The amplitude ``y`` grows at a rate proportional to itself and is bounded
above by the energy gap ``delta_e``::

    y' = (A / delta_e) * y * (delta_e - y)

Because ``y = 0`` is a fixed point, trajectories start from a small offset
``y0 = epsilon * delta_e`` rather than from zero; the zero level is then
only reached asymptotically in reverse time.
"""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np

from ._rk4 import rk4_step, time_grid
from .errors import StepUnstable, ValidationError
from .series import TimeSeries

DEFAULT_EPSILON = 0.01
MAX_STAGE_STEPS = 10_000_000


@dataclass(frozen=True)
class LogisticParams:
    affinity: float
    delta_e: float
    y0: float

    def __post_init__(self):
        if not math.isfinite(self.affinity):
            raise ValidationError(f"affinity must be finite, got {self.affinity!r}")
        if not (math.isfinite(self.delta_e) and self.delta_e > 0):
            raise ValidationError(f"delta_e must be finite and > 0, got {self.delta_e!r}")
        if not (0 < self.y0 < self.delta_e):
            raise ValidationError(f"y0 must lie in (0, delta_e={self.delta_e!r}), got {self.y0!r}")

    @classmethod
    def from_epsilon(cls, affinity, delta_e, epsilon=DEFAULT_EPSILON):
        """Parameters whose start sits ``epsilon * delta_e`` above the lower asymptote."""
        return cls(affinity, delta_e, epsilon * delta_e)


class Validity(str, enum.Enum):
    IN_RANGE = "InRange"
    OUT_OF_RANGE = "OutOfRange"


@dataclass(frozen=True)
class EnergyContext:
    """Applied energy and the closed interval where a constant affinity is trusted."""

    applied_energy: float
    lo: float
    hi: float

    def __post_init__(self):
        if not (self.applied_energy >= 0 and math.isfinite(self.applied_energy)):
            raise ValidationError(f"applied_energy must be finite and >= 0, got {self.applied_energy!r}")
        if not self.lo <= self.hi:
            raise ValidationError(f"validity interval is empty: [{self.lo}, {self.hi}]")


@dataclass(frozen=True)
class StageSpec:
    params: LogisticParams
    completion_fraction: float = 0.99

    def __post_init__(self):
        if not 0 < self.completion_fraction < 1:
            raise ValidationError(
                f"completion_fraction must lie in (0, 1), got {self.completion_fraction!r}"
            )


def logistic_rhs(y, p: LogisticParams):
    return (p.affinity / p.delta_e) * y * (p.delta_e - y)


def logistic_closed_form(t, p: LogisticParams):
    """Exact solution of the logistic equation started at ``p.y0`` when ``t = 0``."""
    t = np.asarray(t, dtype=float)
    ratio = (p.delta_e - p.y0) / p.y0
    out = p.delta_e / (1.0 + ratio * np.exp(-p.affinity * t))
    return float(out) if out.ndim == 0 else out


def logistic_curvature(y, p: LogisticParams):
    """Second time derivative of the amplitude expressed through ``y``.

    Vanishes at ``0``, ``delta_e / 2`` and ``delta_e``; positive below the
    midpoint and negative above it.
    """
    k = p.affinity / p.delta_e
    return k * k * y * (p.delta_e - 2.0 * y) * (p.delta_e - y)


def exponential_solution(t, affinity: float, y0: float):
    """Unbounded growth ``y0 * exp(affinity * t)``."""
    if not y0 > 0:
        raise ValidationError(f"y0 must be > 0, got {y0!r}")
    out = y0 * np.exp(affinity * np.asarray(t, dtype=float))
    return float(out) if out.ndim == 0 else out


def check_context(p: LogisticParams, ctx: EnergyContext) -> Validity:
    if ctx.lo <= ctx.applied_energy <= ctx.hi:
        return Validity.IN_RANGE
    return Validity.OUT_OF_RANGE


def _guard_step(p: LogisticParams, step: float):
    if not (step > 0 and math.isfinite(step)):
        raise ValidationError(f"step must be finite and > 0, got {step!r}")
    # |df/dy| <= |A| everywhere on [0, delta_e]
    if abs(p.affinity) * step >= 1.0:
        raise StepUnstable(
            f"step {step!r} too large for affinity {p.affinity!r}: need |A|*step < 1"
        )


def _context_warnings(p, context):
    if context is None:
        return ()
    if check_context(p, context) is Validity.OUT_OF_RANGE:
        return (
            f"applied energy {context.applied_energy!r} outside validity interval "
            f"[{context.lo!r}, {context.hi!r}]; constant-affinity model may not hold",
        )
    return ()


def integrate(p: LogisticParams, t_end: float, step: float, context: EnergyContext | None = None):
    """Fixed-step RK4 trajectory of the logistic equation on ``[0, t_end]``."""
    if not (t_end > 0 and math.isfinite(t_end)):
        raise ValidationError(f"t_end must be finite and > 0, got {t_end!r}")
    _guard_step(p, step)
    if step > t_end:
        raise ValidationError(f"step {step!r} exceeds t_end {t_end!r}")
    t = time_grid(t_end, step)
    y = np.empty_like(t)
    y[0] = p.y0
    f = lambda v: logistic_rhs(v, p)  # noqa: E731
    for k in range(1, t.size):
        y[k] = rk4_step(f, y[k - 1], t[k] - t[k - 1])
    return TimeSeries(t, y, _context_warnings(p, context))


def _step_to_level(f, y, h, target):
    """Step size in ``(0, h]`` whose RK4 step from ``y`` lands on ``target``."""
    lo, hi = 0.0, h
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if mid <= lo or mid >= hi:
            break
        if rk4_step(f, y, mid) < target:
            lo = mid
        else:
            hi = mid
    return hi


def _run_stage(stage: StageSpec, step: float):
    p = stage.params
    target = stage.completion_fraction * p.delta_e
    if p.affinity <= 0:
        raise ValidationError(f"stage with affinity {p.affinity!r} can never reach its completion level")
    if p.y0 >= target:
        raise ValidationError(
            f"stage starts at y0={p.y0!r}, already at or past its completion level {target!r}"
        )
    _guard_step(p, step)
    f = lambda v: logistic_rhs(v, p)  # noqa: E731
    ts, ys = [0.0], [p.y0]
    t, y = 0.0, p.y0
    for _ in range(MAX_STAGE_STEPS):
        y_next = rk4_step(f, y, step)
        if y_next >= target:
            h = _step_to_level(f, y, step, target)
            ts.append(t + h)
            ys.append(target)
            return np.array(ts), np.array(ys)
        t, y = t + step, y_next
        ts.append(t)
        ys.append(y)
    raise StepUnstable(f"stage did not reach its completion level within {MAX_STAGE_STEPS} steps")


def run_stages(stages, step: float) -> TimeSeries:
    """Chain logistic transitions, each starting where the previous completed.

    Stage ``k`` runs until its local amplitude reaches
    ``completion_fraction * delta_e``; the final step is shortened so the
    stage ends exactly on that level. Stage ``k + 1`` then starts from its own
    ``y0`` measured above a resting level chosen so the global curve is
    continuous: ``resting = y_handover - y0_next``. Amplitudes thus stack.
    """
    stages = list(stages)
    if not stages:
        raise ValidationError("run_stages needs at least one stage")
    t_all, y_all = [np.array([0.0])], [np.array([stages[0].params.y0])]
    t_off, base = 0.0, 0.0
    for k, stage in enumerate(stages):
        lt, ly = _run_stage(stage, step)
        # first sample duplicates the previous stage's handover point
        t_all.append(lt[1:] + t_off)
        y_all.append(ly[1:] + base)
        t_off += lt[-1]
        if k + 1 < len(stages):
            base += ly[-1] - stages[k + 1].params.y0
    return TimeSeries(np.concatenate(t_all), np.concatenate(y_all))


def time_to_level(series: TimeSeries, level: float) -> float:
    """First time the series reaches ``level``, linearly interpolated."""
    y = series.y
    idx = np.nonzero(y >= level)[0]
    if idx.size == 0:
        return math.inf
    k = int(idx[0])
    if k == 0:
        return float(series.t[0])
    t0, t1, y0, y1 = series.t[k - 1], series.t[k], y[k - 1], y[k]
    return float(t0 + (level - y0) * (t1 - t0) / (y1 - y0))
