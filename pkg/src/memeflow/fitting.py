"""Estimation of logistic and exponential growth parameters from a series.

The logistic fit is a damped Gauss-Newton (Levenberg-Marquardt) least-squares
solve on the closed-form trajectory. Internally the curve is written as::

    f(t) = exp(u_amp) * expit(A * t + u_phase)

so that ``delta_e = exp(u_amp) > 0`` and ``y0 = delta_e * expit(u_phase)``
always lie inside their admissible ranges. The exponential fit is ordinary
least squares of ``ln y`` against ``t``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .dynamics import LogisticParams
from .errors import DegenerateSeries, NonPositiveData, TooFewSamples
from .series import TimeSeries

LOGISTIC = "Logistic"
EXPONENTIAL = "Exponential"

MAX_ITER = 500
SSE_RTOL = 1e-10
STEP_TOL = 1e-8


@dataclass(frozen=True)
class ExponentialParams:
    affinity: float
    y0: float


@dataclass(frozen=True, eq=False)
class FitReport:
    model: str
    params: LogisticParams | ExponentialParams
    sse: float
    aic: float
    residuals: np.ndarray
    converged: bool
    iterations: int

    @property
    def n_params(self):
        return n_params(self.model)

    @property
    def perfect_fit(self):
        return self.sse == 0.0

    def predict(self, t):
        return predict(self.model, self.params, t)

    def to_dict(self):
        if self.model == LOGISTIC:
            params = {
                "affinity": self.params.affinity,
                "delta_e": self.params.delta_e,
                "y0": self.params.y0,
            }
        else:
            params = {"affinity": self.params.affinity, "y0": self.params.y0}
        return {
            "model": self.model,
            "params": params,
            "sse": self.sse,
            # -inf (perfect fit) has no JSON spelling
            "aic": None if math.isinf(self.aic) else self.aic,
            "converged": self.converged,
            "iterations": self.iterations,
        }


def n_params(model: str) -> int:
    return {LOGISTIC: 3, EXPONENTIAL: 2}[model]


def predict(model, params, t):
    t = np.asarray(t, dtype=float)
    if model == LOGISTIC:
        ratio = (params.delta_e - params.y0) / params.y0
        return params.delta_e / (1.0 + ratio * np.exp(-params.affinity * t))
    return params.y0 * np.exp(params.affinity * t)


def aic(sse: float, n: int, k: int) -> float:
    """Akaike criterion for Gaussian residuals; ``-inf`` for a perfect fit."""
    if sse == 0.0:
        return -math.inf
    return n * math.log(sse / n) + 2 * k


def goodness(series: TimeSeries, report: FitReport):
    """``(sse, aic)`` of ``report`` re-evaluated on ``series``.

    A zero residual sum yields ``aic = -inf``; check ``report.perfect_fit``.
    """
    r = series.y - report.predict(series.t)
    sse = float(np.dot(r, r))
    return sse, aic(sse, len(series), report.n_params)


def _expit(z):
    z = np.asarray(z, dtype=float)
    out = np.empty_like(z)
    pos = z >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-z[pos]))
    ez = np.exp(z[~pos])
    out[~pos] = ez / (1.0 + ez)
    return out


def _curve(u, t):
    a, amp, phase = u
    return math.exp(amp) * _expit(a * t + phase)


def _jacobian(u, t, f):
    a, amp, phase = u
    s_minus = _expit(-(a * t + phase))  # 1 - expit, without cancellation
    J = np.empty((t.size, 3))
    J[:, 0] = f * s_minus * t
    J[:, 1] = f
    J[:, 2] = f * s_minus
    bad = ~np.all(np.isfinite(J), axis=0) | ~np.any(J != 0.0, axis=0)
    for k in np.nonzero(bad)[0]:
        # analytic column underflowed; forward difference instead
        h = 1e-7 * max(1.0, abs(u[k]))
        up = np.array(u, dtype=float)
        up[k] += h
        J[:, k] = (_curve(up, t) - f) / h
    return J


def _logit_line(t, y, delta_e):
    """Least-squares line through ``logit(y / delta_e)`` for positive samples."""
    m = (y > 0) & (y < delta_e)
    if np.count_nonzero(m) < 2:
        return None
    z = np.log(y[m] / (delta_e - y[m]))
    tm = t[m]
    tc = tm - tm.mean()
    denom = float(np.dot(tc, tc))
    if denom == 0.0:
        return None
    slope = float(np.dot(tc, z - z.mean()) / denom)
    return slope, float(z.mean() - slope * tm.mean())


def _seed(t, y, max_delta_e):
    """Deterministic starting point from the early samples plus a coarse grid."""
    ymax = float(y.max())
    de0 = 1.05 * ymax
    if max_delta_e is not None:
        de0 = min(de0, max_delta_e)
    n = t.size
    early = slice(0, max(3, n // 2))
    line = _logit_line(t[early], y[early], de0) or _logit_line(t, y, de0)
    span = float(t[-1] - t[0])
    if line is None or not math.isfinite(line[0]) or line[0] == 0.0:
        a0 = 4.0 / span
    else:
        a0 = line[0]
    best = None
    for de_mult in (1.0, 1.5, 3.0):
        de = de0 * de_mult
        if max_delta_e is not None and de > max_delta_e:
            continue
        for a_mult in (0.5, 1.0, 2.0):
            a = a0 * a_mult
            m = (y > 0) & (y < de)
            if not np.any(m):
                continue
            phase = float(np.mean(np.log(y[m] / (de - y[m])) - a * t[m]))
            u = np.array([a, math.log(de), phase])
            r = y - _curve(u, t)
            sse = float(np.dot(r, r))
            if math.isfinite(sse) and (best is None or sse < best[0]):
                best = (sse, u)
    if best is None:
        first = min(max(float(y[0]), 1e-3 * de0), 0.5 * de0)
        return np.array([a0, math.log(de0), math.log(first / (de0 - first)) - a0 * t[0]])
    return best[1]


def _damped_step(H, g, damping, u, max_amp):
    """Solve ``(H + diag(damping)) step = g``, honouring ``u[1] <= max_amp``.

    When the free step would cross the bound, the amplitude component is
    pinned to land on the bound and the remaining components are re-solved.
    """
    A = H + np.diag(damping)
    try:
        step = np.linalg.solve(A, g)
    except np.linalg.LinAlgError:
        return None
    if max_amp is not None and u[1] + step[1] > max_amp:
        fixed = max_amp - u[1]
        free = [0, 2]
        rhs = g[free] - A[free, 1] * fixed
        try:
            sub = np.linalg.solve(A[np.ix_(free, free)], rhs)
        except np.linalg.LinAlgError:
            return None
        step = np.array([sub[0], fixed, sub[1]])
    return step if np.all(np.isfinite(step)) else None


def _levenberg_marquardt(t, y, u, max_amp):
    f = _curve(u, t)
    r = y - f
    sse = float(np.dot(r, r))
    lam, nu = 1e-3, 2.0
    scale = np.zeros(3)
    converged = sse == 0.0
    it = 0
    while not converged and it < MAX_ITER:
        it += 1
        J = _jacobian(u, t, f)
        H = J.T @ J
        g = J.T @ r
        scale = np.maximum(scale, np.diag(H))
        D = np.where(scale > 0, scale, 1.0)
        while True:
            step = _damped_step(H, g, lam * D, u, max_amp)
            if step is not None:
                trial = u + step
                f_new = _curve(trial, t)
                r_new = y - f_new
                sse_new = float(np.dot(r_new, r_new))
                # decrease predicted by the local quadratic model of the SSE
                predicted = float(2.0 * (g @ step) - step @ H @ step)
                if math.isfinite(sse_new) and sse_new < sse and predicted > 0:
                    rho = (sse - sse_new) / predicted
                    lam *= max(1.0 / 3.0, 1.0 - (2.0 * rho - 1.0) ** 3)
                    nu = 2.0
                    improvement = (sse - sse_new) / sse
                    small_step = np.max(np.abs(step)) < STEP_TOL * (1.0 + np.max(np.abs(u)))
                    u, f, r, sse = trial, f_new, r_new, sse_new
                    if improvement < SSE_RTOL or small_step or sse == 0.0:
                        converged = True
                    break
            lam *= nu
            nu *= 2.0
            if lam > 1e20:
                # no descent direction left at working precision
                converged = True
                break
    return u, r, sse, converged, it


def _check_series(series: TimeSeries, minimum: int):
    if len(series) < minimum:
        raise TooFewSamples(f"need at least {minimum} samples, got {len(series)}")


def fit_logistic(series: TimeSeries, max_delta_e: float | None = None) -> FitReport:
    """Least-squares logistic fit of ``series``.

    ``max_delta_e`` optionally bounds the fitted amplitude; without it a
    series that never bends over drives ``delta_e`` towards infinity.

    Individual non-positive samples (additive noise near a small start) are
    tolerated; the fit is refused when the median sample is not positive.
    """
    _check_series(series, 5)
    t, y = series.t, series.y
    if np.median(y) <= 0:
        raise NonPositiveData("logistic fit needs predominantly positive data")
    if np.ptp(y) == 0.0:
        raise DegenerateSeries("constant series: amplitude is unidentifiable")
    max_amp = None
    if max_delta_e is not None:
        if not max_delta_e > 0:
            raise ValueError(f"max_delta_e must be > 0, got {max_delta_e!r}")
        max_amp = math.log(max_delta_e)
    u0 = _seed(t, y, max_delta_e)
    if max_amp is not None:
        u0[1] = min(u0[1], max_amp)
    u, r, sse, converged, it = _levenberg_marquardt(t, y, u0, max_amp)
    a, amp, phase = (float(v) for v in u)
    delta_e = math.exp(amp)
    y0 = delta_e * float(_expit(np.array([phase]))[0])
    if not 0.0 < y0 < delta_e:
        # the start level rounded onto an asymptote
        y0 = min(max(y0, math.ulp(delta_e)), delta_e * (1 - 1e-16))
        converged = False
    params = LogisticParams(a, delta_e, y0)
    return FitReport(LOGISTIC, params, sse, aic(sse, t.size, 3), r, converged, it)


def fit_exponential(series: TimeSeries) -> FitReport:
    """Log-linear least-squares fit of ``y0 * exp(A t)``."""
    _check_series(series, 3)
    t, y = series.t, series.y
    if np.any(y <= 0):
        raise NonPositiveData("exponential fit needs strictly positive data")
    z = np.log(y)
    tc = t - t.mean()
    slope = float(np.dot(tc, z - z.mean()) / np.dot(tc, tc))
    intercept = float(z.mean() - slope * t.mean())
    params = ExponentialParams(slope, math.exp(intercept))
    r = y - predict(EXPONENTIAL, params, t)
    sse = float(np.dot(r, r))
    return FitReport(EXPONENTIAL, params, sse, aic(sse, t.size, 2), r, True, 0)
