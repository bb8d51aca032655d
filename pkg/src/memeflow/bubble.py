"""Stable-transition vs bubble classification of growth trajectories.

Two independent lines of evidence are combined:

* whether the observed curvature changes sign (a bounded logistic must pass
  through an inflection at half amplitude, unbounded growth never does), and
* how the logistic model fares against pure exponential growth, both by AIC
  and by the error of a logistic forecast over the final quartile.
"""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np

from .errors import MemeflowError, TooFewSamples, ValidationError
from .fitting import LOGISTIC, FitReport, fit_exponential, fit_logistic
from .series import TimeSeries

MIN_SAMPLES = 5
# |d2| below this multiple of its noise estimate counts as zero
SIGNIFICANCE = 3.0


class Label(str, enum.Enum):
    STABLE = "Stable"
    BUBBLE = "Bubble"
    INDETERMINATE = "Indeterminate"


class Stability(str, enum.Enum):
    SUSTAINED = "Sustained"
    COLLAPSING = "Collapsing"
    WATCH = "Watch"


@dataclass(frozen=True)
class BubbleConfig:
    disparity_threshold: float = 0.15
    aic_margin: float = 2.0
    inflection_window_fraction: float = 1.0
    # logistic fits may not place delta_e above this multiple of max(y)
    amplitude_cap: float = 4.0
    forecast_fraction: float = 0.25

    def __post_init__(self):
        if not self.disparity_threshold > 0:
            raise ValidationError("disparity_threshold must be > 0")
        if not self.aic_margin > 0:
            raise ValidationError("aic_margin must be > 0")
        if not 0 < self.inflection_window_fraction <= 1:
            raise ValidationError("inflection_window_fraction must lie in (0, 1]")
        if not self.amplitude_cap > 1:
            raise ValidationError("amplitude_cap must be > 1")
        if not 0 < self.forecast_fraction < 1:
            raise ValidationError("forecast_fraction must lie in (0, 1)")


@dataclass(frozen=True, eq=False)
class BubbleVerdict:
    label: Label
    inflection: tuple[float, float] | None
    logistic_fit: FitReport | None
    exponential_fit: FitReport | None
    disparity: float
    rationale: str

    def to_dict(self):
        return {
            "label": self.label.value,
            "inflection": None if self.inflection is None else list(self.inflection),
            "logistic_fit": None if self.logistic_fit is None else self.logistic_fit.to_dict(),
            "exponential_fit": None if self.exponential_fit is None else self.exponential_fit.to_dict(),
            "disparity": None if math.isnan(self.disparity) else self.disparity,
            "rationale": self.rationale,
        }


@dataclass(frozen=True)
class StabilityReport:
    label: Stability
    t_inflection: float
    max_deviation: float
    tail_slope: float
    n_post: int


def _local_quadratic(t, y, window):
    """Centered least-squares quadratics over sliding windows.

    Returns the center indices, the smoothed values and second derivatives
    there, and the standard error factor of the second derivative per unit
    noise. With ``window=3`` on any grid this is the plain centered second
    difference.
    """
    half = window // 2
    centers = np.arange(half, t.size - half)
    ys = np.empty(centers.size)
    d2 = np.empty(centers.size)
    se = np.empty(centers.size)
    lev = np.empty(centers.size)
    for k, i in enumerate(centers):
        tw = t[i - half : i + half + 1] - t[i]
        X = np.column_stack([np.ones_like(tw), tw, tw * tw])
        XtX_inv = np.linalg.inv(X.T @ X)
        coef = XtX_inv @ (X.T @ y[i - half : i + half + 1])
        ys[k] = coef[0]
        d2[k] = 2.0 * coef[2]
        se[k] = 2.0 * math.sqrt(max(XtX_inv[2, 2], 0.0))
        lev[k] = XtX_inv[0, 0]
    return centers, ys, d2, se, lev


def _noise_residuals(t, y):
    """Standardized center residuals of 5-point local quadratics."""
    centers, ys, _, _, lev = _local_quadratic(t, y, 5)
    return centers, (y[centers] - ys) / np.sqrt(np.maximum(1.0 - lev, 1e-12))


def _noise_sigma(t, y):
    """Robust global noise level (MAD of local-fit residuals)."""
    if t.size < 5:
        return 0.0
    _, resid = _noise_residuals(t, y)
    return 1.4826 * float(np.median(np.abs(resid)))


def auto_window(t, y) -> int:
    """Smoothing window for curvature estimates.

    Clean data keep the raw centered second difference (3 points); noisy
    data average over about a quarter of the samples.
    """
    scale = float(np.ptp(y)) or 1.0
    if _noise_sigma(t, y) <= 1e-9 * scale:
        return 3
    w = max(5, int(round(t.size / 4.0)))
    return _clamp_window(w + 1 - w % 2, t.size)


def _clamp_window(window, n):
    # keep at least two window centers so a sign change is observable
    largest = n - 2 if n % 2 else n - 3
    return max(3, min(window, largest))


def detect_inflection(series: TimeSeries, window_fraction: float = 1.0, window: int | None = None):
    """First curvature sign change of the series, as ``(t*, y*)`` or None.

    Only the leading ``window_fraction`` of samples is inspected. Curvature
    values within noise of zero are ignored, so a crossing has to separate a
    significantly positive stretch from a significantly negative one (or the
    reverse). The crossing is interpolated linearly on the smoothed curvature.
    """
    if len(series) < MIN_SAMPLES:
        raise TooFewSamples(f"need at least {MIN_SAMPLES} samples, got {len(series)}")
    if not 0 < window_fraction <= 1:
        raise ValidationError("window_fraction must lie in (0, 1]")
    n = max(MIN_SAMPLES, int(math.ceil(window_fraction * len(series))))
    t, y = series.t[:n], series.y[:n]
    if window is None:
        window = auto_window(t, y)
    if window < 3 or window % 2 == 0:
        raise ValidationError(f"window must be an odd integer >= 3, got {window!r}")
    window = _clamp_window(window, t.size)
    centers, ys, d2, se, _ = _local_quadratic(t, y, window)
    sigma = _noise_sigma(t, y) if window > 3 else 0.0
    t_span = float(t[-1] - t[0])
    floor = 1e-9 * (float(np.ptp(y)) or 1.0) / (t_span * t_span)
    thresh = np.maximum(SIGNIFICANCE * sigma * se, floor)
    sign = np.where(d2 > thresh, 1, np.where(d2 < -thresh, -1, 0))
    nz = np.nonzero(sign)[0]
    if nz.size < 2:
        return None
    flips = np.nonzero(sign[nz[1:]] != sign[nz[:-1]])[0]
    if flips.size == 0:
        return None
    a, b = nz[flips[0]], nz[flips[0] + 1]
    # last point on the first side before the curvature leaves it
    k = a
    s0 = sign[a]
    while k + 1 < b and d2[k + 1] * s0 > 0:
        k += 1
    tc = t[centers]
    d_left, d_right = d2[k], d2[k + 1]
    frac = d_left / (d_left - d_right) if d_left != d_right else 0.5
    frac = min(max(frac, 0.0), 1.0)
    t_star = float(tc[k] + frac * (tc[k + 1] - tc[k]))
    y_star = float(ys[k] + frac * (ys[k + 1] - ys[k]))
    return t_star, y_star


def forecast_disparity(series: TimeSeries, cfg: BubbleConfig) -> float:
    """Worst relative miss of a logistic forecast over the final samples.

    The logistic is fitted on the leading ``1 - forecast_fraction`` of the
    series only and then extrapolated.
    """
    n = len(series)
    n_test = max(1, int(math.ceil(cfg.forecast_fraction * n)))
    n_train = n - n_test
    if n_train < MIN_SAMPLES:
        raise TooFewSamples(f"forecast window leaves {n_train} training samples")
    train = TimeSeries(series.t[:n_train], series.y[:n_train])
    cap = cfg.amplitude_cap * float(np.max(np.abs(train.y)))
    fit = fit_logistic(train, max_delta_e=cap)
    y_obs = series.y[n_train:]
    y_hat = fit.predict(series.t[n_train:])
    denom = np.maximum(np.abs(y_obs), np.finfo(float).tiny)
    return float(np.max(np.abs(y_obs - y_hat) / denom))


def classify(series: TimeSeries, cfg: BubbleConfig | None = None) -> BubbleVerdict:
    """Label a trajectory Stable, Bubble or Indeterminate.

    Stable needs an inflection and a logistic AIC no worse than the
    exponential one. Bubble needs the exponential to beat the logistic by
    more than ``aic_margin`` AIC, or a forecast disparity above threshold
    with no inflection in sight. Anything else, including fit failures, is
    Indeterminate.
    """
    cfg = cfg or BubbleConfig()
    try:
        if len(series) < MIN_SAMPLES:
            raise TooFewSamples(f"need at least {MIN_SAMPLES} samples, got {len(series)}")
        cap = cfg.amplitude_cap * float(np.max(np.abs(series.y)))
        log_fit = fit_logistic(series, max_delta_e=cap)
        exp_fit = fit_exponential(series)
        inflection = detect_inflection(series, cfg.inflection_window_fraction)
        disparity = forecast_disparity(series, cfg)
    except MemeflowError as exc:
        return BubbleVerdict(
            Label.INDETERMINATE, None, None, None, math.nan, f"{type(exc).__name__}: {exc}"
        )

    d_aic = log_fit.aic - exp_fit.aic
    facts = (
        f"inflection {'at t=%.6g' % inflection[0] if inflection else 'absent'}; "
        f"AIC logistic-exponential = {d_aic:.6g}; disparity = {disparity:.6g}"
    )
    if inflection is not None and log_fit.aic <= exp_fit.aic:
        label, why = Label.STABLE, "curvature changes sign and the bounded model fits at least as well"
    elif exp_fit.aic + cfg.aic_margin < log_fit.aic:
        label, why = Label.BUBBLE, "unbounded growth beats the bounded model decisively"
    elif inflection is None and disparity > cfg.disparity_threshold:
        label, why = Label.BUBBLE, "no inflection and the logistic forecast misses the tail"
    else:
        label, why = Label.INDETERMINATE, "evidence is mixed"
    return BubbleVerdict(label, inflection, log_fit, exp_fit, disparity, f"{why} ({facts})")


def stability_check(series: TimeSeries, fitted: FitReport, sustain_band: float,
                    tail_fraction: float = 0.25) -> StabilityReport:
    """Judge whether the level reached after the fitted inflection holds.

    Collapsing: the least-squares slope over the last ``tail_fraction`` of
    post-inflection samples falls below ``-sustain_band * delta_e`` per unit
    time. Sustained: every post-inflection sample lies within
    ``sustain_band * delta_e`` of the fitted curve. Otherwise Watch.
    """
    if fitted.model != LOGISTIC or not fitted.converged:
        raise ValidationError("stability_check needs a converged logistic fit")
    if not sustain_band > 0:
        raise ValidationError("sustain_band must be > 0")
    p = fitted.params
    if p.affinity <= 0:
        raise ValidationError("fitted affinity must be positive to have an inflection")
    t_star = math.log((p.delta_e - p.y0) / p.y0) / p.affinity
    post = series.t >= t_star
    n_post = int(np.count_nonzero(post))
    if n_post == 0:
        raise ValidationError(f"no samples after the fitted inflection at t={t_star:.6g}")
    t, y = series.t[post], series.y[post]
    band = sustain_band * p.delta_e
    deviation = float(np.max(np.abs(y - fitted.predict(t))))
    n_tail = max(2, int(math.ceil(tail_fraction * n_post)))
    tt, yt = t[-n_tail:], y[-n_tail:]
    slope = 0.0
    if tt.size >= 2:
        tc = tt - tt.mean()
        slope = float(np.dot(tc, yt - yt.mean()) / np.dot(tc, tc))
    if slope < -band:
        label = Stability.COLLAPSING
    elif deviation <= band:
        label = Stability.SUSTAINED
    else:
        label = Stability.WATCH
    return StabilityReport(label, t_star, deviation, slope, n_post)
