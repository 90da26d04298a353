"""Forecast reconstruction for the differenced block model.

A forecast for hour l is the denormalized model output plus the traffic
observed m hours earlier:

    t~_l = mu_y + (theta0 + sum_j theta_j xhat_j) * sigma_y + t_{l-m}

where the features xhat are the normalized differenced values at hours
l-w .. l-1. One-step mode reads recorded actuals for every lag; recursive
mode substitutes earlier forecasts once a lag falls inside the horizon.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .corpus import TrafficMatrix
from .errors import InsufficientHistory, InvalidConfig
from .pipeline import (
    apply_normalization,
    fit_normalization,
    identity_difference,
    seasonal_difference,
    slide_windows,
)
from .regressor import BlockModel, TrainingDiagnostics, train_cg

MODES = ("one_step", "recursive")


@dataclass
class ForecastSeries:
    """Forecasts for one station over a contiguous range of hours."""

    bs_id: str
    hours: np.ndarray
    forecast: np.ndarray
    actual: np.ndarray | None
    mode: str


def train_block_regression(
    t: TrafficMatrix,
    m: int,
    w: int,
    train_hours: int,
    tol: float = 1e-8,
    max_iter: int | None = None,
) -> tuple[BlockModel, TrainingDiagnostics]:
    """Full training pipeline over the first ``train_hours`` columns.

    Differences at lag m (m = 0 skips differencing), slides windows of
    width w, fits normalization on the training samples only, and trains by
    conjugate gradient.
    """
    t.require_clean()
    if not 0 < train_hours <= t.n_hours:
        raise InvalidConfig(
            f"train_hours={train_hours} outside corpus length {t.n_hours}"
        )
    train = TrafficMatrix(
        bs_ids=t.bs_ids,
        values=t.values[:, :train_hours],
        start_hour=t.start_hour,
    )
    d = seasonal_difference(train, m) if m > 0 else identity_difference(train)
    f = slide_windows(d, w)
    stats = fit_normalization(f)
    f_hat = apply_normalization(f, stats)
    return train_cg(f_hat, tol=tol, max_iter=max_iter, stats=stats, seasonality_m=m)


def _window_features(model: BlockModel, hist: np.ndarray) -> np.ndarray:
    """Differenced lags for the w hours before the forecast target."""
    m, w = model.seasonality_m, model.window_w
    if m > 0:
        return hist[m:m + w] - hist[:w]
    return hist[-w:]


def forecast_one(model: BlockModel, history: np.ndarray) -> float:
    """Forecast the hour immediately after ``history``.

    ``history`` must cover at least the m + w hours preceding the target
    (w hours for an undifferenced model); only that suffix is used.
    """
    m, w = model.seasonality_m, model.window_w
    need = m + w
    history = np.asarray(history, dtype=float)
    if history.ndim != 1 or history.shape[0] < need:
        raise InsufficientHistory(
            f"need {need} preceding hours, got {history.shape[0]}"
        )
    hist = history[-need:]
    lags = _window_features(model, hist)
    xhat = (lags - model.stats.mu_x) / model.stats.sigma_x
    z = model.theta0 + float(model.theta @ xhat)
    value = model.stats.mu_y + z * model.stats.sigma_y
    if m > 0:
        value += float(hist[w])
    return float(value)


def forecast_horizon(
    model: BlockModel,
    t: TrafficMatrix,
    bs: str,
    start: int,
    k: int,
    mode: str = "one_step",
) -> ForecastSeries:
    """Forecast k hours beginning at corpus column ``start`` for one station.

    one_step: every lag and the t_{l-m} term read recorded actuals, so the
    corpus must cover the whole horizon. recursive: values from ``start``
    onward are replaced by the forecasts already made, and the horizon may
    extend past the end of the corpus.
    """
    if mode not in MODES:
        raise InvalidConfig(f"mode must be one of {MODES}, got {mode!r}")
    if k < 1:
        raise InvalidConfig(f"horizon k must be >= 1, got {k}")
    i = t.bs_index(bs)
    need = model.seasonality_m + model.window_w
    if start < need:
        raise InsufficientHistory(
            f"start column {start} leaves less than {need} hours of history"
        )
    if mode == "one_step" and start + k > t.n_hours:
        raise InsufficientHistory(
            f"one_step horizon [{start}, {start + k}) exceeds corpus length {t.n_hours}"
        )

    series = t.values[i]
    forecast = np.empty(k)
    if mode == "one_step":
        for j in range(k):
            l = start + j
            forecast[j] = forecast_one(model, series[l - need:l])
    else:
        working = series[:start].astype(float).copy()
        for j in range(k):
            value = forecast_one(model, working[-need:])
            forecast[j] = value
            working = np.append(working, value)

    hours = t.start_hour + start + np.arange(k)
    actual = None
    if start + k <= t.n_hours:
        actual = series[start:start + k].copy()
    return ForecastSeries(
        bs_id=bs, hours=hours, forecast=forecast, actual=actual, mode=mode
    )
