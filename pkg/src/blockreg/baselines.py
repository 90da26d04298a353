"""Comparison models: undifferenced block linear regression and per-station
seasonal ARIMA.

The LR baseline reuses the block pipeline with no differencing step and a
wide window; its forecast has no lagged-traffic term. The SA baseline fits
one ARMA(ar, ma) per station on the seasonally differenced series using the
Hannan-Rissanen two-stage least-squares procedure, then forecasts by the
standard one-step recursion plus the traffic observed one season earlier.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .corpus import TrafficMatrix
from .errors import (
    InsufficientHistory,
    InvalidConfig,
    NumericalError,
    SingularSystem,
    UnknownBs,
)
from .forecaster import (
    MODES,
    ForecastSeries,
    forecast_horizon,
    train_block_regression,
)
from .pipeline import NormalizationStats
from .regressor import BlockModel


@dataclass
class LrModel:
    """Block linear model over raw (undifferenced) traffic windows."""

    theta0: float
    theta: np.ndarray
    stats: NormalizationStats
    window_w: int

    @property
    def n_params(self) -> int:
        return self.window_w + 1

    def as_block_model(self) -> BlockModel:
        return BlockModel(
            theta0=self.theta0,
            theta=self.theta,
            stats=self.stats,
            seasonality_m=0,
            window_w=self.window_w,
        )


@dataclass
class SaCoefficients:
    """Fitted ARMA coefficients for one station's differenced series."""

    phi: np.ndarray
    psi: np.ndarray
    intercept: float
    sigma2: float


@dataclass
class SaModel:
    """Per-station seasonal ARIMA fleet model.

    Stations whose fit failed are listed in ``failed_bs`` and carry no
    coefficients; parameter accounting covers fitted stations only, at
    ar + ma + 2 each (coefficients, intercept, innovation variance).
    """

    per_bs: dict[str, SaCoefficients]
    seasonality: int
    ar_order: int
    ma_order: int
    failed_bs: list[str] = field(default_factory=list)

    @property
    def n_params(self) -> int:
        return (self.ar_order + self.ma_order + 2) * len(self.per_bs)


def train_lr(t: TrafficMatrix, w: int = 72, train_hours: int = 240) -> LrModel:
    """Train the undifferenced baseline: BR pipeline with m = 0."""
    model, _ = train_block_regression(t, m=0, w=w, train_hours=train_hours)
    return LrModel(
        theta0=model.theta0,
        theta=model.theta,
        stats=model.stats,
        window_w=model.window_w,
    )


def forecast_lr(
    model: LrModel,
    t: TrafficMatrix,
    bs: str,
    start: int,
    k: int,
    mode: str = "one_step",
) -> ForecastSeries:
    """Forecast with the raw-window model; no lagged-traffic addition."""
    return forecast_horizon(model.as_block_model(), t, bs, start, k, mode)


def ar_long_order(n: int) -> int:
    """Stage-1 autoregression order: ceil(1.5 * sqrt(n)) capped at n // 4."""
    return min(math.ceil(1.5 * math.sqrt(n)), n // 4)


def _reflect_ma_roots(psi: np.ndarray, sigma2: float) -> tuple[np.ndarray, float]:
    """Move MA polynomial roots outside the unit circle.

    Root reflection yields the canonical invertible representation of the
    same autocovariance; the innovation variance is rescaled to match. An
    already invertible psi passes through unchanged. Keeps the forecast
    residual recursion from diverging.
    """
    q = len(psi)
    if q == 0:
        return psi, sigma2
    roots = np.roots(np.concatenate([psi[::-1], [1.0]]))
    inside = np.abs(roots) < 1.0
    if not inside.any():
        return psi, sigma2
    scale = float(np.prod(np.abs(roots[inside]) ** 2))
    roots[inside] = 1.0 / np.conj(roots[inside])
    coeffs = np.poly(roots) * np.prod(-1.0 / roots)
    new_psi = np.real(coeffs[::-1][1:])
    return new_psi, sigma2 * scale


def hannan_rissanen(z: np.ndarray, ar: int, ma: int) -> SaCoefficients:
    """Estimate ARMA(ar, ma) coefficients by two-stage least squares.

    Stage 1 fits a long autoregression of order ceil(1.5 * sqrt(n)) capped at
    n / 4 to obtain residual proxies; stage 2 regresses the series on its own
    ar lags and the ma lagged residual proxies, with an intercept in both
    stages. Non-invertible MA estimates are reflected to the canonical
    invertible form.
    """
    if ar < 0 or ma < 0:
        raise InvalidConfig(f"orders must be >= 0, got ar={ar} ma={ma}")
    z = np.asarray(z, dtype=float)
    n = z.shape[0]
    h = ar_long_order(n) if n >= 4 else 0
    t0 = max(h + ma, ar)
    if h < 1 or n - t0 < ar + ma + 1:
        raise InsufficientHistory(
            f"series of length {n} too short for ARMA({ar}, {ma}) estimation"
        )

    x1 = np.column_stack(
        [np.ones(n - h)] + [z[h - j:n - j] for j in range(1, h + 1)]
    )
    beta1, *_ = np.linalg.lstsq(x1, z[h:], rcond=None)
    e = np.zeros(n)
    e[h:] = z[h:] - x1 @ beta1

    cols = [np.ones(n - t0)]
    cols += [z[t0 - j:n - j] for j in range(1, ar + 1)]
    cols += [e[t0 - j:n - j] for j in range(1, ma + 1)]
    x2 = np.column_stack(cols)
    beta2, *_ = np.linalg.lstsq(x2, z[t0:], rcond=None)
    if not np.all(np.isfinite(beta2)):
        raise SingularSystem("stage-2 least squares produced non-finite coefficients")

    intercept = float(beta2[0])
    phi = beta2[1:1 + ar].copy()
    psi = beta2[1 + ar:1 + ar + ma].copy()
    resid = z[t0:] - x2 @ beta2
    sigma2 = float(resid @ resid) / resid.shape[0]
    psi, sigma2 = _reflect_ma_roots(psi, sigma2)
    return SaCoefficients(phi=phi, psi=psi, intercept=intercept, sigma2=sigma2)


def train_sa(
    t: TrafficMatrix,
    ar: int = 2,
    ma: int = 1,
    s: int = 24,
    train_hours: int = 240,
) -> SaModel:
    """Fit one ARMA(ar, ma) per station on traffic differenced at lag s.

    Stations whose estimation fails numerically are recorded in
    ``failed_bs`` and excluded, not fatal to the run.
    """
    t.require_clean()
    if s < 1:
        raise InvalidConfig(f"seasonality s must be >= 1, got {s}")
    if not 0 < train_hours <= t.n_hours:
        raise InvalidConfig(
            f"train_hours={train_hours} outside corpus length {t.n_hours}"
        )
    if train_hours < s + ar + ma + 20:
        raise InsufficientHistory(
            f"training range {train_hours} shorter than s + ar + ma + 20 = "
            f"{s + ar + ma + 20}"
        )
    per_bs: dict[str, SaCoefficients] = {}
    failed: list[str] = []
    train = t.values[:, :train_hours]
    for i, bs_id in enumerate(t.bs_ids):
        z = train[i, s:] - train[i, :-s]
        try:
            per_bs[bs_id] = hannan_rissanen(z, ar, ma)
        except NumericalError:
            failed.append(bs_id)
    return SaModel(
        per_bs=per_bs,
        seasonality=s,
        ar_order=ar,
        ma_order=ma,
        failed_bs=failed,
    )


def forecast_sa(
    model: SaModel,
    t: TrafficMatrix,
    bs: str,
    start: int,
    k: int,
    mode: str = "one_step",
) -> ForecastSeries:
    """Forecast k hours for one station with its fitted ARMA.

    The differenced series is predicted one step at a time with running
    residuals; the observed (or, recursively, forecast) traffic one season
    earlier is added back. With all coefficients and intercept zero this is
    exactly the seasonal-naive forecast t_{l-s}.
    """
    if mode not in MODES:
        raise InvalidConfig(f"mode must be one of {MODES}, got {mode!r}")
    if k < 1:
        raise InvalidConfig(f"horizon k must be >= 1, got {k}")
    if bs not in model.per_bs:
        detail = " (training failed)" if bs in model.failed_bs else ""
        raise UnknownBs(f"no fitted model for {bs!r}{detail}")
    coef = model.per_bs[bs]
    s, ar, ma = model.seasonality, model.ar_order, model.ma_order
    i = t.bs_index(bs)
    if start < s + ar:
        raise InsufficientHistory(
            f"start column {start} leaves less than s + ar = {s + ar} hours"
        )
    if mode == "one_step" and start + k > t.n_hours:
        raise InsufficientHistory(
            f"one_step horizon [{start}, {start + k}) exceeds corpus length {t.n_hours}"
        )

    series = t.values[i].astype(float)
    base = start - s  # index of the first horizon hour on the differenced scale
    nz = base + k
    z = np.zeros(nz)
    e = np.zeros(nz)
    limit = min(nz, t.n_hours - s) if mode == "one_step" else min(nz, base)
    z[:limit] = series[s:s + limit] - series[:limit]

    working = series[:start].copy()
    forecast = np.empty(k)
    for tt in range(ar, nz):
        zhat = coef.intercept
        for j in range(1, ar + 1):
            zhat += coef.phi[j - 1] * z[tt - j]
        for j in range(1, ma + 1):
            if tt - j >= 0:
                zhat += coef.psi[j - 1] * e[tt - j]
        if tt < base:
            e[tt] = z[tt] - zhat
            continue
        step = tt - base
        if mode == "one_step":
            e[tt] = z[tt] - zhat
            prior = series[start + step - s]
        else:
            z[tt] = zhat
            e[tt] = 0.0
            prior = working[start + step - s]
        value = zhat + float(prior)
        forecast[step] = value
        if mode == "recursive":
            working = np.append(working, value)

    hours = t.start_hour + start + np.arange(k)
    actual = None
    if start + k <= t.n_hours:
        actual = series[start:start + k].copy()
    return ForecastSeries(
        bs_id=bs, hours=hours, forecast=forecast, actual=actual, mode=mode
    )
