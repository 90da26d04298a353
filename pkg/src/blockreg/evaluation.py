"""Forecast scoring and fleet-level experiments.

NRMSE is the root mean squared forecast error divided by the mean of the
actual series. Reports aggregate one score per station; the seasonality
sweep trains and scores one differenced block model per candidate lag.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .baselines import LrModel, SaModel, forecast_lr, forecast_sa
from .corpus import TrafficMatrix
from .errors import (
    BlockregError,
    EmptyCorpus,
    InvalidConfig,
    LengthMismatch,
    ZeroMeanActual,
)
from .forecaster import MODES, forecast_horizon, train_block_regression
from .regressor import BlockModel

HISTOGRAM_BIN_WIDTH = 0.1
HISTOGRAM_OPEN_LOWER = 1.0


@dataclass(frozen=True)
class Split:
    """Train/test partition in hours; test immediately follows training."""

    train_hours: int = 240
    test_hours: int = 96

    def validate(self, n_hours: int) -> None:
        if self.train_hours < 1 or self.test_hours < 1:
            raise InvalidConfig(
                f"split hours must be positive, got {self.train_hours}/{self.test_hours}"
            )
        if self.train_hours + self.test_hours > n_hours:
            raise InvalidConfig(
                f"split {self.train_hours}+{self.test_hours} exceeds corpus "
                f"length {n_hours}"
            )


@dataclass
class HistogramBin:
    lower: float
    upper: float | None  # None marks the terminal open bin
    count: int


@dataclass
class EvalReport:
    """Per-station NRMSE scores with fleet aggregates."""

    per_bs: dict[str, float]
    average: float
    excluded_count: int
    histogram: list[HistogramBin]
    config: dict


@dataclass
class SweepPoint:
    seasonality_m: int
    average_nrmse: float | None
    error: str | None = None


@dataclass
class SweepResult:
    points: list[SweepPoint] = field(default_factory=list)

    def best_m(self) -> int:
        scored = [p for p in self.points if p.average_nrmse is not None]
        if not scored:
            raise EmptyCorpus("no sweep point produced a score")
        return min(scored, key=lambda p: p.average_nrmse).seasonality_m


def nrmse(actual: np.ndarray, forecast: np.ndarray) -> float:
    """sqrt(mean squared error) divided by mean(actual)."""
    actual = np.asarray(actual, dtype=float)
    forecast = np.asarray(forecast, dtype=float)
    if actual.shape != forecast.shape or actual.ndim != 1 or actual.size == 0:
        raise LengthMismatch(
            f"actual has shape {actual.shape}, forecast {forecast.shape}"
        )
    mean = float(actual.mean())
    if mean == 0.0:
        raise ZeroMeanActual("mean of actual series is zero")
    rmse = float(np.sqrt(np.mean((actual - forecast) ** 2)))
    return rmse / mean


def histogram(values: list[float]) -> list[HistogramBin]:
    """Fixed bins of width 0.1 over [0, 1) plus one open bin for >= 1."""
    bins = [
        HistogramBin(round(i * HISTOGRAM_BIN_WIDTH, 1),
                     round((i + 1) * HISTOGRAM_BIN_WIDTH, 1), 0)
        for i in range(10)
    ]
    bins.append(HistogramBin(HISTOGRAM_OPEN_LOWER, None, 0))
    for v in values:
        if v >= HISTOGRAM_OPEN_LOWER:
            bins[-1].count += 1
        else:
            bins[min(int(v * 10), 9)].count += 1
    return bins


def _model_config(model) -> dict:
    if isinstance(model, BlockModel):
        return {"kind": "br", "m": model.seasonality_m, "w": model.window_w}
    if isinstance(model, LrModel):
        return {"kind": "lr", "m": 0, "w": model.window_w}
    if isinstance(model, SaModel):
        return {
            "kind": "sa",
            "seasonality": model.seasonality,
            "ar": model.ar_order,
            "ma": model.ma_order,
        }
    raise InvalidConfig(f"cannot evaluate model of type {type(model).__name__}")


def _forecast_for(model, t, bs, start, k, mode):
    if isinstance(model, BlockModel):
        return forecast_horizon(model, t, bs, start, k, mode)
    if isinstance(model, LrModel):
        return forecast_lr(model, t, bs, start, k, mode)
    return forecast_sa(model, t, bs, start, k, mode)


def evaluate(
    model,
    t: TrafficMatrix,
    split: Split = Split(),
    mode: str = "one_step",
    seed: int | None = None,
) -> EvalReport:
    """Score a model on the test period of a cleaned corpus.

    One forecast series per station over the test horizon; stations whose
    test-period mean is zero, and stations whose SA fit failed, are excluded
    from the scores and counted. ``seed`` is recorded in the report config
    for provenance only.
    """
    t.require_clean()
    if mode not in MODES:
        raise InvalidConfig(f"mode must be one of {MODES}, got {mode!r}")
    split.validate(t.n_hours)
    config = _model_config(model)
    config.update(
        {
            "train_hours": split.train_hours,
            "test_hours": split.test_hours,
            "mode": mode,
            "seed": seed,
        }
    )

    failed = set(model.failed_bs) if isinstance(model, SaModel) else set()
    per_bs: dict[str, float] = {}
    excluded = 0
    for bs_id in t.bs_ids:
        if bs_id in failed:
            excluded += 1
            continue
        fs = _forecast_for(model, t, bs_id, split.train_hours, split.test_hours, mode)
        try:
            per_bs[bs_id] = nrmse(fs.actual, fs.forecast)
        except ZeroMeanActual:
            excluded += 1
    if not per_bs:
        raise EmptyCorpus("no station produced a score")
    average = float(np.mean(list(per_bs.values())))
    return EvalReport(
        per_bs=per_bs,
        average=average,
        excluded_count=excluded,
        histogram=histogram(list(per_bs.values())),
        config=config,
    )


def sweep_seasonality(
    t: TrafficMatrix,
    seasonalities: list[int],
    w: int = 3,
    split: Split = Split(),
    mode: str = "one_step",
) -> SweepResult:
    """Train and score one differenced block model per candidate lag.

    A lag that cannot be trained or scored is recorded as a failed point with
    its error message; the other points are still computed.
    """
    if not seasonalities:
        raise InvalidConfig("seasonality grid is empty")
    if any(m < 1 for m in seasonalities):
        raise InvalidConfig("seasonalities must be positive")
    if any(b <= a for a, b in zip(seasonalities, seasonalities[1:])):
        raise InvalidConfig("seasonalities must be strictly increasing")
    result = SweepResult()
    for m in seasonalities:
        try:
            model, _ = train_block_regression(
                t, m=m, w=w, train_hours=split.train_hours
            )
            report = evaluate(model, t, split=split, mode=mode)
            result.points.append(SweepPoint(m, report.average))
        except BlockregError as exc:
            result.points.append(
                SweepPoint(m, None, error=f"{type(exc).__name__}: {exc}")
            )
    return result


def report_doc(report: EvalReport) -> dict:
    """Report as a JSON-ready document; stations sorted by id."""
    return {
        "config": report.config,
        "average": report.average,
        "excluded_count": report.excluded_count,
        "per_bs": {bs: report.per_bs[bs] for bs in sorted(report.per_bs)},
        "histogram": [
            {"lower": b.lower, "upper": b.upper, "count": b.count}
            for b in report.histogram
        ],
    }


def sweep_doc(result: SweepResult) -> list[dict]:
    docs = []
    for p in result.points:
        doc: dict = {"m": p.seasonality_m, "average_nrmse": p.average_nrmse}
        if p.error is not None:
            doc["error"] = p.error
        docs.append(doc)
    return docs


def report_csv(report: EvalReport) -> str:
    lines = ["bs_id,nrmse"]
    lines += [f"{bs},{report.per_bs[bs]!r}" for bs in sorted(report.per_bs)]
    return "\n".join(lines) + "\n"


def sweep_csv(result: SweepResult) -> str:
    lines = ["m,average_nrmse"]
    for p in result.points:
        value = "" if p.average_nrmse is None else repr(p.average_nrmse)
        lines.append(f"{p.seasonality_m},{value}")
    return "\n".join(lines) + "\n"
