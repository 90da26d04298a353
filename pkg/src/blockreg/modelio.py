"""Model file serialization and atomic file writing.

All three model kinds share one JSON container distinguished by a ``kind``
field ("br", "lr", "sa"; a missing kind means "br"). Every file carries
``format_version`` and a ``params`` count. Serialization is deterministic:
identical models produce byte-identical files.
"""

from __future__ import annotations

import json
import os
import tempfile

import numpy as np

from .baselines import LrModel, SaCoefficients, SaModel
from .errors import InvalidConfig, ParseError
from .pipeline import NormalizationStats
from .regressor import BlockModel

FORMAT_VERSION = 1


def atomic_write_text(path: str, text: str) -> None:
    """Write via a temp file in the target directory, then rename."""
    directory = os.path.dirname(os.path.abspath(path))
    fd, tmp = tempfile.mkstemp(dir=directory, suffix=".tmp")
    try:
        with os.fdopen(fd, "w", encoding="utf-8") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def dump_json(doc) -> str:
    """Deterministic JSON rendering used for every file this package writes."""
    return json.dumps(doc, indent=2, allow_nan=False) + "\n"


def _floats(a: np.ndarray) -> list[float]:
    return [float(v) for v in np.asarray(a).ravel()]


def model_doc(model) -> dict:
    """Model as a JSON-ready document."""
    if isinstance(model, BlockModel):
        return {
            "format_version": FORMAT_VERSION,
            "kind": "br",
            "theta0": model.theta0,
            "theta": _floats(model.theta),
            "mu_x": _floats(model.stats.mu_x),
            "sigma_x": _floats(model.stats.sigma_x),
            "mu_y": model.stats.mu_y,
            "sigma_y": model.stats.sigma_y,
            "m": model.seasonality_m,
            "w": model.window_w,
            "params": model.n_params,
        }
    if isinstance(model, LrModel):
        return {
            "format_version": FORMAT_VERSION,
            "kind": "lr",
            "theta0": model.theta0,
            "theta": _floats(model.theta),
            "mu_x": _floats(model.stats.mu_x),
            "sigma_x": _floats(model.stats.sigma_x),
            "mu_y": model.stats.mu_y,
            "sigma_y": model.stats.sigma_y,
            "m": 0,
            "w": model.window_w,
            "params": model.n_params,
        }
    if isinstance(model, SaModel):
        return {
            "format_version": FORMAT_VERSION,
            "kind": "sa",
            "seasonality": model.seasonality,
            "ar": model.ar_order,
            "ma": model.ma_order,
            "per_bs": {
                bs: {
                    "phi": _floats(c.phi),
                    "psi": _floats(c.psi),
                    "intercept": c.intercept,
                    "sigma2": c.sigma2,
                }
                for bs, c in sorted(model.per_bs.items())
            },
            "failed_bs": sorted(model.failed_bs),
            "params": model.n_params,
        }
    raise InvalidConfig(f"cannot serialize model of type {type(model).__name__}")


def save_model(model, path: str) -> None:
    atomic_write_text(path, dump_json(model_doc(model)))


def _require(doc: dict, key: str, path: str):
    if key not in doc:
        raise ParseError(f"{path}: missing model field {key!r}")
    return doc[key]


def _linear_parts(doc: dict, path: str):
    theta0 = float(_require(doc, "theta0", path))
    theta = np.asarray(_require(doc, "theta", path), dtype=float)
    stats = NormalizationStats(
        mu_x=np.asarray(_require(doc, "mu_x", path), dtype=float),
        sigma_x=np.asarray(_require(doc, "sigma_x", path), dtype=float),
        mu_y=float(_require(doc, "mu_y", path)),
        sigma_y=float(_require(doc, "sigma_y", path)),
    )
    w = int(_require(doc, "w", path))
    if theta.shape != (w,) or stats.mu_x.shape != (w,) or stats.sigma_x.shape != (w,):
        raise ParseError(f"{path}: model arrays inconsistent with w={w}")
    return theta0, theta, stats, w


def load_model(path: str):
    """Load a model file; returns a BlockModel, LrModel, or SaModel."""
    try:
        with open(path, "r", encoding="utf-8") as fh:
            doc = json.load(fh)
    except OSError as exc:
        raise ParseError(f"cannot open {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise ParseError(f"{path}: invalid JSON: {exc}") from exc
    if not isinstance(doc, dict):
        raise ParseError(f"{path}: model file must be a JSON object")
    version = doc.get("format_version")
    if version != FORMAT_VERSION:
        raise ParseError(
            f"{path}: unsupported format_version {version!r} "
            f"(expected {FORMAT_VERSION})"
        )
    kind = doc.get("kind", "br")
    if kind == "br":
        theta0, theta, stats, w = _linear_parts(doc, path)
        m = int(_require(doc, "m", path))
        return BlockModel(
            theta0=theta0, theta=theta, stats=stats, seasonality_m=m, window_w=w
        )
    if kind == "lr":
        theta0, theta, stats, w = _linear_parts(doc, path)
        return LrModel(theta0=theta0, theta=theta, stats=stats, window_w=w)
    if kind == "sa":
        per_bs_doc = _require(doc, "per_bs", path)
        if not isinstance(per_bs_doc, dict):
            raise ParseError(f"{path}: per_bs must be an object")
        ar = int(_require(doc, "ar", path))
        ma = int(_require(doc, "ma", path))
        per_bs = {}
        for bs, c in per_bs_doc.items():
            phi = np.asarray(c.get("phi", []), dtype=float)
            psi = np.asarray(c.get("psi", []), dtype=float)
            if phi.shape != (ar,) or psi.shape != (ma,):
                raise ParseError(f"{path}: station {bs}: coefficient lengths "
                                 f"inconsistent with ar={ar}, ma={ma}")
            per_bs[bs] = SaCoefficients(
                phi=phi,
                psi=psi,
                intercept=float(c.get("intercept", 0.0)),
                sigma2=float(c.get("sigma2", 0.0)),
            )
        return SaModel(
            per_bs=per_bs,
            seasonality=int(_require(doc, "seasonality", path)),
            ar_order=ar,
            ma_order=ma,
            failed_bs=list(doc.get("failed_bs", [])),
        )
    raise ParseError(f"{path}: unknown model kind {kind!r}")
