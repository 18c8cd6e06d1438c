"""Per-feature normalization fitted on training rows only."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..errors import DataError


@dataclass(frozen=True, eq=False)
class ScalerParams:
    method: str
    center: np.ndarray
    scale: np.ndarray          # zero marks a degenerate feature
    stats: dict

    def to_json(self):
        return {"method": self.method,
                **{k: np.asarray(v).tolist() for k, v in self.stats.items()}}


def fit_scaler(train, method) -> ScalerParams:
    x = np.asarray(train, dtype=float)
    if x.ndim != 2 or x.shape[0] < 2:
        raise DataError("scaler needs at least 2 training rows")
    if method == "robust":
        q1, q2, q3 = np.quantile(x, [0.25, 0.5, 0.75], axis=0)
        return ScalerParams(method, q2, q3 - q1, {"q1": q1, "q2": q2, "q3": q3})
    if method == "standard":
        u = x.mean(axis=0)
        s = x.std(axis=0)          # population std
        # a constant column can still get s ~ 1e-17 from rounding in the mean
        s = np.where(np.ptp(x, axis=0) == 0, 0.0, s)
        return ScalerParams(method, u, s, {"mean": u, "std": s})
    if method == "minmax":
        lo, hi = x.min(axis=0), x.max(axis=0)
        return ScalerParams(method, lo, hi - lo, {"min": lo, "max": hi})
    raise DataError(f"unknown normalization method {method!r}")


def apply_scaler(params: ScalerParams, values):
    """(x - center) / scale per feature; degenerate features map to 0."""
    x = np.asarray(values, dtype=float)
    ok = params.scale > 0
    out = np.zeros_like(x)
    out[:, ok] = (x[:, ok] - params.center[ok]) / params.scale[ok]
    return out
