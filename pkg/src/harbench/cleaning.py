"""Missing-value repair and Butterworth noise removal."""
from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np
from scipy import signal

from .dataset_io import RawDataset
from .errors import ConfigError, DataError

MAX_MISSING_FRACTION = 0.05


@dataclass(frozen=True)
class ImputationPolicy:
    method: str = "mean"
    constant_value: float = 0.0


def _runs_of(mask):
    """(start, stop) pairs of True runs in a boolean vector."""
    padded = np.concatenate([[False], mask, [False]])
    edges = np.flatnonzero(padded[1:] != padded[:-1])
    return list(zip(edges[::2], edges[1::2]))


def fill_column(x, method, constant_value=0.0):
    """Fill NaNs in a 1-D array. No threshold checks; see ``impute``."""
    x = np.array(x, dtype=float)
    miss = np.isnan(x)
    if not miss.any():
        return x
    valid = np.flatnonzero(~miss)
    if not len(valid):
        if method == "constant":
            return np.full_like(x, constant_value)
        raise DataError("column has no valid values to impute from")
    idx = np.arange(len(x))
    if method == "constant":
        x[miss] = constant_value
        return x
    if method == "interpolate":
        x[miss] = np.interp(idx[miss], valid, x[valid])
        return x

    # index of nearest valid sample at or before / at or after each position
    prev = np.maximum.accumulate(np.where(miss, -1, idx))
    nxt = np.minimum.accumulate(np.where(miss, len(x), idx)[::-1])[::-1]
    has_prev = prev >= 0
    has_next = nxt < len(x)
    prev_val = np.where(has_prev, x[np.clip(prev, 0, None)], np.nan)
    next_val = np.where(has_next, x[np.clip(nxt, None, len(x) - 1)], np.nan)
    if method == "forward":
        fill = np.where(has_prev, prev_val, next_val)
    elif method == "backward":
        fill = np.where(has_next, next_val, prev_val)
    elif method == "mean":
        both = has_prev & has_next
        fill = np.where(both, 0.5 * (prev_val + next_val),
                        np.where(has_prev, prev_val, next_val))
    else:
        raise ConfigError(f"unknown imputation method {method!r}")
    x[miss] = fill[miss]
    return x


def impute(dataset: RawDataset, policy: ImputationPolicy,
           max_gap: Optional[int] = None) -> RawDataset:
    """Fill every missing sensor cell.

    A column with more than 5% missing cells is rejected, as is any single
    contiguous gap longer than ``max_gap`` samples (one window length).
    """
    out = dataset.channels.copy()
    n = dataset.n
    for j, name in enumerate(dataset.channel_names):
        miss = np.isnan(out[:, j])
        if not miss.any():
            continue
        frac = miss.sum() / n
        if frac > MAX_MISSING_FRACTION:
            raise DataError(f"column '{name}' has {100 * frac:.2f}% missing values "
                            f"(limit {100 * MAX_MISSING_FRACTION:g}%)")
        if max_gap is not None:
            longest = max(b - a for a, b in _runs_of(miss))
            if longest > max_gap:
                raise DataError(f"column '{name}' has a gap of {longest} consecutive missing "
                                f"samples, longer than one window ({max_gap} samples)")
        out[:, j] = fill_column(out[:, j], policy.method, policy.constant_value)
    return dataset.with_channels(out)


# --------------------------------------------------------------------------
# filtering

@dataclass(frozen=True)
class FilterSpec:
    kind: str
    order: int
    cutoffs_hz: tuple
    sampling_frequency: float


@dataclass(frozen=True, eq=False)
class FilterCoefficients:
    spec: FilterSpec
    b: np.ndarray
    a: np.ndarray
    sos: np.ndarray

    def to_json(self) -> dict:
        return {"kind": self.spec.kind, "order": self.spec.order,
                "cutoffs_hz": list(self.spec.cutoffs_hz),
                "sampling_frequency": self.spec.sampling_frequency,
                "b": self.b.tolist(), "a": self.a.tolist()}


def design_filter(spec: FilterSpec) -> FilterCoefficients:
    """Order-``spec.order`` digital Butterworth filter (bilinear transform, pre-warped)."""
    if spec.kind not in ("lowpass", "highpass", "bandpass", "bandstop"):
        raise ConfigError(f"unknown filter kind {spec.kind!r}")
    if spec.order < 1:
        raise ConfigError("filter order must be a positive integer")
    cut = tuple(float(c) for c in spec.cutoffs_hz)
    want = 2 if spec.kind in ("bandpass", "bandstop") else 1
    if len(cut) != want:
        raise ConfigError(f"{spec.kind} filter needs {want} cutoff(s), got {len(cut)}")
    nyq = spec.sampling_frequency / 2
    for c in cut:
        if not 0 < c < nyq:
            raise ConfigError(f"cutoff {c:g} Hz must lie in (0, {nyq:g}) Hz (Nyquist)")
    if want == 2 and not cut[0] < cut[1]:
        raise ConfigError("band cutoffs must be ordered low < high")
    wn = cut[0] if want == 1 else cut
    b, a = signal.butter(spec.order, wn, btype=spec.kind, fs=spec.sampling_frequency)
    sos = signal.butter(spec.order, wn, btype=spec.kind, fs=spec.sampling_frequency, output="sos")
    return FilterCoefficients(spec=spec, b=b, a=a, sos=sos)


def pad_length(coeffs: FilterCoefficients, tol=1e-9) -> int:
    """Samples for the slowest pole to decay below ``tol``: the mirror-pad length."""
    r = float(np.max(np.abs(np.roots(coeffs.a)))) if len(coeffs.a) > 1 else 0.0
    if r <= 0.0:
        return 3 * (coeffs.spec.order + 1)
    return max(3 * (coeffs.spec.order + 1), int(np.ceil(np.log(tol) / np.log(r))))


def filtfilt_channels(x, coeffs: FilterCoefficients):
    """Zero-phase filter each column of ``x`` (n, d) independently.

    Edges are extended by mirror (even) reflection: no offset jump at the
    boundary, so in-band levels and constants pass unchanged.
    """
    n = x.shape[0]
    need = 3 * (coeffs.spec.order + 1)
    if n < need:
        raise DataError(f"series of {n} samples is too short for an order-{coeffs.spec.order} "
                        f"filter (need >= {need})")
    padlen = min(pad_length(coeffs), n - 1)
    return signal.sosfiltfilt(coeffs.sos, x, axis=0, padtype="even", padlen=padlen)


def apply_filter(dataset: RawDataset, coeffs: FilterCoefficients) -> RawDataset:
    """Filter every channel, one contiguous (subject, session) run at a time."""
    if np.isnan(dataset.channels).any():
        raise DataError("cannot filter a dataset with missing values; impute first")
    out = np.empty_like(dataset.channels)
    for a, b in dataset.runs():
        try:
            out[a:b] = filtfilt_channels(dataset.channels[a:b], coeffs)
        except DataError as exc:
            raise DataError(f"run of subject {dataset.subjects[a]} at rows {a}-{b - 1}: {exc}") from None
    return dataset.with_channels(out)
