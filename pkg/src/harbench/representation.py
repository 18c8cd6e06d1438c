"""Raw pass-through, fixed-length windowing and per-window feature extraction."""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .cleaning import fill_column
from .dataset_io import RawDataset
from .errors import ConfigError, DataError

DOMAINS = ("statistical", "temporal", "spectral")
STATISTICAL = ("mean", "std", "min", "max", "median", "iqr", "skewness", "kurtosis", "rms", "range")
TEMPORAL = ("zcr", "mean_abs_diff", "sma", "autocorr_lag1", "slope")
SPECTRAL = ("dominant_freq", "energy", "entropy", "centroid", "dc")
MIN_SPECTRAL_SAMPLES = 8


@dataclass(eq=False)
class FeatureMatrix:
    values: np.ndarray            # (rows, F)
    feature_names: tuple
    labels: np.ndarray
    subjects: np.ndarray
    sessions: Optional[np.ndarray] = None
    # (channels, timesteps) when each row is a flattened channel-major window
    layout: Optional[tuple] = None

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=float)
        if self.values.ndim != 2:
            raise DataError("feature values must be a 2-D matrix")
        if len(self.feature_names) != self.values.shape[1]:
            raise DataError("feature_names length does not match the column count")
        if len(set(self.feature_names)) != len(self.feature_names):
            raise DataError("feature names must be unique")
        for name in ("labels", "subjects", "sessions"):
            v = getattr(self, name)
            if v is not None and len(v) != self.values.shape[0]:
                raise DataError(f"{name} is not aligned with the rows")

    @property
    def n_rows(self) -> int:
        return self.values.shape[0]

    def take(self, rows) -> "FeatureMatrix":
        rows = np.asarray(rows)
        return FeatureMatrix(self.values[rows], self.feature_names, self.labels[rows],
                             self.subjects[rows],
                             None if self.sessions is None else self.sessions[rows],
                             self.layout)

    def with_values(self, values, feature_names=None, layout="keep") -> "FeatureMatrix":
        return FeatureMatrix(values, self.feature_names if feature_names is None else feature_names,
                             self.labels, self.subjects, self.sessions,
                             self.layout if layout == "keep" else layout)


@dataclass(eq=False)
class WindowedDataset:
    windows: np.ndarray           # (W, d * w_len), channel-major blocks
    window_labels: np.ndarray
    window_subjects: np.ndarray
    channel_names: tuple
    window_len: int
    step: int
    sampling_frequency: float
    window_sessions: Optional[np.ndarray] = None
    starts: np.ndarray = field(default_factory=lambda: np.zeros(0, dtype=int))

    @property
    def n_windows(self) -> int:
        return self.windows.shape[0]

    @property
    def n_channels(self) -> int:
        return len(self.channel_names)

    def cube(self) -> np.ndarray:
        """Windows as (W, d, w_len)."""
        return self.windows.reshape(self.n_windows, self.n_channels, self.window_len)

    def as_matrix(self) -> FeatureMatrix:
        names = tuple(f"{ch}_t{i}" for ch in self.channel_names for i in range(self.window_len))
        return FeatureMatrix(self.windows, names, self.window_labels, self.window_subjects,
                             self.window_sessions, layout=(self.n_channels, self.window_len))


def window_starts(run_len: int, window_len: int, step: int) -> np.ndarray:
    if run_len < window_len:
        return np.zeros(0, dtype=int)
    return np.arange(0, run_len - window_len + 1, step)


def majority_label(labels):
    """Most frequent label; ties go to the tied label occurring last."""
    uniq, inv, counts = np.unique(labels, return_inverse=True, return_counts=True)
    best = np.flatnonzero(counts == counts.max())
    if len(best) == 1:
        return uniq[best[0]]
    last = {k: np.flatnonzero(inv == k)[-1] for k in best}
    return uniq[max(best, key=lambda k: last[k])]


def segment(dataset: RawDataset, time_window: float, overlap: float = 0.0) -> WindowedDataset:
    """Cut each contiguous (subject, session) run into full windows; drop remainders."""
    if not overlap < time_window:
        raise ConfigError("overlap must be < time_window")
    fs = dataset.sampling_frequency
    w = int(round(time_window * fs))
    step = int(round((time_window - overlap) * fs))
    if w < 1 or step < 1:
        raise ConfigError(f"window of {w} samples with step {step} is degenerate")
    runs = list(dataset.runs())
    starts = np.concatenate([a + window_starts(b - a, w, step) for a, b in runs]).astype(int)
    if not len(starts):
        shortest = min(runs, key=lambda r: r[1] - r[0])
        longest = max(b - a for a, b in runs)
        raise DataError(f"window of {w} samples is longer than every run "
                        f"(longest run {longest} samples; shortest run subject "
                        f"{dataset.subjects[shortest[0]]} at rows {shortest[0]}-{shortest[1] - 1})")
    idx = starts[:, None] + np.arange(w)[None, :]                # (W, w)
    cube = dataset.channels[idx]                                 # (W, w, d)
    windows = cube.transpose(0, 2, 1).reshape(len(starts), -1)
    labels = np.array([majority_label(dataset.labels[i]) for i in idx])
    return WindowedDataset(
        windows=windows, window_labels=labels, window_subjects=dataset.subjects[starts],
        channel_names=dataset.channel_names, window_len=w, step=step,
        sampling_frequency=fs,
        window_sessions=None if dataset.sessions is None else dataset.sessions[starts],
        starts=starts,
    )


def passthrough_raw(dataset: RawDataset) -> FeatureMatrix:
    return FeatureMatrix(dataset.channels.copy(), tuple(dataset.channel_names),
                         dataset.labels.copy(), dataset.subjects.copy(),
                         None if dataset.sessions is None else dataset.sessions.copy())


# --------------------------------------------------------------------------
# feature bank; every function maps (W, L) windows of one channel -> (W,)

def _safe_div(num, den):
    with np.errstate(divide="ignore", invalid="ignore"):
        return np.where(den > 0, num / np.where(den > 0, den, 1.0), np.nan)


def statistical_features(x):
    mean = x.mean(axis=1)
    c = x - mean[:, None]
    m2 = (c ** 2).mean(axis=1)
    m3 = (c ** 3).mean(axis=1)
    m4 = (c ** 4).mean(axis=1)
    q1, med, q3 = np.quantile(x, [0.25, 0.5, 0.75], axis=1)
    # relative guard so float noise in a flat window does not yield a huge skewness
    flat = m2 <= (1e-12 * np.maximum(np.abs(mean), 1.0)) ** 2
    m2_guard = np.where(flat, 0.0, m2)
    return {
        "mean": mean,
        "std": np.sqrt(m2),
        "min": x.min(axis=1),
        "max": x.max(axis=1),
        "median": med,
        "iqr": q3 - q1,
        "skewness": _safe_div(m3, m2_guard ** 1.5),
        "kurtosis": _safe_div(m4, m2_guard ** 2) - 3.0,
        "rms": np.sqrt((x ** 2).mean(axis=1)),
        "range": x.max(axis=1) - x.min(axis=1),
    }


def temporal_features(x, fs):
    L = x.shape[1]
    s = np.sign(x)
    zcr = (s[:, 1:] * s[:, :-1] < 0).sum(axis=1) / max(L - 1, 1)
    mad = np.abs(np.diff(x, axis=1)).mean(axis=1) if L > 1 else np.zeros(len(x))
    c = x - x.mean(axis=1, keepdims=True)
    den = (c ** 2).sum(axis=1)
    ac = _safe_div((c[:, 1:] * c[:, :-1]).sum(axis=1), den)
    t = np.arange(L) / fs
    tc = t - t.mean()
    slope = (c * tc).sum(axis=1) / (tc ** 2).sum() if L > 1 else np.zeros(len(x))
    return {"zcr": zcr, "mean_abs_diff": mad, "autocorr_lag1": ac, "slope": slope}


def power_spectrum(x, fs):
    """One-sided power spectrum whose bins sum to the window energy sum(x**2)."""
    L = x.shape[-1]
    X = np.fft.rfft(x, axis=-1)
    p = np.abs(X) ** 2 / L
    if L % 2 == 0:
        p[..., 1:-1] *= 2
    else:
        p[..., 1:] *= 2
    freqs = np.fft.rfftfreq(L, d=1.0 / fs)
    return freqs, p


def spectral_features(x, fs):
    L = x.shape[1]
    if L < MIN_SPECTRAL_SAMPLES:
        raise DataError(f"spectral features need windows of >= {MIN_SPECTRAL_SAMPLES} samples "
                        f"(got {L})")
    freqs, p = power_spectrum(x, fs)
    energy = p.sum(axis=1)
    ac = p[:, 1:]                       # dominant frequency ignores the DC bin
    dominant = freqs[1:][np.argmax(ac, axis=1)]
    with np.errstate(divide="ignore", invalid="ignore"):
        prob = p / energy[:, None]
        plogp = np.where(prob > 0, prob * np.log2(np.where(prob > 0, prob, 1.0)), 0.0)
    entropy = np.where(energy > 0, -plogp.sum(axis=1) / np.log2(p.shape[1]), np.nan)
    centroid = _safe_div((freqs[None, :] * p).sum(axis=1), energy)
    dc = np.abs(x.sum(axis=1)) / L
    return {"dominant_freq": dominant, "energy": energy, "entropy": entropy,
            "centroid": centroid, "dc": dc}


def _sma_features(cube, names):
    d = cube.shape[1]
    out = {}
    if d % 3 == 0:
        for k in range(d // 3):
            trio = names[3 * k:3 * k + 3]
            out["-".join(trio)] = np.abs(cube[:, 3 * k:3 * k + 3, :]).sum(axis=1).mean(axis=1)
    else:
        for j, name in enumerate(names):
            out[name] = np.abs(cube[:, j, :]).mean(axis=1)
    return out


def _fill_nan_columns(values):
    for j in range(values.shape[1]):
        col = values[:, j]
        if np.isnan(col).any():
            values[:, j] = 0.0 if np.isnan(col).all() else fill_column(col, "mean")
    return values


def extract_features(windowed: WindowedDataset, domain: str = "all") -> FeatureMatrix:
    """Per window and channel feature vectors named ``<channel>_<domain>_<feature>``.

    NaN features (skewness of a flat window, ...) are filled down the column
    with the mean of the neighbouring valid rows.
    """
    if windowed.n_windows == 0:
        raise DataError("no windows to extract features from")
    if domain not in DOMAINS + ("all",):
        raise ConfigError(f"unknown feature domain {domain!r}")
    domains = DOMAINS if domain == "all" else (domain,)
    cube = windowed.cube()
    fs = windowed.sampling_frequency
    names = windowed.channel_names
    cols, col_names = [], []
    for dom in domains:
        for j, ch in enumerate(names):
            x = cube[:, j, :]
            if dom == "statistical":
                feats = statistical_features(x)
            elif dom == "temporal":
                feats = temporal_features(x, fs)
            else:
                feats = spectral_features(x, fs)
            for fname, v in feats.items():
                cols.append(v)
                col_names.append(f"{ch}_{dom}_{fname}")
        if dom == "temporal":
            for ch, v in _sma_features(cube, names).items():
                cols.append(v)
                col_names.append(f"{ch}_temporal_sma")
    values = _fill_nan_columns(np.column_stack(cols).astype(float))
    return FeatureMatrix(values, tuple(col_names), windowed.window_labels,
                         windowed.window_subjects, windowed.window_sessions)
