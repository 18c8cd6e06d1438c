"""Delimited-text dataset loading, exploratory statistics and CSV export.

Column layout follows ``header_type``: ``t`` timestamp (seconds), one or more
``d`` sensor columns, ``c`` activity label, ``p`` subject id and, as an
extension, ``s`` session id. Sensor cells that do not parse as finite numbers
become NaN; cleaning decides what to do with them.
"""
from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional

import numpy as np

from .config import DatasetMeta, PipelineConfig
from .errors import DataError

IMPLICIT_SUBJECT = "0"


@dataclass(frozen=True, eq=False)
class RawDataset:
    channels: np.ndarray                 # (n, d) float, NaN = missing
    labels: np.ndarray                   # (n,) str
    subjects: np.ndarray                 # (n,) str
    sampling_frequency: float
    channel_names: tuple = ()
    timestamps: Optional[np.ndarray] = None
    sessions: Optional[np.ndarray] = None

    def __post_init__(self):
        n, d = self.channels.shape
        if n < 1 or d < 1:
            raise DataError(f"dataset must have n >= 1 rows and d >= 1 channels (got {n}x{d})")
        for name in ("labels", "subjects", "timestamps", "sessions"):
            vec = getattr(self, name)
            if vec is not None and len(vec) != n:
                raise DataError(f"{name} has length {len(vec)}, expected {n}")
        if not self.channel_names:
            object.__setattr__(self, "channel_names", tuple(f"ch{i}" for i in range(d)))

    @property
    def n(self) -> int:
        return self.channels.shape[0]

    @property
    def d(self) -> int:
        return self.channels.shape[1]

    def with_channels(self, channels: np.ndarray) -> "RawDataset":
        return RawDataset(channels=channels, labels=self.labels, subjects=self.subjects,
                          sampling_frequency=self.sampling_frequency,
                          channel_names=self.channel_names, timestamps=self.timestamps,
                          sessions=self.sessions)

    def runs(self):
        """Yield ``(start, stop)`` of maximal contiguous same-(subject, session) blocks."""
        key = self.subjects if self.sessions is None else np.char.add(
            np.char.add(self.subjects.astype(str), "\x00"), self.sessions.astype(str))
        change = np.flatnonzero(key[1:] != key[:-1]) + 1
        bounds = np.concatenate([[0], change, [self.n]])
        for a, b in zip(bounds[:-1], bounds[1:]):
            yield int(a), int(b)


def _to_float(cell):
    try:
        v = float(cell)
    except ValueError:
        return math.nan
    return v if math.isfinite(v) else math.nan


def _layout(header_type, n_cols):
    """Map header letters to column indices."""
    cols = {}
    pos = 0
    if header_type.startswith("t"):
        cols["t"] = 0
        pos = 1
    tail = header_type[header_type.index("d") + 1:]
    n_sensor = n_cols - pos - len(tail)
    cols["d"] = list(range(pos, pos + n_sensor))
    for i, letter in enumerate(tail):
        cols[letter] = pos + n_sensor + i
    return cols


def _read_rows(config: PipelineConfig):
    path = config.dataset_path
    try:
        fh = open(path, newline="", encoding="utf-8")
    except OSError as exc:
        raise DataError(f"cannot read dataset {path}: {exc.strerror or exc}") from None
    with fh:
        reader = csv.reader(fh, delimiter=config.separator)
        header = None
        rows = []
        width = None
        for row in reader:
            if not row or all(not c.strip() for c in row):
                continue
            if config.has_header and header is None:
                header = [c.strip() for c in row]
                width = len(header)
                continue
            if width is None:
                width = len(row)
            if len(row) != width:
                raise DataError(f"{path}: row {reader.line_num} has {len(row)} columns, "
                                f"expected {width}")
            rows.append(row)
    if not rows:
        raise DataError(f"{path}: empty dataset (no data rows)")
    return header, rows, width


def infer_sampling_frequency(timestamps) -> Optional[float]:
    ts = np.asarray(timestamps, dtype=float)
    if len(ts) < 2:
        return None
    dt = np.diff(ts)
    dt = dt[np.isfinite(dt) & (dt > 0)]
    if not len(dt):
        return None
    fs = 1.0 / float(np.median(dt))
    return float(round(fs)) if abs(fs - round(fs)) < 1e-6 * max(fs, 1) else fs


def peek_dataset(config: PipelineConfig, max_rows=5000) -> DatasetMeta:
    header, rows, width = _read_rows(config)
    fs = None
    if config.has_timestamps:
        fs = infer_sampling_frequency([_to_float(r[0]) for r in rows[:max_rows]])
    return DatasetMeta(n_columns=width, column_names=tuple(header or ()),
                       inferred_sampling_frequency=fs)


def load_dataset(config: PipelineConfig) -> RawDataset:
    header, rows, width = _read_rows(config)
    need = len(config.header_type)
    if width < need:
        raise DataError(f"header_type={config.header_type} needs at least {need} columns, "
                        f"file has {width}")
    cols = _layout(config.header_type, width)
    table = np.array(rows, dtype=object)

    channels = np.array([[_to_float(c) for c in r] for r in table[:, cols["d"]]], dtype=float)
    channels = channels.reshape(len(rows), len(cols["d"]))
    labels = np.array([c.strip() for c in table[:, cols["c"]]], dtype=str)
    if np.any(labels == ""):
        first = int(np.flatnonzero(labels == "")[0])
        raise DataError(f"blank activity label in data row {first + 1}")

    if "p" in cols:
        subjects = np.array([c.strip() for c in table[:, cols["p"]]], dtype=str)
    elif config.split_method == "intra":
        subjects = np.full(len(rows), IMPLICIT_SUBJECT)
    else:
        raise DataError("subject column required for split_method=inter "
                        f"(header_type={config.header_type} has no 'p')")
    sessions = None
    if "s" in cols:
        sessions = np.array([c.strip() for c in table[:, cols["s"]]], dtype=str)

    timestamps = None
    fs = config.sampling_frequency
    if "t" in cols:
        timestamps = np.array([_to_float(c) for c in table[:, cols["t"]]], dtype=float)
        if fs is None:
            fs = infer_sampling_frequency(timestamps)
    if fs is None:
        raise DataError("sampling_frequency not configured and not inferable from timestamps")

    names = tuple(header[i] for i in cols["d"]) if header else ()
    if names and len(set(names)) != len(names):
        names = ()
    return RawDataset(channels=channels, labels=labels, subjects=subjects,
                      sampling_frequency=float(fs), channel_names=names,
                      timestamps=timestamps, sessions=sessions)


# --------------------------------------------------------------------------
# statistics

def five_number(values) -> dict:
    v = np.asarray(values, dtype=float)
    v = v[~np.isnan(v)]
    if not len(v):
        return {"min": None, "q1": None, "median": None, "q3": None, "max": None}
    q = np.quantile(v, [0.0, 0.25, 0.5, 0.75, 1.0], method="linear")
    return dict(zip(("min", "q1", "median", "q3", "max"), (float(x) for x in q)))


def _counts(values):
    uniq, first, counts = np.unique(values, return_index=True, return_counts=True)
    order = np.argsort(first, kind="stable")
    return {str(uniq[i]): int(counts[i]) for i in order}


@dataclass
class DatasetStats:
    n: int
    group_by: str
    class_counts: dict
    subject_counts: dict
    class_subject_counts: dict        # class -> subject -> count
    summaries: dict                   # channel -> five-number summary
    grouped_summaries: dict           # group id -> channel -> five-number summary
    missing: dict                     # column -> count
    sampling_frequency: float = 0.0
    channel_names: list = field(default_factory=list)

    def to_dict(self) -> dict:
        return {
            "n": self.n, "group_by": self.group_by,
            "sampling_frequency": self.sampling_frequency,
            "channels": self.channel_names,
            "class_counts": self.class_counts,
            "subject_counts": self.subject_counts,
            "class_subject_counts": self.class_subject_counts,
            "summaries": self.summaries,
            "grouped_summaries": self.grouped_summaries,
            "missing": self.missing,
        }


def compute_stats(dataset: RawDataset, group_by: str = "CLASS") -> DatasetStats:
    names = list(dataset.channel_names)
    class_subject = {}
    for cls in _counts(dataset.labels):
        mask = dataset.labels == cls
        class_subject[cls] = _counts(dataset.subjects[mask])
    groups = dataset.labels if group_by == "CLASS" else dataset.subjects
    grouped = {}
    for g in _counts(groups):
        mask = groups == g
        grouped[g] = {name: five_number(dataset.channels[mask, j]) for j, name in enumerate(names)}
    missing = {name: int(np.isnan(dataset.channels[:, j]).sum()) for j, name in enumerate(names)}
    if dataset.timestamps is not None:
        missing["timestamp"] = int(np.isnan(dataset.timestamps).sum())
    return DatasetStats(
        n=dataset.n, group_by=group_by,
        class_counts=_counts(dataset.labels),
        subject_counts=_counts(dataset.subjects),
        class_subject_counts=class_subject,
        summaries={name: five_number(dataset.channels[:, j]) for j, name in enumerate(names)},
        grouped_summaries=grouped,
        missing=missing,
        sampling_frequency=dataset.sampling_frequency,
        channel_names=names,
    )


def format_stats_table(stats: DatasetStats) -> str:
    lines = [f"rows: {stats.n}   sampling frequency: {stats.sampling_frequency:g} Hz", ""]
    lines.append(f"{'class':<20}{'rows':>10}{'share':>9}")
    for cls, c in stats.class_counts.items():
        lines.append(f"{cls:<20}{c:>10}{100 * c / stats.n:>8.1f}%")
    lines.append("")
    lines.append(f"{'subject':<20}{'rows':>10}{'share':>9}")
    for subj, c in stats.subject_counts.items():
        lines.append(f"{subj:<20}{c:>10}{100 * c / stats.n:>8.1f}%")
    header = f"{'channel':<20}" + "".join(f"{k:>12}" for k in ("min", "q1", "median", "q3", "max"))

    def fmt(s):
        return "".join(f"{'-':>12}" if v is None else f"{v:>12.4g}" for v in s.values())

    lines += ["", "all rows", header]
    lines += [f"{ch:<20}" + fmt(s) for ch, s in stats.summaries.items()]
    label = "class" if stats.group_by == "CLASS" else "subject"
    for g, per_ch in stats.grouped_summaries.items():
        lines += ["", f"{label} {g}", header]
        lines += [f"{ch:<20}" + fmt(s) for ch, s in per_ch.items()]
    if any(stats.missing.values()):
        lines += ["", "missing values: " + ", ".join(f"{k}={v}" for k, v in stats.missing.items() if v)]
    return "\n".join(lines)


# --------------------------------------------------------------------------
# export

META_COLUMNS = ("label", "subject", "session")


def export_dataset(matrix, path) -> None:
    """Write a FeatureMatrix as CSV: feature columns, then label/subject[/session]."""
    if matrix.values.size == 0:
        raise DataError("cannot export an empty matrix")
    path = Path(path)
    header = list(matrix.feature_names) + ["label", "subject"]
    if matrix.sessions is not None:
        header.append("session")
    try:
        with open(path, "w", newline="", encoding="utf-8") as fh:
            w = csv.writer(fh)
            w.writerow(header)
            for i in range(matrix.values.shape[0]):
                row = [repr(float(v)) for v in matrix.values[i]]
                row += [matrix.labels[i], matrix.subjects[i]]
                if matrix.sessions is not None:
                    row.append(matrix.sessions[i])
                w.writerow(row)
    except OSError as exc:
        raise DataError(f"cannot write {path}: {exc.strerror or exc}") from None


def load_exported(path):
    from .representation import FeatureMatrix

    with open(path, newline="", encoding="utf-8") as fh:
        rows = list(csv.reader(fh))
    if len(rows) < 2:
        raise DataError(f"{path}: no data rows")
    header = rows[0]
    n_meta = 3 if header[-1] == "session" else 2
    n_feat = len(header) - n_meta
    body = np.array(rows[1:], dtype=object)
    return FeatureMatrix(
        values=body[:, :n_feat].astype(float),
        feature_names=tuple(header[:n_feat]),
        labels=body[:, n_feat].astype(str),
        subjects=body[:, n_feat + 1].astype(str),
        sessions=body[:, n_feat + 2].astype(str) if n_meta == 3 else None,
    )
