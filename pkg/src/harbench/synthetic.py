"""Synthetic accelerometer-like recordings for tests, demos and smoke runs."""
from __future__ import annotations

import csv
from pathlib import Path

import numpy as np

from .rng import derive_rng


def activity_signal(activity_index, n, fs, n_channels, rng, noise=0.05):
    """One activity segment: a per-activity tone and offset on each channel."""
    t = np.arange(n) / fs
    base_freq = 1.0 + 1.5 * activity_index
    cols = []
    for ch in range(n_channels):
        amp = 1.0 + 0.3 * ch
        offset = 2.0 * activity_index - ch
        phase = rng.uniform(0, 2 * np.pi)
        cols.append(offset + amp * np.sin(2 * np.pi * base_freq * t + phase))
    x = np.stack(cols, axis=1)
    return x + noise * rng.standard_normal(x.shape)


def write_dataset(path, subjects=("1", "2", "3", "4"), activities=("walk", "sit"),
                  seconds=8.0, fs=50, n_channels=3, seed=0, noise=0.05,
                  with_timestamps=True, with_sessions=False):
    """Write a CSV in the ``t d.. c p [s]`` column layout and return its path.

    Each subject performs every activity once for ``seconds`` seconds; the
    activities are clearly separable by offset and tone frequency.
    """
    path = Path(path)
    n = int(round(seconds * fs))
    header = (["t"] if with_timestamps else []) + [f"acc_{a}" for a in "xyz"[:n_channels]] \
        + [f"ch{i}" for i in range(3, n_channels)] + ["activity", "subject"] \
        + (["session"] if with_sessions else [])
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(header)
        clock = 0
        for s in subjects:
            for ai, act in enumerate(activities):
                rng = derive_rng(seed, "synthetic", s, act)
                x = activity_signal(ai, n, fs, n_channels, rng, noise)
                for i in range(n):
                    row = ([f"{(clock + i) / fs:.6f}"] if with_timestamps else [])
                    row += [repr(float(v)) for v in x[i]] + [act, s]
                    if with_sessions:
                        row.append("a" if i < n // 2 else "b")
                    w.writerow(row)
                clock += n
    return path


def write_config(path, dataset, **overrides):
    """Write a minimal INI next to ``dataset``; ``overrides`` are ``key=value`` strings or values."""
    sections = {
        "data": {"path": str(dataset), "header_type": "tdcp"},
        "treatment": {"time_window": "2", "overlap": "1"},
        "preprocessing": {},
        "training": {"use_ml": "kNN", "use_dl": "", "seed": "0"},
    }
    from .config import KEY_SECTION
    for key, value in overrides.items():
        if value is None:
            continue
        if isinstance(value, (list, tuple)):
            value = ", ".join(str(v) for v in value)
        elif isinstance(value, bool):
            value = "true" if value else "false"
        sections[KEY_SECTION[key]][key] = str(value)
    lines = []
    for name, body in sections.items():
        lines.append(f"[{name}]")
        lines += [f"{k} = {v}" for k, v in body.items()]
        lines.append("")
    Path(path).write_text("\n".join(lines), encoding="utf-8")
    return Path(path)
