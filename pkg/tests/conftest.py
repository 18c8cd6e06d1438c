import warnings

import numpy as np
import pytest

from harbench.dataset_io import RawDataset
from harbench.synthetic import write_config, write_dataset


@pytest.fixture
def dataset_csv(tmp_path):
    return write_dataset(tmp_path / "data.csv")


@pytest.fixture
def make_config(tmp_path, dataset_csv):
    """Write an INI for the separable fixture; keyword overrides go into the file."""
    counter = iter(range(10_000))

    def _make(**overrides):
        return write_config(tmp_path / f"cfg{next(counter)}.ini", dataset_csv, **overrides)

    return _make


def raw_dataset(channels, labels=None, subjects=None, fs=25.0, sessions=None):
    channels = np.asarray(channels, dtype=float)
    if channels.ndim == 1:
        channels = channels[:, None]
    n = len(channels)
    labels = np.asarray(["a"] * n if labels is None else labels, dtype=str)
    subjects = np.asarray(["1"] * n if subjects is None else subjects, dtype=str)
    return RawDataset(channels, labels, subjects, fs,
                      sessions=None if sessions is None else np.asarray(sessions, dtype=str))


@pytest.fixture(autouse=True)
def _quiet_warnings():
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        yield


# acceptance criteria report: one line per criterion, printed after the run
ACCEPTANCE_LINES = {}


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_LINES:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(ACCEPTANCE_LINES):
        terminalreporter.write_line(ACCEPTANCE_LINES[n])
