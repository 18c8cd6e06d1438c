"""Baseline engine for human-activity-recognition workflows on sensor time series."""

__version__ = "0.1.0"
