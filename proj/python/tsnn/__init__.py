"""Layered memory-bank forecaster for periodic time series."""

from ._tsnn import (
    Bank,
    ComputationError,
    Config,
    DataError,
    Error,
    Scaling,
    Strategy,
    UsageError,
    evaluate,
    load_csv,
    metrics,
    near_zero_ratio,
    set_max_threads,
    synthetic,
    windows,
)

__all__ = [
    "Bank",
    "ComputationError",
    "Config",
    "DataError",
    "Error",
    "Scaling",
    "Strategy",
    "UsageError",
    "evaluate",
    "load_csv",
    "metrics",
    "near_zero_ratio",
    "set_max_threads",
    "synthetic",
    "windows",
]
