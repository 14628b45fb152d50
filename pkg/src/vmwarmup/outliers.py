"""Sliding-window outlier detection."""

from __future__ import annotations

from typing import Sequence

import numpy as np
from numpy.lib.stride_tricks import sliding_window_view

from .model import AnalysisConfig
from .summarize import percentile


def window_bounds(i: int, n: int, width: int) -> tuple:
    """1-based inclusive bounds of the centred window around iteration ``i``."""
    half = width // 2
    return max(1, i - half), min(n, i - half + width - 1)


def detect_outliers(times: Sequence[float], cfg: AnalysisConfig) -> list:
    """Return the sorted 1-based indices of outlying iterations.

    An iteration past ``outlier_ignore_prefix`` is an outlier when it lies
    strictly outside ``median ± k * (p90 - p10)`` of the centred window
    around it (the point itself included). Windows are clipped at the ends.
    """
    x = np.asarray(times, dtype=float)
    n = len(x)
    width = cfg.outlier_window
    half = width // 2
    first = cfg.outlier_ignore_prefix + 1
    if first > n:
        return []

    med = np.empty(n)
    p10 = np.empty(n)
    p90 = np.empty(n)
    # iterations whose window is not clipped: i - half >= 1 and i - half + width - 1 <= n
    lo_full, hi_full = half + 1, n - width + half + 1
    if width <= n and lo_full <= hi_full:
        windows = sliding_window_view(x, width)  # row r covers iterations r+1 .. r+width
        q = np.quantile(windows, [0.1, 0.5, 0.9], axis=1)
        rows = slice(lo_full - half - 1, hi_full - half)
        p10[lo_full - 1:hi_full], med[lo_full - 1:hi_full], p90[lo_full - 1:hi_full] = (
            q[0][rows], q[1][rows], q[2][rows])
        clipped = [i for i in range(first, n + 1) if i < lo_full or i > hi_full]
    else:
        clipped = list(range(first, n + 1))
    for i in clipped:
        a, b = window_bounds(i, n, width)
        w = x[a - 1:b]
        p10[i - 1], med[i - 1], p90[i - 1] = (percentile(w, 0.1), percentile(w, 0.5),
                                              percentile(w, 0.9))

    idx = np.arange(first, n + 1)
    spread = cfg.outlier_multiplier * (p90[idx - 1] - p10[idx - 1])
    v = x[idx - 1]
    m = med[idx - 1]
    flagged = (v < m - spread) | (v > m + spread)
    return [int(i) for i in idx[flagged]]
