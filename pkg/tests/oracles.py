"""Independent reference implementations used only by the tests.

Nothing here imports the production algorithms it checks.
"""

from __future__ import annotations

import itertools
import math
from types import SimpleNamespace

import numpy as np

DELTA = 0.001
STEADY_STATE_LEN = 500


def reference_classify(segs, total_iters, delta=DELTA, steady_state_len=STEADY_STATE_LEN):
    """Line-for-line transliteration of the published classifier.

    One change: the steady-state test compares against the iteration
    count, not the number of segments.
    """
    assert(len(segs) > 0)
    last_seg = segs[len(segs) - 1]
    lower_bound = last_seg.mean - max(last_seg.variance, delta)
    upper_bound = last_seg.mean + max(last_seg.variance, delta)
    cls = "flat"
    i = len(segs) - 2
    while i > -1:
        cur_seg = segs[i]
        i -= 1
        if cur_seg.mean + cur_seg.variance >= lower_bound \
          and cur_seg.mean - cur_seg.variance <= upper_bound:
            continue
        elif cur_seg.end > total_iters - steady_state_len:
            cls = "no steady state"
            break
        elif cur_seg.mean < lower_bound:
            cls = "slowdown"
            break
        assert(cur_seg.mean > upper_bound)
        cls = "warmup"
    return cls


def seg(start, end, mean, variance):
    return SimpleNamespace(start=start, end=end, mean=mean, variance=variance)


def sorted_percentile(values, q):
    """Percentile by linear interpolation, written out without numpy."""
    xs = sorted(values)
    pos = q * (len(xs) - 1)
    k = int(pos)
    frac = pos - k
    if k + 1 >= len(xs):
        return xs[-1]
    return xs[k] + frac * (xs[k + 1] - xs[k])


def brute_outliers(times, window=200, multiplier=3.0, prefix=200):
    """Evaluate the outlier rule one iteration at a time."""
    n = len(times)
    out = []
    for i in range(1, n + 1):
        if i <= prefix:
            continue
        a = max(1, i - window // 2)
        b = min(n, i - window // 2 + window - 1)
        w = times[a - 1:b]
        med = sorted_percentile(w, 0.5)
        spread = multiplier * (sorted_percentile(w, 0.9) - sorted_percentile(w, 0.1))
        if times[i - 1] < med - spread or times[i - 1] > med + spread:
            out.append(i)
    return out


def gaussian_cost(values, floor=1e-12):
    m = len(values)
    mu = sum(values) / m
    var = sum((v - mu) ** 2 for v in values) / m
    return m * (math.log(2 * math.pi) + math.log(var + floor) + 1)


def exhaustive_segmentation(values, penalty, min_len=2):
    """Try all 2^(n-1) changepoint subsets; return (objective, changepoints).

    Ties go to fewer changepoints, then the lexicographically smallest vector.
    """
    n = len(values)
    best = None
    for k in range(n):
        for cps in itertools.combinations(range(1, n), k):
            bounds = (0, *cps, n)
            if any(b - a < min_len for a, b in zip(bounds, bounds[1:])):
                continue
            obj = sum(gaussian_cost(values[a:b]) for a, b in zip(bounds, bounds[1:]))
            obj += penalty * k
            key = (obj, k, list(cps))
            if best is None or key < best:
                best = key
    return best[0], best[2]


def enumerate_bootstrap_means(segments):
    """Every equally likely within-segment resample mean."""
    per_segment = []
    for s in segments:
        per_segment.append([sum(draw) for draw in itertools.product(s, repeat=len(s))])
    total = sum(len(s) for s in segments)
    return sorted(sum(combo) / total for combo in itertools.product(*per_segment))


def discrete_quantile(sorted_values, q):
    """Smallest value whose empirical CDF reaches q."""
    n = len(sorted_values)
    k = max(0, math.ceil(q * n) - 1)
    return sorted_values[k]


def lag1_autocorrelation(x):
    x = np.asarray(x, dtype=float) - np.mean(x)
    return float(np.dot(x[1:], x[:-1]) / np.dot(x, x))
