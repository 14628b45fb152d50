"""Mean-and-variance changepoint detection.

Segments are scored with the Gaussian negative twice log-likelihood at
the maximum-likelihood mean and variance. Both search routines minimise

    sum(segment costs) + penalty * (number of changepoints)

and break exact ties by preferring fewer changepoints, then the
lexicographically earliest changepoint vector. A changepoint ``t`` means
one segment ends at position ``t`` (1-based) and the next starts at ``t+1``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from .model import AnalysisConfig, Segment
from .outliers import detect_outliers

LOG_2PI = math.log(2 * math.pi)
EXACT_MAX_LEN = 5000


class ChangepointError(ValueError):
    pass


@dataclass(frozen=True)
class CostModel:
    name: str = "normal-meanvar"
    variance_floor: float = 1e-12

    def __post_init__(self) -> None:
        if self.name != "normal-meanvar":
            raise ChangepointError(f"unsupported cost model {self.name!r}")
        if not self.variance_floor > 0:
            raise ChangepointError("variance_floor must be positive")


DEFAULT_COST = CostModel()


def segment_cost(values: Sequence[float], cfg: Optional[AnalysisConfig] = None,
                 cost: CostModel = DEFAULT_COST) -> float:
    x = np.asarray(values, dtype=float)
    m = len(x)
    min_len = (cfg or AnalysisConfig()).min_segment_len
    if m < min_len:
        raise ChangepointError(f"segment of {m} values is shorter than {min_len}")
    var = float(np.mean((x - x.mean()) ** 2))
    return m * (LOG_2PI + math.log(var + cost.variance_floor) + 1.0)


class _Costs:
    """Vectorised segment costs from prefix sums of the centred series."""

    def __init__(self, values: np.ndarray, cost: CostModel):
        x = values - values.mean()
        self.s1 = np.concatenate(([0.0], np.cumsum(x)))
        self.s2 = np.concatenate(([0.0], np.cumsum(x * x)))
        self.floor = cost.variance_floor

    def __call__(self, taus: np.ndarray, t: int) -> np.ndarray:
        """Cost of the segments ``taus+1 .. t`` for every start in ``taus``."""
        m = t - taus
        s = self.s1[t] - self.s1[taus]
        ss = self.s2[t] - self.s2[taus]
        var = np.maximum(ss / m - (s / m) ** 2, 0.0)
        return m * (LOG_2PI + np.log(var + self.floor) + 1.0)


def _changepoints(back: list, t: int) -> list:
    cps = []
    while t > 0:
        t = back[t]
        if t > 0:
            cps.append(t)
    return cps[::-1]


def _search(values, penalty: float, cfg: AnalysisConfig, prune: bool,
            cost: CostModel) -> list:
    x = np.asarray(values, dtype=float)
    n = len(x)
    min_len = cfg.min_segment_len
    if penalty < 0 or math.isnan(penalty):
        raise ChangepointError(f"penalty must be non-negative, got {penalty}")
    if n < min_len:
        raise ChangepointError(f"series of {n} values is shorter than {min_len}")
    if n < 2 * min_len or math.isinf(penalty):
        return []

    costs = _Costs(x, cost)
    best = np.full(n + 1, math.inf)  # best objective of positions 1..t
    best[0] = 0.0
    ncp = np.zeros(n + 1, dtype=np.int64)
    back = [0] * (n + 1)
    expire = np.full(n + 1, n + 1)  # a pruned start stays usable until this t
    cands = np.array([0], dtype=np.int64)

    for t in range(min_len, n + 1):
        cands = cands[expire[cands] > t]
        usable = cands[t - cands >= min_len]
        vals = best[usable] + costs(usable, t) + np.where(usable > 0, penalty, 0.0)
        lowest = vals.min()
        ties = usable[vals == lowest]
        if len(ties) == 1:
            tau = int(ties[0])
        else:
            fewest = ncp[ties].min()
            ties = ties[ncp[ties] == fewest]
            tau = min((int(k) for k in ties),
                      key=lambda k: _changepoints(back, k) + ([k] if k else []))
        best[t] = lowest
        back[t] = tau
        ncp[t] = ncp[tau] + (1 if tau > 0 else 0)
        if prune:
            # a start is dominated for every later end reachable through t;
            # the margin absorbs rounding so ties are never pruned
            margin = 1e-9 * (1.0 + abs(lowest))
            dominated = usable[vals - penalty > lowest + margin]
            expire[dominated] = np.minimum(expire[dominated], t + min_len)
        if t <= n - min_len:
            cands = np.append(cands, t)
    return _changepoints(back, n)


def pelt_meanvar(values: Sequence[float], penalty: float, cfg: AnalysisConfig,
                 cost: CostModel = DEFAULT_COST) -> list:
    """Optimal changepoints via pruned exact linear-time search."""
    return _search(values, penalty, cfg, True, cost)


def exact_segmentation(values: Sequence[float], penalty: float, cfg: AnalysisConfig,
                       cost: CostModel = DEFAULT_COST) -> list:
    """Optimal changepoints via the unpruned quadratic dynamic program."""
    if len(values) > EXACT_MAX_LEN:
        raise ChangepointError(
            f"exact segmentation refuses {len(values)} values (limit {EXACT_MAX_LEN})")
    return _search(values, penalty, cfg, False, cost)


def objective(values: Sequence[float], changepoints: Sequence[int], penalty: float,
              cfg: AnalysisConfig, cost: CostModel = DEFAULT_COST) -> float:
    """The penalised cost of one segmentation, evaluated segment by segment."""
    x = np.asarray(values, dtype=float)
    bounds = [0, *changepoints, len(x)]
    total = 0.0
    for a, b in zip(bounds, bounds[1:]):
        if b - a < cfg.min_segment_len:
            raise ChangepointError(f"segment {a + 1}..{b} is shorter than the minimum")
        total += segment_cost(x[a:b], cfg, cost)
    return total + penalty * len(changepoints)


def analyse_execution(times: Sequence[float], cfg: AnalysisConfig,
                      cost: CostModel = DEFAULT_COST) -> tuple:
    """Detect outliers, then segment the remaining values.

    Returns ``(outliers, segments)``. Segments tile ``[1, N]`` in original
    iteration numbering; an outlier belongs to the segment whose span
    contains it, and segment statistics ignore outliers.
    """
    x = np.asarray(times, dtype=float)
    n = len(x)
    if n < 2 * cfg.min_segment_len:
        raise ChangepointError(
            f"series of {n} iterations is too short to segment (need {2 * cfg.min_segment_len})")
    outliers = detect_outliers(x, cfg)
    keep = np.ones(n, dtype=bool)
    keep[np.asarray(outliers, dtype=int) - 1] = False
    kept_idx = np.flatnonzero(keep) + 1  # original 1-based iteration of each kept value
    kept = x[keep]
    n_kept = len(kept)
    if n_kept >= cfg.min_segment_len:
        penalty = cfg.penalty_coeff * math.log(n_kept)
        cps = pelt_meanvar(kept, penalty, cfg, cost)
    else:
        cps = []

    bounds = [0, *cps, n_kept]
    segments = []
    for k, (a, b) in enumerate(zip(bounds, bounds[1:])):
        start = 1 if k == 0 else segments[-1].end + 1
        end = n if b == n_kept else int(kept_idx[b - 1])
        seg_values = kept[a:b]
        segments.append(Segment(start, end, float(np.mean(seg_values)),
                                float(np.var(seg_values))))
    return outliers, segments
