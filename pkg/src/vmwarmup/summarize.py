"""Steady-state summary statistics.

Percentiles interpolate linearly between order statistics everywhere in
this package. Steady-state performance uses a percentile bootstrap that
resamples inside each steady-state segment and never across segments.
"""

from __future__ import annotations

import math
import zlib
from dataclasses import dataclass
from typing import Iterator, Mapping, Optional, Sequence

import numpy as np
from numpy.lib.stride_tricks import sliding_window_view
from scipy.special import gammaln
from scipy.stats import poisson

from .classify import classify_pair
from .model import AnalysisConfig, BenchKey, ClassifiedExecution, ExecClass, PairClass

# bootstrap draws are generated in blocks of roughly this many indices
_BLOCK = 500_000


class SummaryError(ValueError):
    pass


def derive_rng(seed: int, *labels) -> np.random.Generator:
    """A generator whose stream depends only on ``seed`` and ``labels``.

    Each task (pair, sample, simulation) gets its own stream, so results
    do not depend on the order or concurrency in which tasks run.
    """
    words = [int(seed) & 0xFFFFFFFF, int(seed) >> 32]
    for label in labels:
        if isinstance(label, str):
            words.append(zlib.crc32(label.encode("utf-8")))
        else:
            words.append(int(label))
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence(words)))


def percentile(values: Sequence[float], q: float) -> float:
    x = np.sort(np.asarray(values, dtype=float))
    if x.size == 0:
        raise SummaryError("percentile of an empty sequence")
    if not 0.0 <= q <= 1.0:
        raise SummaryError(f"percentile fraction {q} outside [0, 1]")
    p = q * (x.size - 1)
    lo = math.floor(p)
    hi = math.ceil(p)
    return float(x[lo] + (p - lo) * (x[hi] - x[lo]))


@dataclass(frozen=True)
class IqrStat:
    median: float
    lo: float
    hi: float
    samples: tuple = ()

    def __post_init__(self) -> None:
        if not self.lo <= self.median <= self.hi:
            raise SummaryError(f"need lo <= median <= hi, got {self.lo}, {self.median}, {self.hi}")

    def to_dict(self) -> dict:
        return {"median": self.median, "lo": self.lo, "hi": self.hi,
                "samples": list(self.samples)}

    @classmethod
    def from_dict(cls, d) -> "IqrStat":
        return cls(d["median"], d["lo"], d["hi"], tuple(d.get("samples", ())))


@dataclass(frozen=True)
class MeanCi:
    mean: float
    lo: float
    hi: float
    level: float

    def __post_init__(self) -> None:
        if not self.lo <= self.mean <= self.hi:
            raise SummaryError(f"need lo <= mean <= hi, got {self.lo}, {self.mean}, {self.hi}")
        if not 0.0 < self.level < 1.0:
            raise SummaryError(f"level {self.level} outside (0, 1)")

    def to_dict(self) -> dict:
        return {"mean": self.mean, "lo": self.lo, "hi": self.hi, "level": self.level}

    @classmethod
    def from_dict(cls, d) -> "MeanCi":
        return cls(d["mean"], d["lo"], d["hi"], d["level"])


@dataclass(frozen=True)
class PairSummary:
    key: BenchKey
    classification: PairClass
    steady_iter_num: Optional[IqrStat] = None
    steady_iter_s: Optional[IqrStat] = None
    steady_perf: Optional[MeanCi] = None

    @property
    def has_steady_state(self) -> bool:
        return self.steady_perf is not None

    def to_dict(self) -> dict:
        return {
            **self.key.to_dict(),
            "classification": self.classification.to_dict(),
            "label": self.classification.label(),
            "steady_iter_num": None if self.steady_iter_num is None else self.steady_iter_num.to_dict(),
            "steady_iter_s": None if self.steady_iter_s is None else self.steady_iter_s.to_dict(),
            "steady_perf": None if self.steady_perf is None else self.steady_perf.to_dict(),
        }

    @classmethod
    def from_dict(cls, d) -> "PairSummary":
        def opt(k, t):
            return None if d.get(k) is None else t.from_dict(d[k])

        return cls(BenchKey.from_dict(d), PairClass.from_dict(d["classification"]),
                   opt("steady_iter_num", IqrStat), opt("steady_iter_s", IqrStat),
                   opt("steady_perf", MeanCi))


def iqr_stat(values: Sequence[float], cfg: AnalysisConfig) -> IqrStat:
    lo_q, hi_q = cfg.iqr_percentiles
    return IqrStat(percentile(values, 0.5), percentile(values, lo_q),
                   percentile(values, hi_q), tuple(float(v) for v in values))


def bootstrap_blocks(segments: Sequence[np.ndarray], n_resamples: int,
                     rng: np.random.Generator) -> Iterator[np.ndarray]:
    """Yield the resample means of :func:`bootstrap_means` block by block."""
    segments = [np.asarray(s, dtype=float) for s in segments if len(s)]
    total = sum(len(s) for s in segments)
    if total == 0:
        raise SummaryError("nothing to bootstrap")
    rows = max(1, _BLOCK // total)
    for start in range(0, n_resamples, rows):
        k = min(rows, n_resamples - start)
        acc = np.zeros(k)
        for seg in segments:
            # binding the indices to a name lets the allocator reuse the
            # previous block's memory; the inline form is ~2x slower
            idx = rng.integers(0, len(seg), size=(k, len(seg)))
            acc += seg[idx].sum(axis=1)
        yield acc / total


def bootstrap_means(segments: Sequence[np.ndarray], n_resamples: int,
                    rng: np.random.Generator) -> np.ndarray:
    """Means of ``n_resamples`` within-segment resamples of the pooled data.

    Each resample redraws every segment with replacement at its own size;
    the resampled segments are merged and averaged.
    """
    blocks = list(bootstrap_blocks(segments, n_resamples, rng))
    return np.concatenate(blocks) if blocks else np.empty(0)


def percentile_ci(samples: np.ndarray, level: float) -> tuple:
    tail = (1.0 - level) / 2.0
    return percentile(samples, tail), percentile(samples, 1.0 - tail)


def steady_perf(executions: Sequence[ClassifiedExecution], cfg: AnalysisConfig,
                rng: Optional[np.random.Generator] = None) -> MeanCi:
    segments = []
    for ce in executions:
        if not ce.has_steady_state:
            raise SummaryError(f"{ce.key} pexec {ce.execution.pexec_index} has no steady state")
        segments.extend(v for v in ce.steady_values() if len(v))
    if not segments:
        raise SummaryError("no steady-state values")
    if rng is None:
        rng = derive_rng(cfg.rng_seed, "steady_perf")
    pooled = np.concatenate(segments)
    means = bootstrap_means(segments, cfg.bootstrap_iters, rng)
    lo, hi = percentile_ci(means, cfg.ci_level)
    mean = float(pooled.mean())
    # the bootstrap sums in a different order, which can put a degenerate
    # interval an ulp to one side of the pooled mean
    return MeanCi(mean, min(lo, mean), max(hi, mean), cfg.ci_level)


def steady_iter_stats(executions: Sequence[ClassifiedExecution], cfg: AnalysisConfig) -> tuple:
    """IQR statistics of steady iter (#) and steady iter (s) over executions."""
    starts, elapsed = [], []
    for ce in executions:
        if not ce.has_steady_state:
            raise SummaryError(f"{ce.key} pexec {ce.execution.pexec_index} has no steady state")
        starts.append(ce.steady_start_iter)
        elapsed.append(ce.steady_elapsed_s)
    return iqr_stat(starts, cfg), iqr_stat(elapsed, cfg)


def summarize_pair(key: BenchKey, executions: Sequence[ClassifiedExecution],
                   cfg: AnalysisConfig, rng: Optional[np.random.Generator] = None) -> PairSummary:
    pair_class = classify_pair([ce.classification for ce in executions])
    if not all(ce.has_steady_state for ce in executions):
        return PairSummary(key, pair_class)
    if rng is None:
        rng = derive_rng(cfg.rng_seed, "steady_perf", str(key))
    num, secs = steady_iter_stats(executions, cfg)
    return PairSummary(key, pair_class, num, secs, steady_perf(executions, cfg, rng))


def georges_steady(times: Sequence[float], cfg: AnalysisConfig) -> Optional[int]:
    """First 1-based index whose trailing window has CoV below the threshold.

    The coefficient of variation uses the sample standard deviation.
    """
    x = np.asarray(times, dtype=float)
    w = cfg.georges_window
    if len(x) < w:
        return None
    windows = sliding_window_view(x, w)
    sd = windows.std(axis=1, ddof=1) if w > 1 else np.zeros(len(windows))
    cov = sd / windows.mean(axis=1)
    hits = np.flatnonzero(cov < cfg.georges_cov_threshold)
    return None if hits.size == 0 else int(hits[0]) + w


def _box_probability(counts: np.ndarray, c: int) -> float:
    """P(|X_i - n_i| <= c for all i) for X ~ Multinomial(N, counts / N).

    Uses Levin's representation through independent Poisson(n_i)
    variables; the distribution of their truncated sum is computed by
    direct convolution, so no Edgeworth approximation is needed.
    """
    n = int(counts.sum())
    support = np.arange(n + 1)
    dist = np.zeros(n + 1)
    dist[0] = 1.0
    for lam in counts:
        pmf = poisson.pmf(support, lam)
        pmf[(support < lam - c) | (support > lam + c)] = 0.0
        dist = np.convolve(dist, pmf)[: n + 1]
    log_scale = gammaln(n + 1) - n * math.log(n) + n
    return float(min(1.0, max(0.0, math.exp(log_scale) * dist[n])))


def multinomial_ci(counts: Mapping[ExecClass, int], level: float) -> dict:
    """Sison-Glaz simultaneous confidence intervals for class proportions.

    Every ExecClass gets an interval, including classes with count zero.
    """
    cats = list(ExecClass)
    n_i = np.array([int(counts.get(c, 0)) for c in cats], dtype=float)
    n = int(n_i.sum())
    if n < 1:
        raise SummaryError("multinomial_ci needs at least one observation")
    p = n_i / n
    target = level
    nu_prev = _box_probability(n_i, 0)
    c, gamma = 0, 0.0
    if nu_prev < target:
        for c in range(n):
            nu_next = _box_probability(n_i, c + 1)
            if nu_next >= target:
                gamma = (target - nu_prev) / (nu_next - nu_prev)
                break
            nu_prev = nu_next
    lo = np.clip(p - c / n, 0.0, 1.0)
    hi = np.clip(p + (c + 2 * gamma) / n, 0.0, 1.0)
    return {cat: (float(lo[k]), float(hi[k])) for k, cat in enumerate(cats)}
