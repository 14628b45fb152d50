"""How much data is enough: truncation, subsampling and CI coverage studies.

Also home to the synthetic run-sequence generator used by the tests and
the ``synth`` CLI command.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np
from scipy.signal import lfilter

from .ingest import ResultsSet
from .model import AnalysisConfig, BenchKey, ExecClass, ProcessExecution
from .pipeline import analyse_one, analyse_results, summarize_group
from .summarize import (PairSummary, bootstrap_blocks, derive_rng, multinomial_ci,
                        percentile_ci)

PATTERNS = ("flat", "warmup", "slowdown", "no_steady_state", "cyclic")


class SensitivityError(ValueError):
    pass


@dataclass(frozen=True)
class SynthSpec:
    pattern: str = "flat"
    n_iters: int = 2000
    base_time_s: float = 0.1
    step_magnitude_s: float = 0.0
    step_at: int = 100
    noise_sd_s: float = 0.0
    outlier_rate: float = 0.0
    ar1_phi: float = 0.0
    seed: int = 0

    def __post_init__(self) -> None:
        if self.pattern not in PATTERNS:
            raise SensitivityError(f"unknown pattern {self.pattern!r}; expected one of {PATTERNS}")
        if self.n_iters < 4:
            raise SensitivityError("n_iters must be at least 4")
        if not self.base_time_s > 0:
            raise SensitivityError("base_time_s must be positive")
        if self.noise_sd_s < 0:
            raise SensitivityError("noise_sd_s must be non-negative")
        if not 0 <= self.outlier_rate <= 1:
            raise SensitivityError("outlier_rate must be a fraction")
        if not abs(self.ar1_phi) < 1:
            raise SensitivityError("ar1_phi must lie strictly inside (-1, 1)")
        if not 1 <= self.step_at <= self.n_iters:
            raise SensitivityError("step_at must be an iteration index")


def ar1_noise(n: int, phi: float, sd: float, rng: np.random.Generator) -> np.ndarray:
    """Stationary AR(1) Gaussian noise with marginal standard deviation ``sd``."""
    z = rng.standard_normal(n)
    z[1:] *= math.sqrt(1.0 - phi * phi)
    return sd * lfilter([1.0], [1.0, -phi], z)


def _shape(spec: SynthSpec, cfg: AnalysisConfig) -> np.ndarray:
    n, base, step, at = spec.n_iters, spec.base_time_s, spec.step_magnitude_s, spec.step_at
    i = np.arange(1, n + 1)
    if spec.pattern == "flat":
        return np.full(n, base)
    if spec.pattern == "warmup":
        return np.where(i <= at, base + step, base)
    if spec.pattern == "slowdown":
        return np.where(i <= at, base, base + step)
    if spec.pattern == "no_steady_state":
        late = at if at > n - cfg.steady_state_len else n - cfg.steady_state_len // 2
        return np.where(i <= late, base, base + step)
    return np.where(((i - 1) // at) % 2 == 1, base + step, base)


def synth_execution(spec: SynthSpec, key: Optional[BenchKey] = None, pexec_index: int = 0,
                    cfg: Optional[AnalysisConfig] = None) -> ProcessExecution:
    """Generate one deterministic synthetic execution.

    ``step_at`` is the last iteration at the pre-step level. Outliers are
    10x the base time, injected independently at ``outlier_rate`` after
    the outlier-ignore prefix.
    """
    cfg = cfg or AnalysisConfig()
    key = key or BenchKey("synth", "synthvm", spec.pattern)
    rng = derive_rng(spec.seed, "synth")
    times = _shape(spec, cfg)
    if spec.noise_sd_s > 0:
        times = times + ar1_noise(spec.n_iters, spec.ar1_phi, spec.noise_sd_s, rng)
    if spec.outlier_rate > 0:
        hit = rng.random(spec.n_iters) < spec.outlier_rate
        hit[: cfg.outlier_ignore_prefix] = False
        times = np.where(hit, 10.0 * spec.base_time_s, times)
    if not np.all(times > 0):
        raise SensitivityError("synthetic spec produced non-positive times; reduce the noise")
    return ProcessExecution(key, pexec_index, tuple(times.tolist()))


def synth_results(specs: Sequence[SynthSpec], pexecs: int, machine: str = "synth",
                  vm: str = "synthvm", cfg: Optional[AnalysisConfig] = None) -> ResultsSet:
    """One pair per spec, ``pexecs`` executions each with seeds ``spec.seed + k``."""
    execs = []
    for spec in specs:
        key = BenchKey(machine, vm, spec.pattern)
        for k in range(pexecs):
            s = SynthSpec(**{**spec.__dict__, "seed": spec.seed + k})
            execs.append(synth_execution(s, key, k, cfg))
    return ResultsSet(execs, {"generator": "vmwarmup synth"})


@dataclass(frozen=True)
class SimilarityPoint:
    n: int
    class_similarity: float
    steady_iter_similarity: float
    steady_perf_similarity: float
    overall: float
    n_compared: int = 0
    n_steady_compared: int = 0

    def to_dict(self) -> dict:
        return dict(self.__dict__)


@dataclass(frozen=True)
class SimilarityReport:
    axis: str
    points: tuple = field(default_factory=tuple)

    def __post_init__(self) -> None:
        if self.axis not in ("iterations", "pexecs"):
            raise SensitivityError(f"unknown axis {self.axis!r}")
        object.__setattr__(self, "points", tuple(sorted(self.points, key=lambda p: p.n)))

    def to_dict(self) -> dict:
        return {"axis": self.axis, "points": [p.to_dict() for p in self.points]}


def _overlap(a_lo: float, a_hi: float, b_lo: float, b_hi: float) -> bool:
    return max(a_lo, b_lo) <= min(a_hi, b_hi)


def compare_pair(full: PairSummary, other: PairSummary, level: float) -> tuple:
    """Statistical equivalence of two summaries of the same pair.

    Returns ``(classification, steady_iter, steady_perf)``. The last two
    are ``None`` when either side lacks a steady state.
    """
    ci_a = multinomial_ci(full.classification.count_map, level)
    ci_b = multinomial_ci(other.classification.count_map, level)
    same_class = all(_overlap(*ci_a[c], *ci_b[c]) for c in ExecClass)
    if not (full.has_steady_state and other.has_steady_state):
        return same_class, None, None
    same_iter = all(
        _overlap(a.lo, a.hi, b.lo, b.hi)
        for a, b in ((full.steady_iter_num, other.steady_iter_num),
                     (full.steady_iter_s, other.steady_iter_s))
    )
    fp, op = full.steady_perf, other.steady_perf
    return same_class, same_iter, _overlap(fp.lo, fp.hi, op.lo, op.hi)


def _point(n: int, outcomes: list) -> SimilarityPoint:
    if not outcomes:
        raise SensitivityError("no pairs to compare")
    cls = [c for c, _, _ in outcomes]
    iters = [i for _, i, _ in outcomes if i is not None]
    perfs = [p for _, _, p in outcomes if p is not None]
    overall = [c and i is not False and p is not False for c, i, p in outcomes]

    def frac(xs):
        return float(np.mean(xs)) if xs else 1.0

    return SimilarityPoint(n, frac(cls), frac(iters), frac(perfs), frac(overall),
                           len(outcomes), len(iters))


def scaled_config(cfg: AnalysisConfig, n: int, full_n: int) -> AnalysisConfig:
    """Shrink window lengths in proportion to ``n / full_n`` (nearest, at least 1)."""

    def scale(v: int) -> int:
        return max(1, int(math.floor(v * n / full_n + 0.5)))

    return cfg.replace(outlier_window=scale(cfg.outlier_window),
                       outlier_ignore_prefix=scale(cfg.outlier_ignore_prefix),
                       steady_state_len=scale(cfg.steady_state_len))


def truncation_analysis(results: ResultsSet, ns: Sequence[int],
                        cfg: AnalysisConfig) -> SimilarityReport:
    lengths = {e.n_iters for e in results.executions}
    if len(lengths) != 1:
        raise SensitivityError(f"executions have differing lengths {sorted(lengths)}")
    full_n = lengths.pop()
    for n in ns:
        if not 1 <= n <= full_n:
            raise SensitivityError(f"cannot truncate {full_n} iterations to {n}")
    _, full = analyse_results(results, cfg)
    points = []
    for n in sorted(set(ns)):
        if n == full_n:
            summaries = full
        else:
            truncated = ResultsSet([e.truncated(n) for e in results.executions], results.metadata)
            _, summaries = analyse_results(truncated, scaled_config(cfg, n, full_n))
        outcomes = [compare_pair(f, s, cfg.ci_level) for f, s in zip(full, summaries)]
        points.append(_point(n, outcomes))
    return SimilarityReport("iterations", tuple(points))


def pexec_subsample_analysis(results: ResultsSet, ns: Sequence[int], n_boot_sets: int = 1000,
                             cfg: Optional[AnalysisConfig] = None) -> SimilarityReport:
    """Compare bootstrap resamples of ``n`` executions per pair with the full pair."""
    cfg = cfg or AnalysisConfig()
    groups = {}
    fulls = {}
    for key, execs in results.by_key().items():
        if len(execs) < max(ns):
            raise SensitivityError(f"{key} has {len(execs)} executions, fewer than {max(ns)}")
        groups[key] = [analyse_one(e, cfg) for e in execs]
        fulls[key] = summarize_group(groups[key], cfg)
    points = []
    for n in sorted(set(ns)):
        outcomes = []
        for key, group in groups.items():
            for b in range(n_boot_sets):
                rng = derive_rng(cfg.rng_seed, "pexec_subsample", str(key), n, b)
                pick = rng.integers(0, len(group), size=n)
                sample = [group[i] for i in pick]
                summary = summarize_group(sample, cfg, "subsample", n, b)
                outcomes.append(compare_pair(fulls[key], summary, cfg.ci_level))
        points.append(_point(n, outcomes))
    return SimilarityReport("pexecs", tuple(points))


def dependent_series(n: int, coeff: float, process: str, rng: np.random.Generator) -> np.ndarray:
    """Zero-mean Gaussian series with lag-1 dependence set by ``coeff``.

    ``ma1`` is x_t = e_t + coeff * e_{t-1}; ``ar1`` is x_t = coeff * x_{t-1} + e_t
    started from its stationary distribution.
    """
    if process == "ma1":
        e = rng.standard_normal(n + 1)
        return e[1:] + coeff * e[:-1]
    if process == "ar1":
        return ar1_noise(n, coeff, 1.0, rng)
    raise SensitivityError(f"unknown dependence process {process!r}")


def coverage_simulation(phi: float, n_sims: int, cfg: AnalysisConfig,
                        process: str = "ma1") -> float:
    """Fraction of bootstrap CIs (one segment each) covering the true mean 0.

    Simulation ``s`` draws its innovations from a stream keyed only by
    the seed and ``s``, so runs with different ``phi`` share innovations.
    """
    if not abs(phi) < 1:
        raise SensitivityError("phi must lie strictly inside (-1, 1)")
    if n_sims < 100:
        raise SensitivityError("n_sims must be at least 100")
    covered = 0
    for s in range(n_sims):
        rng = derive_rng(cfg.rng_seed, "coverage", s)
        x = dependent_series(cfg.coverage_series_len, phi, process, rng)
        covered += ci_covers(x, 0.0, cfg.bootstrap_iters, cfg.ci_level, rng)
    return covered / n_sims


def ci_covers(x: np.ndarray, truth: float, n_resamples: int, level: float,
              rng: np.random.Generator) -> bool:
    """Whether the percentile bootstrap CI of ``x``'s mean contains ``truth``.

    Gives the same answer as computing the full interval. The interval
    ends are interpolated between fixed order statistics, so once enough
    resample means lie on each side of ``truth`` (or too few can) the
    answer is settled and the remaining resamples are skipped.
    """
    tail = (1.0 - level) / 2.0
    p_lo, p_hi = tail * (n_resamples - 1), (1.0 - tail) * (n_resamples - 1)
    need_below = math.ceil(p_lo) + 1  # then the lower end is <= truth
    need_above = n_resamples - math.floor(p_hi)  # then the upper end is >= truth
    below = above = done = 0
    blocks = []
    for block in bootstrap_blocks([x], n_resamples, rng):
        blocks.append(block)
        done += len(block)
        below += int(np.count_nonzero(block <= truth))
        above += int(np.count_nonzero(block >= truth))
        if below >= need_below and above >= need_above:
            return True
        left = n_resamples - done
        if below + left <= math.floor(p_lo) or above + left <= n_resamples - 1 - math.ceil(p_hi):
            return False
    lo, hi = percentile_ci(np.concatenate(blocks), level)
    return lo <= truth <= hi
