"""Shared domain types and analysis configuration.

Iteration indices are 1-based in every public type: segment spans,
outlier sets and steady-state locations all count from 1, the way
run-sequence plots label their x axis.
"""

from __future__ import annotations

import dataclasses
import enum
import math
from dataclasses import dataclass
from functools import cached_property
from typing import Any, Mapping, Optional, Sequence

import numpy as np


class ModelError(ValueError):
    """Raised when a domain object would violate its invariants."""


@dataclass(frozen=True, order=True)
class BenchKey:
    machine: str
    vm: str
    benchmark: str

    def __post_init__(self) -> None:
        for name in ("machine", "vm", "benchmark"):
            value = getattr(self, name)
            if not isinstance(value, str) or not value:
                raise ModelError(f"BenchKey.{name} must be a non-empty string")

    def __str__(self) -> str:
        return f"{self.machine}/{self.vm}/{self.benchmark}"

    def to_dict(self) -> dict:
        return {"machine": self.machine, "vm": self.vm, "benchmark": self.benchmark}

    @classmethod
    def from_dict(cls, d: Mapping[str, Any]) -> "BenchKey":
        return cls(d["machine"], d["vm"], d["benchmark"])


def _per_core(name: str, data, n: int) -> Optional[tuple]:
    if data is None:
        return None
    cores = tuple(tuple(float(v) for v in core) for core in data)
    if not cores:
        raise ModelError(f"{name} has no cores")
    for c, core in enumerate(cores):
        if len(core) != n:
            raise ModelError(f"{name}[{c}] has length {len(core)}, expected {n}")
        for i, v in enumerate(core):
            if not math.isfinite(v) or v < 0:
                raise ModelError(f"{name}[{c}] iteration {i + 1}: invalid count {v!r}")
    return cores


@dataclass(frozen=True)
class ProcessExecution:
    """One VM process: per-iteration wall-clock times plus optional counters.

    Counter arrays are per-iteration deltas, outermost axis is the core.
    """

    key: BenchKey
    pexec_index: int
    wallclock_times: tuple
    core_cycles: Optional[tuple] = None
    aperf: Optional[tuple] = None
    mperf: Optional[tuple] = None

    def __post_init__(self) -> None:
        if not isinstance(self.pexec_index, int) or self.pexec_index < 0:
            raise ModelError(f"{self.key}: pexec_index must be a non-negative integer")
        times = tuple(float(t) for t in self.wallclock_times)
        if not times:
            raise ModelError(f"{self.key} pexec {self.pexec_index}: no iterations")
        for i, t in enumerate(times):
            if not math.isfinite(t) or t <= 0:
                raise ModelError(
                    f"{self.key} pexec {self.pexec_index} iteration {i + 1}: "
                    f"wallclock time {t!r} is not finite and positive"
                )
        object.__setattr__(self, "wallclock_times", times)
        n = len(times)
        ncores = None
        for name in ("core_cycles", "aperf", "mperf"):
            cores = _per_core(name, getattr(self, name), n)
            object.__setattr__(self, name, cores)
            if cores is not None:
                if ncores is not None and len(cores) != ncores:
                    raise ModelError(
                        f"{self.key} pexec {self.pexec_index}: {name} has "
                        f"{len(cores)} cores, expected {ncores}"
                    )
                ncores = len(cores)

    @property
    def n_iters(self) -> int:
        return len(self.wallclock_times)

    @cached_property
    def times(self) -> np.ndarray:
        arr = np.asarray(self.wallclock_times, dtype=float)
        arr.flags.writeable = False
        return arr

    def truncated(self, n: int) -> "ProcessExecution":
        """The first ``n`` iterations of this execution."""
        if not 1 <= n <= self.n_iters:
            raise ModelError(f"cannot truncate {self.n_iters} iterations to {n}")

        def cut(cores):
            return None if cores is None else tuple(core[:n] for core in cores)

        return ProcessExecution(
            self.key,
            self.pexec_index,
            self.wallclock_times[:n],
            cut(self.core_cycles),
            cut(self.aperf),
            cut(self.mperf),
        )

    def to_dict(self) -> dict:
        d: dict = {**self.key.to_dict(), "pexec_index": self.pexec_index,
                   "wallclock_times": list(self.wallclock_times)}
        for name in ("core_cycles", "aperf", "mperf"):
            cores = getattr(self, name)
            if cores is not None:
                d[name] = [list(core) for core in cores]
        return d

    @classmethod
    def from_dict(cls, d: Mapping[str, Any]) -> "ProcessExecution":
        return cls(
            BenchKey.from_dict(d),
            d["pexec_index"],
            d["wallclock_times"],
            d.get("core_cycles"),
            d.get("aperf"),
            d.get("mperf"),
        )


@dataclass(frozen=True)
class Segment:
    """Inclusive 1-based span with the mean/variance of its non-outlier values."""

    start: int
    end: int
    mean: float
    variance: float

    def __post_init__(self) -> None:
        if not 1 <= self.start <= self.end:
            raise ModelError(f"invalid segment span [{self.start}, {self.end}]")
        if not self.variance >= 0:
            raise ModelError(f"segment variance {self.variance!r} is negative")

    @property
    def length(self) -> int:
        return self.end - self.start + 1

    def to_dict(self) -> dict:
        return dataclasses.asdict(self)

    @classmethod
    def from_dict(cls, d: Mapping[str, Any]) -> "Segment":
        return cls(int(d["start"]), int(d["end"]), float(d["mean"]), float(d["variance"]))


def check_tiling(segments: Sequence[Segment], n: int) -> None:
    if not segments:
        raise ModelError("no segments")
    if segments[0].start != 1 or segments[-1].end != n:
        raise ModelError(f"segments do not cover [1, {n}]")
    for a, b in zip(segments, segments[1:]):
        if b.start != a.end + 1:
            raise ModelError(f"segments [{a.start},{a.end}] and [{b.start},{b.end}] do not tile")


class ExecClass(str, enum.Enum):
    FLAT = "flat"
    WARMUP = "warmup"
    SLOWDOWN = "slowdown"
    NO_STEADY_STATE = "no steady state"

    def __str__(self) -> str:
        return self.value


class PairKind(str, enum.Enum):
    FLAT = "flat"
    WARMUP = "warmup"
    SLOWDOWN = "slowdown"
    NO_STEADY_STATE = "no steady state"
    GOOD_INCONSISTENT = "good inconsistent"
    BAD_INCONSISTENT = "bad inconsistent"

    def __str__(self) -> str:
        return self.value


@dataclass(frozen=True)
class PairClass:
    """Pair-level classification with the per-execution class counts behind it."""

    kind: PairKind
    counts: tuple  # ((ExecClass, count), ...) in ExecClass declaration order

    def __post_init__(self) -> None:
        counts = dict(self.counts)
        full = tuple((c, int(counts.get(c, 0))) for c in ExecClass)
        if any(v < 0 for _, v in full) or sum(v for _, v in full) == 0:
            raise ModelError("pair class counts must be non-negative and non-empty")
        object.__setattr__(self, "counts", full)
        nonzero = [c for c, v in full if v]
        if self.kind not in (PairKind.GOOD_INCONSISTENT, PairKind.BAD_INCONSISTENT):
            if nonzero != [ExecClass(self.kind.value)]:
                raise ModelError(f"consistent pair {self.kind} has mixed counts {full}")

    @property
    def count_map(self) -> dict:
        return dict(self.counts)

    @property
    def total(self) -> int:
        return sum(v for _, v in self.counts)

    def label(self) -> str:
        """Human label, e.g. ``bad inconsistent (22 slowdown, 8 warmup)``."""
        if self.kind not in (PairKind.GOOD_INCONSISTENT, PairKind.BAD_INCONSISTENT):
            return str(self.kind)
        order = list(ExecClass)
        parts = sorted(((c, v) for c, v in self.counts if v),
                       key=lambda cv: (-cv[1], order.index(cv[0])))
        return f"{self.kind} (" + ", ".join(f"{v} {c}" for c, v in parts) + ")"

    def to_dict(self) -> dict:
        return {"kind": self.kind.value, "counts": {c.value: v for c, v in self.counts}}

    @classmethod
    def from_dict(cls, d: Mapping[str, Any]) -> "PairClass":
        return cls(PairKind(d["kind"]),
                   tuple((ExecClass(k), int(v)) for k, v in d["counts"].items()))


@dataclass(frozen=True)
class ClassifiedExecution:
    execution: ProcessExecution
    outliers: tuple
    segments: tuple
    classification: ExecClass
    steady_start_iter: Optional[int] = None
    steady_elapsed_s: Optional[float] = None
    steady_segment_range: Optional[int] = None

    def __post_init__(self) -> None:
        n = self.execution.n_iters
        object.__setattr__(self, "outliers", tuple(sorted(int(i) for i in self.outliers)))
        object.__setattr__(self, "segments", tuple(self.segments))
        check_tiling(self.segments, n)
        if self.outliers and not (1 <= self.outliers[0] and self.outliers[-1] <= n):
            raise ModelError("outlier index out of range")
        steady = (self.steady_start_iter, self.steady_elapsed_s, self.steady_segment_range)
        if self.classification is ExecClass.NO_STEADY_STATE:
            if any(v is not None for v in steady):
                raise ModelError("no-steady-state execution cannot carry a steady state")
        else:
            if any(v is None for v in steady):
                raise ModelError(f"{self.classification} execution needs a steady state")
            if self.classification is ExecClass.FLAT and (
                self.steady_start_iter != 1 or self.steady_elapsed_s != 0
            ):
                raise ModelError("flat execution must reach steady state at iteration 1")

    @property
    def key(self) -> BenchKey:
        return self.execution.key

    @property
    def has_steady_state(self) -> bool:
        return self.classification is not ExecClass.NO_STEADY_STATE

    def steady_segments(self) -> tuple:
        if not self.has_steady_state:
            return ()
        return self.segments[self.steady_segment_range:]

    def steady_values(self) -> list:
        """Non-outlier times of each steady-state segment, one array per segment."""
        times = self.execution.times
        outliers = set(self.outliers)
        out = []
        for seg in self.steady_segments():
            idx = [i - 1 for i in range(seg.start, seg.end + 1) if i not in outliers]
            out.append(times[idx])
        return out

    def to_dict(self) -> dict:
        """Summary form: everything except the raw timings."""
        return {
            **self.key.to_dict(),
            "pexec_index": self.execution.pexec_index,
            "n_iters": self.execution.n_iters,
            "classification": self.classification.value,
            "outliers": list(self.outliers),
            "n_outliers": len(self.outliers),
            "segments": [s.to_dict() for s in self.segments],
            "steady_start_iter": self.steady_start_iter,
            "steady_elapsed_s": self.steady_elapsed_s,
            "steady_segment_range": self.steady_segment_range,
        }

    @classmethod
    def from_dict(cls, d: Mapping[str, Any], execution: ProcessExecution) -> "ClassifiedExecution":
        return cls(
            execution,
            tuple(d["outliers"]),
            tuple(Segment.from_dict(s) for s in d["segments"]),
            ExecClass(d["classification"]),
            d.get("steady_start_iter"),
            d.get("steady_elapsed_s"),
            d.get("steady_segment_range"),
        )


@dataclass(frozen=True)
class AnalysisConfig:
    outlier_window: int = 200
    outlier_multiplier: float = 3.0
    outlier_ignore_prefix: int = 200
    delta_s: float = 0.001
    steady_state_len: int = 500
    penalty_coeff: float = 15.0
    min_segment_len: int = 2
    bootstrap_iters: int = 100_000
    ci_level: float = 0.99
    iqr_percentiles: tuple = (0.05, 0.95)
    aperf_ratio_tolerance: float = 0.03
    idle_core_divisor: float = 1000.0
    georges_cov_threshold: float = 0.01
    georges_window: int = 30
    coverage_series_len: int = 2000
    rng_seed: int = 0

    def __post_init__(self) -> None:
        object.__setattr__(self, "iqr_percentiles", tuple(float(q) for q in self.iqr_percentiles))
        for name in ("outlier_window", "steady_state_len", "min_segment_len",
                     "bootstrap_iters", "georges_window", "coverage_series_len"):
            v = getattr(self, name)
            if not isinstance(v, int) or v < 1:
                raise ModelError(f"{name} must be a positive integer, got {v!r}")
        if not isinstance(self.outlier_ignore_prefix, int) or self.outlier_ignore_prefix < 0:
            raise ModelError("outlier_ignore_prefix must be a non-negative integer")
        for name in ("outlier_multiplier", "penalty_coeff", "aperf_ratio_tolerance",
                     "idle_core_divisor", "georges_cov_threshold"):
            if not getattr(self, name) >= 0:
                raise ModelError(f"{name} must be non-negative")
        if not self.delta_s > 0:
            raise ModelError("delta_s must be positive")
        if not 0 < self.ci_level < 1:
            raise ModelError("ci_level must lie in (0, 1)")
        lo, hi = self.iqr_percentiles if len(self.iqr_percentiles) == 2 else (None, None)
        if lo is None or not 0 < lo < hi < 1:
            raise ModelError("iqr_percentiles must be an ordered pair inside (0, 1)")
        if not isinstance(self.rng_seed, int) or not 0 <= self.rng_seed < 2**64:
            raise ModelError("rng_seed must be a 64-bit unsigned integer")

    def replace(self, **changes) -> "AnalysisConfig":
        return dataclasses.replace(self, **changes)

    def to_dict(self) -> dict:
        d = dataclasses.asdict(self)
        d["iqr_percentiles"] = list(self.iqr_percentiles)
        return d

    @classmethod
    def from_dict(cls, d: Mapping[str, Any], base: Optional["AnalysisConfig"] = None) -> "AnalysisConfig":
        base = base or cls()
        known = {f.name for f in dataclasses.fields(cls)}
        unknown = set(d) - known
        if unknown:
            raise ModelError(f"unknown config keys: {sorted(unknown)}")
        return dataclasses.replace(base, **d)


def default_config() -> AnalysisConfig:
    return AnalysisConfig()
