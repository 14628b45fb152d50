"""Reading and writing measurement files, plus the APERF/MPERF sanity check."""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Mapping, Optional, Sequence

import numpy as np

from .model import AnalysisConfig, BenchKey, ModelError, ProcessExecution


class ParseError(ValueError):
    """The input file is not well-formed. The message carries the location."""


class ValidationError(ValueError):
    """The input is well-formed but violates a data invariant."""


class CountersAbsent(ValueError):
    pass


@dataclass(frozen=True)
class ResultsSet:
    executions: tuple
    metadata: Mapping[str, str] = field(default_factory=dict)

    def __post_init__(self) -> None:
        object.__setattr__(self, "executions", tuple(self.executions))
        object.__setattr__(self, "metadata", dict(self.metadata))
        seen = set()
        for e in self.executions:
            ident = (e.key, e.pexec_index)
            if ident in seen:
                raise ValidationError(f"{e.key}: duplicate pexec_index {e.pexec_index}")
            seen.add(ident)

    def keys(self) -> list:
        return sorted({e.key for e in self.executions})

    def by_key(self) -> dict:
        groups: dict = {}
        for e in self.executions:
            groups.setdefault(e.key, []).append(e)
        return {k: sorted(groups[k], key=lambda e: e.pexec_index) for k in sorted(groups)}

    @property
    def base_freq_hz(self) -> Optional[int]:
        v = self.metadata.get("base_freq_hz")
        return None if v is None else int(v)

    @property
    def has_counters(self) -> bool:
        return any(e.aperf is not None and e.mperf is not None for e in self.executions)

    def to_dict(self) -> dict:
        return {
            "metadata": dict(self.metadata),
            "executions": [e.to_dict() for e in self.executions],
        }


@dataclass(frozen=True)
class FreqViolation:
    key: BenchKey
    pexec_index: int
    iteration: int
    core: int
    ratio: float

    def __str__(self) -> str:
        return (f"{self.key} pexec {self.pexec_index} iteration {self.iteration} "
                f"core {self.core}: APERF/MPERF ratio {self.ratio:.4f}")


_REQUIRED = ("machine", "vm", "benchmark", "pexec_index", "wallclock_times")
_OPTIONAL = ("core_cycles", "aperf", "mperf")


def _check_numbers(where: str, arr, depth: int) -> None:
    if not isinstance(arr, list):
        raise ParseError(f"{where}: expected an array")
    for i, v in enumerate(arr):
        if depth > 1:
            _check_numbers(f"{where}[{i}]", v, depth - 1)
        elif isinstance(v, bool) or not isinstance(v, (int, float)):
            raise ParseError(f"{where}[{i}]: expected a number, got {v!r}")


def results_from_dict(doc, source: str = "<input>") -> ResultsSet:
    if not isinstance(doc, dict):
        raise ParseError(f"{source}: top level must be an object")
    for k in ("metadata", "executions"):
        if k not in doc:
            raise ParseError(f"{source}: missing top-level field {k!r}")
    meta = doc["metadata"]
    if not isinstance(meta, dict) or not all(isinstance(v, str) for v in meta.values()):
        raise ParseError(f"{source}: metadata must be a string-to-string map")
    if not isinstance(doc["executions"], list):
        raise ParseError(f"{source}: executions must be an array")

    executions = []
    for n, raw in enumerate(doc["executions"]):
        where = f"{source}: executions[{n}]"
        if not isinstance(raw, dict):
            raise ParseError(f"{where}: expected an object")
        for k in _REQUIRED:
            if k not in raw:
                raise ParseError(f"{where}: missing field {k!r}")
        extra = set(raw) - set(_REQUIRED) - set(_OPTIONAL)
        if extra:
            raise ParseError(f"{where}: unknown fields {sorted(extra)}")
        for k in ("machine", "vm", "benchmark"):
            if not isinstance(raw[k], str):
                raise ParseError(f"{where}.{k}: expected a string")
        if isinstance(raw["pexec_index"], bool) or not isinstance(raw["pexec_index"], int):
            raise ParseError(f"{where}.pexec_index: expected an integer")
        _check_numbers(f"{where}.wallclock_times", raw["wallclock_times"], 1)
        for k in _OPTIONAL:
            if k in raw:
                _check_numbers(f"{where}.{k}", raw[k], 2)
        try:
            executions.append(ProcessExecution.from_dict(raw))
        except ModelError as exc:
            raise ValidationError(f"{where}: {exc}") from None

    results = ResultsSet(executions, meta)
    if results.has_counters:
        bf = meta.get("base_freq_hz")
        if bf is None:
            raise ValidationError(f"{source}: counters present but metadata lacks base_freq_hz")
        try:
            ok = int(bf) > 0
        except ValueError:
            ok = False
        if not ok:
            raise ValidationError(f"{source}: base_freq_hz must be a positive integer, got {bf!r}")
    return results


def parse_results(path) -> ResultsSet:
    path = Path(path)
    text = path.read_text(encoding="utf-8")
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError(f"{path}:{exc.lineno}:{exc.colno}: {exc.msg}") from None
    return results_from_dict(doc, str(path))


def write_results(results: ResultsSet, path) -> None:
    Path(path).write_text(json.dumps(results.to_dict()), encoding="utf-8")


def check_aperf_mperf(
    execution: ProcessExecution,
    base_freq_hz: int,
    wallclock_times: Optional[Sequence[float]] = None,
    cfg: Optional[AnalysisConfig] = None,
) -> list:
    """Report every (iteration, active core) whose APERF/MPERF ratio is unsafe.

    A core counts as idle in an iteration when its APERF rate, normalised
    by that iteration's wall-clock time, is at most ``base_freq_hz /
    idle_core_divisor``; idle cores are not checked. Ratios on the
    tolerance boundary are safe.
    """
    cfg = cfg or AnalysisConfig()
    if execution.aperf is None or execution.mperf is None:
        raise CountersAbsent(f"{execution.key} pexec {execution.pexec_index}: counters absent")
    times = execution.times if wallclock_times is None else np.asarray(wallclock_times, float)
    aperf = np.asarray(execution.aperf, dtype=float)
    mperf = np.asarray(execution.mperf, dtype=float)
    idle_rate = base_freq_hz / cfg.idle_core_divisor

    violations = []
    active = aperf / times[np.newaxis, :] > idle_rate
    with np.errstate(divide="ignore", invalid="ignore"):
        ratio = np.where(mperf > 0, aperf / mperf, math.inf)
    # the epsilon keeps 1 - tol itself inside despite rounding
    bad = active & (np.abs(ratio - 1.0) > cfg.aperf_ratio_tolerance + 1e-12)
    for core, it in zip(*np.nonzero(bad)):
        violations.append(FreqViolation(execution.key, execution.pexec_index,
                                        int(it) + 1, int(core), float(ratio[core, it])))
    violations.sort(key=lambda v: (v.iteration, v.core))
    return violations
