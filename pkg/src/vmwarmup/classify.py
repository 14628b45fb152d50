"""Per-execution and per-pair warmup classification."""

from __future__ import annotations

from collections import Counter
from typing import Optional, Sequence

from .model import AnalysisConfig, ExecClass, ModelError, PairClass, PairKind, Segment


def _bounds(final: Segment, delta_s: float) -> tuple:
    tol = max(final.variance, delta_s)
    return final.mean - tol, final.mean + tol


def segments_equivalent(s: Segment, final: Segment, delta_s: float) -> bool:
    # variance is deliberately read as seconds here, not seconds squared
    lower, upper = _bounds(final, delta_s)
    return s.mean + s.variance >= lower and s.mean - s.variance <= upper


def classify_execution(segments: Sequence[Segment], total_iters: int,
                       cfg: AnalysisConfig) -> ExecClass:
    """Classify one execution from its changepoint segments.

    Walks backwards from the penultimate segment. A segment that is not
    equivalent to the final one gives "no steady state" if it reaches into
    the last ``steady_state_len`` iterations, "slowdown" if it was faster,
    and otherwise marks the execution as warmup while the walk continues.
    """
    if not segments:
        raise ModelError("cannot classify an execution with no segments")
    final = segments[-1]
    lower, upper = _bounds(final, cfg.delta_s)
    cls = ExecClass.FLAT
    for seg in reversed(segments[:-1]):
        if segments_equivalent(seg, final, cfg.delta_s):
            continue
        if seg.end > total_iters - cfg.steady_state_len:
            return ExecClass.NO_STEADY_STATE
        if seg.mean < lower:
            return ExecClass.SLOWDOWN
        cls = ExecClass.WARMUP
    return cls


def steady_state_start(segments: Sequence[Segment], classification: ExecClass,
                       cfg: AnalysisConfig) -> Optional[tuple]:
    """``(segment index, iteration)`` where the steady state begins.

    The steady state is the longest suffix of segments all equivalent to
    the final one; an equivalent segment earlier than a non-equivalent one
    does not join it.
    """
    if classification is ExecClass.NO_STEADY_STATE or not segments:
        return None
    if classification is ExecClass.FLAT:
        return 0, 1
    final = segments[-1]
    j = len(segments) - 1
    while j > 0 and segments_equivalent(segments[j - 1], final, cfg.delta_s):
        j -= 1
    return j, segments[j].start


def steady_elapsed(times: Sequence[float], steady_start_iter: int) -> float:
    """Wall-clock seconds spent before ``steady_start_iter``, outliers included."""
    if not 1 <= steady_start_iter <= len(times) + 1:
        raise ValueError(f"steady start {steady_start_iter} outside [1, {len(times) + 1}]")
    return float(sum(times[: steady_start_iter - 1]))


_GOOD = {ExecClass.FLAT, ExecClass.WARMUP}


def classify_pair(classes: Sequence[ExecClass]) -> PairClass:
    if not classes:
        raise ModelError("cannot classify an empty pair")
    counts = Counter(classes)
    if len(counts) == 1:
        kind = PairKind(next(iter(counts)).value)
    elif set(counts) <= _GOOD:
        kind = PairKind.GOOD_INCONSISTENT
    else:
        kind = PairKind.BAD_INCONSISTENT
    return PairClass(kind, tuple(counts.items()))
