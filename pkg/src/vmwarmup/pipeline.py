"""Run outliers -> changepoints -> classification -> summaries over a results set."""

from __future__ import annotations

from typing import Sequence

from .changepoint import analyse_execution
from .classify import classify_execution, steady_elapsed, steady_state_start
from .ingest import ResultsSet
from .model import AnalysisConfig, ClassifiedExecution, ProcessExecution
from .summarize import derive_rng, summarize_pair


class PipelineError(RuntimeError):
    """A stage failed; the message names the stage and the execution."""


def analyse_one(execution: ProcessExecution, cfg: AnalysisConfig) -> ClassifiedExecution:
    where = f"{execution.key} pexec {execution.pexec_index}"
    try:
        outliers, segments = analyse_execution(execution.times, cfg)
    except ValueError as exc:
        raise PipelineError(f"changepoint: {where}: {exc}") from exc
    try:
        cls = classify_execution(segments, execution.n_iters, cfg)
        start = steady_state_start(segments, cls, cfg)
    except ValueError as exc:
        raise PipelineError(f"classify: {where}: {exc}") from exc
    if start is None:
        return ClassifiedExecution(execution, tuple(outliers), tuple(segments), cls)
    seg_idx, it = start
    elapsed = steady_elapsed(execution.wallclock_times, it)
    return ClassifiedExecution(execution, tuple(outliers), tuple(segments), cls,
                               it, elapsed, seg_idx)


def analyse_results(results: ResultsSet, cfg: AnalysisConfig) -> tuple:
    """Returns ``(classified executions, pair summaries)`` in key order."""
    classified = []
    summaries = []
    for key, execs in results.by_key().items():
        group = [analyse_one(e, cfg) for e in execs]
        classified.extend(group)
        summaries.append(summarize_group(group, cfg))
    return classified, summaries


def summarize_group(group: Sequence[ClassifiedExecution], cfg: AnalysisConfig, *labels):
    key = group[0].key
    try:
        return summarize_pair(key, group, cfg,
                              derive_rng(cfg.rng_seed, "steady_perf", str(key), *labels))
    except ValueError as exc:
        raise PipelineError(f"summarize: {key}: {exc}") from exc
