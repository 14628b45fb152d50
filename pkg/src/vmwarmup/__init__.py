"""Automated warmup analysis of VM benchmark run sequences."""

from .changepoint import analyse_execution, exact_segmentation, pelt_meanvar, segment_cost
from .classify import (classify_execution, classify_pair, segments_equivalent,
                       steady_elapsed, steady_state_start)
from .ingest import ResultsSet, check_aperf_mperf, parse_results, write_results
from .model import (AnalysisConfig, BenchKey, ClassifiedExecution, ExecClass, PairClass,
                    PairKind, ProcessExecution, Segment, default_config)
from .outliers import detect_outliers
from .pipeline import analyse_one, analyse_results
from .report import AnalysisReport, build_report
from .summarize import (IqrStat, MeanCi, PairSummary, georges_steady, multinomial_ci,
                        percentile, steady_iter_stats, steady_perf)

__version__ = "0.1.0"
