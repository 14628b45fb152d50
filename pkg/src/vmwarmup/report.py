"""Analysis reports: JSON documents and the tables derived from them."""

from __future__ import annotations

import json
from collections import Counter
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional, Sequence

from .ingest import ResultsSet
from .model import AnalysisConfig, ExecClass, PairKind
from .pipeline import analyse_results
from .summarize import PairSummary

SCHEMA_VERSION = 1
ELIDED = "—"


def machine_rollup(per_execution: Sequence, per_pair: Sequence[PairSummary]) -> dict:
    """Per-machine percentages of execution classes and pair classes."""
    machines = sorted({p.key.machine for p in per_pair} | {e.key.machine for e in per_execution})
    out = {}
    for m in machines:
        pairs = Counter(p.classification.kind for p in per_pair if p.key.machine == m)
        execs = Counter(e.classification for e in per_execution if e.key.machine == m)
        n_pairs, n_execs = sum(pairs.values()), sum(execs.values())
        out[m] = {
            "n_pairs": n_pairs,
            "n_executions": n_execs,
            "pairs": {k.value: 100.0 * pairs[k] / n_pairs if n_pairs else 0.0 for k in PairKind},
            "executions": {c.value: 100.0 * execs[c] / n_execs if n_execs else 0.0
                           for c in ExecClass},
        }
    return out


@dataclass
class AnalysisReport:
    config: AnalysisConfig
    per_execution: list
    per_pair: list
    input_path: Optional[str] = None
    machine_rollup: dict = field(default_factory=dict)

    def __post_init__(self) -> None:
        if not self.machine_rollup:
            self.machine_rollup = machine_rollup(self.per_execution, self.per_pair)

    @property
    def outlier_fraction(self) -> float:
        total = sum(ce.execution.n_iters for ce in self.per_execution)
        return sum(len(ce.outliers) for ce in self.per_execution) / total if total else 0.0

    def to_dict(self) -> dict:
        return {
            "schema_version": SCHEMA_VERSION,
            "input_path": self.input_path,
            "config": self.config.to_dict(),
            "outlier_fraction": self.outlier_fraction,
            "per_execution": [ce.to_dict() for ce in self.per_execution],
            "per_pair": [p.to_dict() for p in self.per_pair],
            "machine_rollup": self.machine_rollup,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=1, sort_keys=True) + "\n"


def build_report(results: ResultsSet, cfg: AnalysisConfig,
                 input_path: Optional[str] = None) -> AnalysisReport:
    classified, summaries = analyse_results(results, cfg)
    return AnalysisReport(cfg, classified, summaries, input_path)


class ReportError(ValueError):
    pass


def read_report(path) -> dict:
    doc = json.loads(Path(path).read_text(encoding="utf-8"))
    if doc.get("schema_version") != SCHEMA_VERSION:
        raise ReportError(f"{path}: unsupported report schema {doc.get('schema_version')!r}")
    return doc


def pair_summaries(doc: dict) -> list:
    return [PairSummary.from_dict(p) for p in doc["per_pair"]]


def _iqr_cell(stat, digits: int) -> str:
    return f"{stat.median:.{digits}f} ({stat.lo:.{digits}f}, {stat.hi:.{digits}f})"


def table_rows(summaries: Sequence[PairSummary], precision: int = 5) -> list:
    rows = []
    for p in sorted(summaries, key=lambda p: p.key):
        if p.has_steady_state:
            if p.classification.kind is PairKind.FLAT:
                it_num = it_s = ELIDED
            else:
                it_num = _iqr_cell(p.steady_iter_num, 1)
                it_s = _iqr_cell(p.steady_iter_s, 3)
            ci = p.steady_perf
            perf = f"{ci.mean:.{precision}f} [{ci.lo:.{precision}f}, {ci.hi:.{precision}f}]"
        else:
            it_num = it_s = perf = ""
        rows.append([p.key.machine, p.key.vm, p.key.benchmark,
                     p.classification.label(), it_num, it_s, perf])
    return rows


HEADERS = ["Machine", "VM", "Benchmark", "Class.", "Steady iter (#)",
           "Steady iter (s)", "Steady perf (s)"]


def render_markdown(summaries: Sequence[PairSummary], precision: int = 5) -> str:
    lines = ["| " + " | ".join(HEADERS) + " |", "|" + "---|" * len(HEADERS)]
    for row in table_rows(summaries, precision):
        lines.append("| " + " | ".join(row) + " |")
    return "\n".join(lines) + "\n"


_LATEX_ESCAPES = {"\\": r"\textbackslash{}", "&": r"\&", "%": r"\%", "$": r"\$",
                  "#": r"\#", "_": r"\_", "{": r"\{", "}": r"\}", ELIDED: "---"}


def _latex(s: str) -> str:
    return "".join(_LATEX_ESCAPES.get(ch, ch) for ch in s)


def render_latex(summaries: Sequence[PairSummary], precision: int = 5) -> str:
    lines = [r"\begin{tabular}{lllllll}", r"\toprule",
             " & ".join(_latex(h) for h in HEADERS) + r" \\", r"\midrule"]
    for row in table_rows(summaries, precision):
        lines.append(" & ".join(_latex(c) for c in row) + r" \\")
    lines += [r"\bottomrule", r"\end{tabular}"]
    return "\n".join(lines) + "\n"
