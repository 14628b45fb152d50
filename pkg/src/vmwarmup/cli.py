"""Command-line interface.

Exit status: 0 success, 1 validation failure or frequency violations,
2 usage error, 3 internal/pipeline error.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path
from typing import Optional, Sequence

from .ingest import CountersAbsent, ParseError, ValidationError, check_aperf_mperf, parse_results, write_results
from .model import AnalysisConfig, BenchKey, ClassifiedExecution, ModelError
from .pipeline import PipelineError
from .plot import run_sequence_svg, similarity_svg
from .report import ReportError, build_report, pair_summaries, read_report, render_latex, render_markdown
from .sensitivity import (PATTERNS, SensitivityError, SynthSpec, coverage_simulation,
                          pexec_subsample_analysis, synth_results, truncation_analysis)

log = logging.getLogger("vmwarmup")

EXIT_OK, EXIT_INVALID, EXIT_USAGE, EXIT_INTERNAL = 0, 1, 2, 3


class UsageError(Exception):
    pass


def _emit(text: str, out: Optional[str]) -> None:
    if out:
        Path(out).write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)


def load_config(args) -> AnalysisConfig:
    cfg = AnalysisConfig()
    if args.config:
        cfg = AnalysisConfig.from_dict(json.loads(Path(args.config).read_text()), cfg)
    overrides = {}
    for item in args.set or ():
        k, sep, v = item.partition("=")
        if not sep:
            raise UsageError(f"--set expects KEY=VALUE, got {item!r}")
        try:
            overrides[k] = json.loads(v)
        except json.JSONDecodeError:
            overrides[k] = v
    if args.seed is not None:
        overrides["rng_seed"] = args.seed
    return AnalysisConfig.from_dict(overrides, cfg) if overrides else cfg


def parse_ns(text: str) -> list:
    """``10,20,30`` or ``start:stop:step`` (stop inclusive)."""
    out = []
    for part in text.split(","):
        if ":" in part:
            bits = [int(b) for b in part.split(":")]
            if len(bits) not in (2, 3):
                raise UsageError(f"bad range {part!r}")
            step = bits[2] if len(bits) == 3 else 1
            out.extend(range(bits[0], bits[1] + 1, step))
        elif part.strip():
            out.append(int(part))
    if not out:
        raise UsageError("no values given for --ns")
    return out


def cmd_analyze(args) -> int:
    cfg = load_config(args)
    results = parse_results(args.input)
    report = build_report(results, cfg, input_path=str(args.input))
    _emit(report.to_json(), args.out)
    log.info("analysed %d executions in %d pairs", len(report.per_execution), len(report.per_pair))
    return EXIT_OK


def _select(doc: dict, key: BenchKey, pexec: int) -> dict:
    for rec in doc["per_execution"]:
        if BenchKey.from_dict(rec) == key and rec["pexec_index"] == pexec:
            return rec
    available = sorted({(r["machine"], r["vm"], r["benchmark"], r["pexec_index"])
                        for r in doc["per_execution"]})
    listing = "\n".join(f"  {m} {v} {b} pexec {p}" for m, v, b, p in available)
    raise UsageError(f"no execution {key} pexec {pexec} in report; available:\n{listing}")


def cmd_plot(args) -> int:
    doc = read_report(args.report)
    key = BenchKey(args.machine, args.vm, args.benchmark)
    rec = _select(doc, key, args.pexec)
    data = args.data or doc.get("input_path")
    if not data:
        raise UsageError("raw data unavailable: pass --data")
    results = parse_results(data)
    raw = next((e for e in results.executions if e.key == key and e.pexec_index == args.pexec), None)
    if raw is None:
        raise UsageError(f"{key} pexec {args.pexec} missing from {data}")
    ce = ClassifiedExecution.from_dict(rec, raw)
    delta = doc["config"]["delta_s"]
    _emit(run_sequence_svg(ce, delta, args.inset), args.out)
    return EXIT_OK


def cmd_table(args) -> int:
    summaries = pair_summaries(read_report(args.report))
    render = render_latex if args.format == "latex" else render_markdown
    _emit(render(summaries, args.precision), args.out)
    return EXIT_OK


def cmd_validate(args) -> int:
    cfg = load_config(args)
    results = parse_results(args.input)
    if not results.has_counters:
        _emit("no counters; skipped\n", args.out)
        return EXIT_OK
    lines = []
    count = 0
    for e in results.executions:
        try:
            found = check_aperf_mperf(e, results.base_freq_hz, None, cfg)
        except CountersAbsent:
            lines.append(f"{e.key} pexec {e.pexec_index}: counters absent; skipped")
            continue
        count += len(found)
        lines.extend(str(v) for v in found)
    lines.append(f"{count} violations")
    _emit("\n".join(lines) + "\n", args.out)
    return EXIT_OK if count == 0 else EXIT_INVALID


def cmd_sensitivity(args) -> int:
    cfg = load_config(args)
    results = parse_results(args.input)
    ns = parse_ns(args.ns)
    if args.axis == "iterations":
        rep = truncation_analysis(results, ns, cfg)
    else:
        rep = pexec_subsample_analysis(results, ns, args.boot_sets, cfg)
    _emit(json.dumps(rep.to_dict(), indent=1, sort_keys=True) + "\n", args.out)
    if args.plot:
        Path(args.plot).write_text(similarity_svg(rep), encoding="utf-8")
    return EXIT_OK


def cmd_simulate(args) -> int:
    cfg = load_config(args)
    cov = coverage_simulation(args.phi, args.sims, cfg, args.process)
    doc = {"phi": args.phi, "process": args.process, "n_sims": args.sims,
           "ci_level": cfg.ci_level, "bootstrap_iters": cfg.bootstrap_iters,
           "series_len": cfg.coverage_series_len, "rng_seed": cfg.rng_seed, "coverage": cov}
    _emit(json.dumps(doc, indent=1, sort_keys=True) + "\n", args.out)
    return EXIT_OK


def cmd_synth(args) -> int:
    cfg = load_config(args)
    specs = [SynthSpec(pattern=p, n_iters=args.iters, base_time_s=args.base,
                       step_magnitude_s=args.step, step_at=args.step_at, noise_sd_s=args.noise,
                       outlier_rate=args.outlier_rate, ar1_phi=args.phi,
                       seed=cfg.rng_seed + 1000 * k)
             for k, p in enumerate(args.pattern or ["warmup"])]
    results = synth_results(specs, args.pexecs, args.machine, args.vm, cfg)
    if args.out:
        write_results(results, args.out)
    else:
        sys.stdout.write(json.dumps(results.to_dict()) + "\n")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="JSON file of AnalysisConfig overrides")
    common.add_argument("--set", action="append", metavar="KEY=VALUE",
                        help="override one config field (repeatable)")
    common.add_argument("--seed", type=int, help="RNG seed (sets rng_seed)")
    common.add_argument("--out", help="output path (default: stdout)")
    common.add_argument("-v", "--verbose", action="store_true")

    parser = argparse.ArgumentParser(prog="vmwarmup",
                                     description="Warmup and steady-state analysis of VM benchmark data.")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("analyze", parents=[common], help="classify executions and pairs")
    p.add_argument("input")
    p.set_defaults(func=cmd_analyze)

    p = sub.add_parser("plot", parents=[common], help="run-sequence plot of one execution (SVG)")
    p.add_argument("report")
    p.add_argument("--machine", required=True)
    p.add_argument("--vm", required=True)
    p.add_argument("--benchmark", required=True)
    p.add_argument("--pexec", type=int, required=True)
    p.add_argument("--data", help="raw input file (default: the report's input_path)")
    p.add_argument("--inset", type=int, default=50, help="iterations shown in the inset")
    p.set_defaults(func=cmd_plot)

    p = sub.add_parser("table", parents=[common], help="render a pair-level results table")
    p.add_argument("report")
    p.add_argument("--format", choices=("markdown", "latex"), default="markdown")
    p.add_argument("--precision", type=int, default=5)
    p.set_defaults(func=cmd_table)

    p = sub.add_parser("validate", parents=[common], help="APERF/MPERF frequency checks")
    p.add_argument("input")
    p.set_defaults(func=cmd_validate)

    p = sub.add_parser("sensitivity", parents=[common], help="truncation / subsampling similarity")
    p.add_argument("input")
    p.add_argument("--axis", choices=("iterations", "pexecs"), required=True)
    p.add_argument("--ns", required=True, help="e.g. 10:1990:10 or 2,5,10")
    p.add_argument("--boot-sets", type=int, default=1000)
    p.add_argument("--plot", help="also write an SVG of the similarity curves")
    p.set_defaults(func=cmd_sensitivity)

    p = sub.add_parser("simulate", parents=[common], help="bootstrap CI coverage simulation")
    p.add_argument("--phi", type=float, required=True)
    p.add_argument("--sims", type=int, default=1000)
    p.add_argument("--process", choices=("ma1", "ar1"), default="ma1")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("synth", parents=[common], help="emit a synthetic input file")
    p.add_argument("--pattern", action="append", choices=PATTERNS)
    p.add_argument("--pexecs", type=int, default=30)
    p.add_argument("--iters", type=int, default=2000)
    p.add_argument("--base", type=float, default=0.1)
    p.add_argument("--step", type=float, default=0.05)
    p.add_argument("--step-at", type=int, default=100)
    p.add_argument("--noise", type=float, default=1e-4)
    p.add_argument("--outlier-rate", type=float, default=0.0)
    p.add_argument("--phi", type=float, default=0.0)
    p.add_argument("--machine", default="synth")
    p.add_argument("--vm", default="synthvm")
    p.set_defaults(func=cmd_synth)
    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(name)s: %(message)s")
    try:
        return args.func(args)
    except UsageError as exc:
        print(f"vmwarmup: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (ParseError, ValidationError, ModelError, ReportError, SensitivityError,
            FileNotFoundError, json.JSONDecodeError) as exc:
        print(f"vmwarmup: {exc}", file=sys.stderr)
        return EXIT_INVALID
    except PipelineError as exc:
        print(f"vmwarmup: {exc}", file=sys.stderr)
        return EXIT_INTERNAL
    except Exception as exc:  # noqa: BLE001
        print(f"vmwarmup: internal error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_INTERNAL


if __name__ == "__main__":
    sys.exit(main())
