"""Hand-written SVG plots: run-sequence plots and similarity curves.

Run-sequence plots draw each panel in its own ``<g>`` with an id
(``zoom``, ``main``, ``inset``, ``core-N``). Changepoints, segment means
and outliers carry classes of the same names so they can be counted.
"""

from __future__ import annotations

from typing import Optional
from xml.sax.saxutils import escape

import numpy as np

from .classify import segments_equivalent
from .model import ClassifiedExecution
from .sensitivity import SimilarityReport
from .summarize import percentile

WIDTH = 900
MARGIN_L, MARGIN_R = 70, 20
RED = "#d62728"


def _fmt(v: float) -> str:
    return f"{v:.2f}".rstrip("0").rstrip(".")


def _ticks(lo: float, hi: float, n: int = 5) -> list:
    if hi <= lo:
        return [lo]
    return [lo + (hi - lo) * k / (n - 1) for k in range(n)]


def _label(v: float) -> str:
    return f"{v:.4g}"


class _Panel:
    def __init__(self, pid: str, x0: float, y0: float, w: float, h: float,
                 xr: tuple, yr: tuple):
        self.pid, self.x0, self.y0, self.w, self.h = pid, x0, y0, w, h
        self.xlo, self.xhi = xr
        ylo, yhi = yr
        if yhi <= ylo:
            pad = abs(ylo) * 0.01 or 1e-9
            ylo, yhi = ylo - pad, yhi + pad
        self.ylo, self.yhi = ylo, yhi
        self.parts: list = []

    def sx(self, x: float) -> float:
        span = (self.xhi - self.xlo) or 1.0
        return self.x0 + (x - self.xlo) / span * self.w

    def sy(self, y: float) -> float:
        return self.y0 + self.h - (y - self.ylo) / (self.yhi - self.ylo) * self.h

    def axes(self, xlabel: Optional[str], ylabel: Optional[str], font: int = 11) -> None:
        p = self.parts
        p.append(f'<rect x="{_fmt(self.x0)}" y="{_fmt(self.y0)}" width="{_fmt(self.w)}" '
                 f'height="{_fmt(self.h)}" fill="white" stroke="black"/>')
        for t in _ticks(self.ylo, self.yhi):
            y = self.sy(t)
            p.append(f'<text x="{_fmt(self.x0 - 4)}" y="{_fmt(y + 3)}" font-size="{font - 2}" '
                     f'text-anchor="end">{_label(t)}</text>')
        for t in _ticks(self.xlo, self.xhi):
            x = self.sx(t)
            p.append(f'<text x="{_fmt(x)}" y="{_fmt(self.y0 + self.h + font + 2)}" '
                     f'font-size="{font - 2}" text-anchor="middle">{int(round(t))}</text>')
        if xlabel:
            p.append(f'<text x="{_fmt(self.x0 + self.w / 2)}" y="{_fmt(self.y0 + self.h + 2 * font + 6)}" '
                     f'font-size="{font}" text-anchor="middle">{escape(xlabel)}</text>')
        if ylabel:
            cx, cy = self.x0 - 55, self.y0 + self.h / 2
            p.append(f'<text x="{_fmt(cx)}" y="{_fmt(cy)}" font-size="{font}" text-anchor="middle" '
                     f'transform="rotate(-90 {_fmt(cx)} {_fmt(cy)})">{escape(ylabel)}</text>')

    def svg(self) -> str:
        clip = f"clip-{self.pid}"
        return (f'<g id="{self.pid}" class="panel">'
                f'<clipPath id="{clip}"><rect x="{_fmt(self.x0)}" y="{_fmt(self.y0)}" '
                f'width="{_fmt(self.w)}" height="{_fmt(self.h)}"/></clipPath>'
                + "".join(self.parts[:1]) + f'<g clip-path="url(#{clip})">'
                + "".join(p for p in self.parts[1:] if not p.startswith("<text"))
                + "</g>" + "".join(p for p in self.parts[1:] if p.startswith("<text"))
                + "</g>")


def _draw_series(panel: _Panel, ce: ClassifiedExecution, delta_s: float,
                 first: int, last: int, outliers: bool = True) -> None:
    times = ce.execution.times
    final = ce.segments[-1]
    out = set(ce.outliers)
    for seg in ce.segments:
        a, b = max(seg.start, first), min(seg.end, last)
        if a > b:
            continue
        colour = "black" if segments_equivalent(seg, final, delta_s) else "grey"
        dots = "".join(f"M{_fmt(panel.sx(i))} {_fmt(panel.sy(times[i - 1]))}h0"
                       for i in range(a, b + 1) if i not in out)
        if dots:
            panel.parts.append(f'<path class="segment-data" d="{dots}" stroke="{colour}" '
                               f'stroke-width="2" stroke-linecap="round" fill="none"/>')
        panel.parts.append(
            f'<line class="segment-mean" x1="{_fmt(panel.sx(a - 0.5))}" y1="{_fmt(panel.sy(seg.mean))}" '
            f'x2="{_fmt(panel.sx(b + 0.5))}" y2="{_fmt(panel.sy(seg.mean))}" stroke="{RED}" '
            f'stroke-dasharray="6,3" stroke-width="1.5"/>')
    for seg in ce.segments[:-1]:
        if first <= seg.end < last:
            x = _fmt(panel.sx(seg.end + 0.5))
            panel.parts.append(
                f'<line class="changepoint" x1="{x}" y1="{_fmt(panel.y0)}" x2="{x}" '
                f'y2="{_fmt(panel.y0 + panel.h)}" stroke="{RED}" stroke-dasharray="4,3"/>')
    if outliers:
        for i in ce.outliers:
            if first <= i <= last:
                panel.parts.append(
                    f'<circle class="outlier" cx="{_fmt(panel.sx(i))}" cy="{_fmt(panel.sy(times[i - 1]))}" '
                    f'r="3.5" fill="none" stroke="{RED}"/>')


def run_sequence_svg(ce: ClassifiedExecution, delta_s: float = 0.001,
                     inset_iters: int = 50) -> str:
    """Run-sequence plot of one classified execution."""
    ex = ce.execution
    n = ex.n_iters
    times = ex.times
    kept = np.delete(times, np.asarray(ce.outliers, dtype=int) - 1) if ce.outliers else times
    plot_w = WIDTH - MARGIN_L - MARGIN_R
    cores = ex.core_cycles or ()
    core_h, zoom_h, main_h = 90, 160, 260
    height = 50 + zoom_h + 40 + main_h + 50 + len(cores) * (core_h + 35)

    parts = []
    title = f"{ex.key.benchmark}, {ex.key.vm}, {ex.key.machine}, {ex.pexec_index}, {ce.classification}"
    parts.append(f'<text id="title" x="{WIDTH / 2}" y="24" font-size="15" '
                 f'text-anchor="middle">{escape(title)}</text>')

    y = 40
    zoom = _Panel("zoom", MARGIN_L, y, plot_w, zoom_h, (0.5, n + 0.5),
                  (percentile(kept, 0.01), percentile(kept, 0.99)))
    zoom.axes(None, "Time (s)")
    _draw_series(zoom, ce, delta_s, 1, n)
    parts.append(zoom.svg())

    y += zoom_h + 40
    tmin, tmax = float(times.min()), float(times.max())
    pad = (tmax - tmin) * 0.05
    main = _Panel("main", MARGIN_L, y, plot_w, main_h, (0.5, n + 0.5), (tmin - pad, tmax + pad))
    main.axes("In-process iteration", "Time (s)")
    _draw_series(main, ce, delta_s, 1, n)
    parts.append(main.svg())

    k = max(1, min(inset_iters, n))
    inset_vals = times[:k]
    ipad = (float(inset_vals.max()) - float(inset_vals.min())) * 0.1
    inset = _Panel("inset", MARGIN_L + plot_w * 0.62, y + 12, plot_w * 0.35, main_h * 0.38,
                   (0.5, k + 0.5), (float(inset_vals.min()) - ipad, float(inset_vals.max()) + ipad))
    inset.axes(None, None, font=9)
    _draw_series(inset, ce, delta_s, 1, k)
    parts.append(inset.svg())

    y += main_h + 50
    if cores:
        cyc = np.asarray(cores, dtype=float)
        lo, hi = float(cyc.min()), float(cyc.max())
        for c, core in enumerate(cyc):
            panel = _Panel(f"core-{c}", MARGIN_L, y, plot_w, core_h, (0.5, n + 0.5), (lo, hi))
            panel.axes(None, f"Core {c} cycles", font=10)
            pts = " ".join(f"{_fmt(panel.sx(i + 1))},{_fmt(panel.sy(v))}" for i, v in enumerate(core))
            panel.parts.append(f'<polyline class="core-cycles" points="{pts}" fill="none" '
                               f'stroke="black" stroke-width="0.7"/>')
            parts.append(panel.svg())
            y += core_h + 35

    return (f'<?xml version="1.0" encoding="UTF-8"?>\n'
            f'<svg xmlns="http://www.w3.org/2000/svg" version="1.1" width="{WIDTH}" '
            f'height="{height}" viewBox="0 0 {WIDTH} {height}" font-family="sans-serif">'
            f'<rect width="100%" height="100%" fill="white"/>' + "".join(parts) + "</svg>\n")


_CURVES = (("class_similarity", "classification", "#1f77b4"),
           ("steady_iter_similarity", "steady iter", "#ff7f0e"),
           ("steady_perf_similarity", "steady perf", "#2ca02c"),
           ("overall", "overall", "black"))


def similarity_svg(report: SimilarityReport) -> str:
    height = 360
    plot_w = WIDTH - MARGIN_L - 160
    ns = [p.n for p in report.points]
    lo, hi = (min(ns), max(ns)) if ns else (0, 1)
    panel = _Panel("similarity", MARGIN_L, 30, plot_w, height - 90,
                   (lo, hi if hi > lo else lo + 1), (0.0, 1.0))
    xlabel = "In-process iterations" if report.axis == "iterations" else "Process executions"
    panel.axes(xlabel, "Similarity")
    legend = []
    for k, (attr, name, colour) in enumerate(_CURVES):
        pts = " ".join(f"{_fmt(panel.sx(p.n))},{_fmt(panel.sy(getattr(p, attr)))}"
                       for p in report.points)
        panel.parts.append(f'<polyline class="curve {attr}" points="{pts}" fill="none" '
                           f'stroke="{colour}" stroke-width="1.5"/>')
        ly = 50 + 18 * k
        legend.append(f'<line x1="{WIDTH - 150}" y1="{ly}" x2="{WIDTH - 125}" y2="{ly}" '
                      f'stroke="{colour}" stroke-width="2"/><text x="{WIDTH - 120}" y="{ly + 4}" '
                      f'font-size="11">{name}</text>')
    return (f'<?xml version="1.0" encoding="UTF-8"?>\n'
            f'<svg xmlns="http://www.w3.org/2000/svg" version="1.1" width="{WIDTH}" '
            f'height="{height}" viewBox="0 0 {WIDTH} {height}" font-family="sans-serif">'
            f'<rect width="100%" height="100%" fill="white"/>' + panel.svg() + "".join(legend)
            + "</svg>\n")
