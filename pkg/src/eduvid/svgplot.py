"""Deterministic SVG rendering of EDA results.

Pure string templating: the same report always yields byte-identical
files, which keeps the plots diffable in golden tests. No plotting
backend is involved.
"""

from __future__ import annotations

from .eda import CorrelationResult, EDAReport, Histogram, LoessCurve

WIDTH, HEIGHT = 640, 400
MARGIN_L, MARGIN_R, MARGIN_T, MARGIN_B = 60, 20, 36, 48
PLOT_W = WIDTH - MARGIN_L - MARGIN_R
PLOT_H = HEIGHT - MARGIN_T - MARGIN_B


def _fmt(v: float) -> str:
    return f"{v:.2f}"


def _header(title: str) -> list[str]:
    return [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}"'
        f' viewBox="0 0 {WIDTH} {HEIGHT}">',
        f'<rect width="{WIDTH}" height="{HEIGHT}" fill="white"/>',
        f'<text x="{WIDTH / 2:.0f}" y="22" text-anchor="middle"'
        f' font-family="sans-serif" font-size="14">{title}</text>',
    ]


def _axes() -> list[str]:
    x0, y0 = MARGIN_L, MARGIN_T + PLOT_H
    return [
        f'<line x1="{x0}" y1="{MARGIN_T}" x2="{x0}" y2="{y0}" stroke="black"/>',
        f'<line x1="{x0}" y1="{y0}" x2="{MARGIN_L + PLOT_W}" y2="{y0}" stroke="black"/>',
    ]


def _x_label(text: str) -> str:
    return (f'<text x="{MARGIN_L + PLOT_W / 2:.0f}" y="{HEIGHT - 12}"'
            f' text-anchor="middle" font-family="sans-serif" font-size="12">{text}</text>')


def render_histogram_svg(hist: Histogram) -> str:
    lines = _header(f"Distribution of {hist.feature_name} (n={hist.n})") + _axes()
    lo, hi = hist.bin_edges[0], hist.bin_edges[-1]
    span = hi - lo or 1.0
    peak = max(hist.counts) or 1
    for i, count in enumerate(hist.counts):
        bx = MARGIN_L + (hist.bin_edges[i] - lo) / span * PLOT_W
        bw = (hist.bin_edges[i + 1] - hist.bin_edges[i]) / span * PLOT_W
        bh = count / peak * PLOT_H
        by = MARGIN_T + PLOT_H - bh
        lines.append(f'<rect x="{_fmt(bx)}" y="{_fmt(by)}" width="{_fmt(bw)}"'
                     f' height="{_fmt(bh)}" fill="#4878d0" stroke="white"/>')
    lines.append(_x_label(f"{hist.feature_name}  [{_fmt(lo)}, {_fmt(hi)}]"))
    lines.append("</svg>")
    return "\n".join(lines) + "\n"


def render_correlation_svg(correlations: tuple[CorrelationResult, ...]) -> str:
    lines = _header("Pearson correlation with engagement") + _axes()
    n = len(correlations)
    mid_y = MARGIN_T + PLOT_H / 2
    lines.append(f'<line x1="{MARGIN_L}" y1="{_fmt(mid_y)}"'
                 f' x2="{MARGIN_L + PLOT_W}" y2="{_fmt(mid_y)}"'
                 f' stroke="#999" stroke-dasharray="4 4"/>')
    slot = PLOT_W / max(n, 1)
    for i, c in enumerate(correlations):
        bx = MARGIN_L + i * slot + slot * 0.2
        bw = slot * 0.6
        bh = abs(c.r) * (PLOT_H / 2)
        by = mid_y - bh if c.r >= 0 else mid_y
        color = "#4878d0" if c.r >= 0 else "#d05048"
        lines.append(f'<rect x="{_fmt(bx)}" y="{_fmt(by)}" width="{_fmt(bw)}"'
                     f' height="{_fmt(bh)}" fill="{color}"/>')
        lines.append(f'<text x="{_fmt(bx + bw / 2)}" y="{HEIGHT - 30}"'
                     f' text-anchor="middle" font-family="sans-serif"'
                     f' font-size="10">{c.feature_name}</text>')
        lines.append(f'<text x="{_fmt(bx + bw / 2)}" y="{HEIGHT - 16}"'
                     f' text-anchor="middle" font-family="sans-serif"'
                     f' font-size="10">r={c.r:+.3f}</text>')
    lines.append("</svg>")
    return "\n".join(lines) + "\n"


def render_loess_svg(curve: LoessCurve) -> str:
    lines = _header(f"LOESS trend: engagement vs {curve.feature_name}"
                    f" (span={curve.span})") + _axes()
    xs, ys = curve.eval_x, curve.fitted_y
    x_lo, x_hi = min(xs), max(xs)
    y_lo, y_hi = min(ys), max(ys)
    x_span = (x_hi - x_lo) or 1.0
    y_span = (y_hi - y_lo) or 1.0
    points = " ".join(
        f"{_fmt(MARGIN_L + (x - x_lo) / x_span * PLOT_W)},"
        f"{_fmt(MARGIN_T + PLOT_H - (y - y_lo) / y_span * PLOT_H)}"
        for x, y in zip(xs, ys))
    lines.append(f'<polyline points="{points}" fill="none" stroke="#d05048"'
                 f' stroke-width="2"/>')
    lines.append(_x_label(f"{curve.feature_name}  [{_fmt(x_lo)}, {_fmt(x_hi)}]"))
    lines.append("</svg>")
    return "\n".join(lines) + "\n"


def render_all(report: EDAReport) -> dict[str, str]:
    """Filename -> SVG text for every plot in the report."""
    files = {}
    for hist in report.histograms:
        files[f"hist_{hist.feature_name}.svg"] = render_histogram_svg(hist)
    files["corr.svg"] = render_correlation_svg(report.correlations)
    for curve in report.loess_curves:
        files[f"loess_{curve.feature_name}.svg"] = render_loess_svg(curve)
    return files
