"""Stage 4 exploratory analysis: distributions, correlations, trends.

Histograms use 15 equal-width bins by default; linear association is
measured with Pearson correlation; non-linear trends come from LOESS
(degree-1 local regression with a tricube kernel, no robustness
iterations).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .dataset import AnalysisDataset, modeling_view
from .errors import (
    EmptyInputError,
    LengthMismatchError,
    SpanTooSmallError,
    TooFewCompleteRowsError,
    TooFewPointsError,
    ZeroVarianceError,
)

_EPS = float(np.finfo(np.float64).eps)


@dataclass(frozen=True)
class Histogram:
    feature_name: str
    bin_edges: tuple[float, ...]
    counts: tuple[int, ...]
    n: int


@dataclass(frozen=True)
class CorrelationResult:
    feature_name: str
    r: float
    n: int


@dataclass(frozen=True)
class LoessCurve:
    feature_name: str
    eval_x: tuple[float, ...]
    fitted_y: tuple[float, ...]
    span: float
    degree: int = 1


@dataclass(frozen=True)
class EDAReport:
    span: float
    n_complete: int
    histograms: tuple[Histogram, ...]
    correlations: tuple[CorrelationResult, ...]
    loess_curves: tuple[LoessCurve, ...]


def histogram(values, bins: int = 15, name: str = "") -> Histogram:
    """Equal-width histogram over [min, max].

    Value x lands in bin floor((x - min) / width); x == max goes to the
    last bin. A degenerate range (min == max) collapses everything into
    bin 0 over [min, min + 1).
    """
    if len(values) == 0:
        raise EmptyInputError("histogram needs at least one value")
    if bins < 1:
        raise ValueError(f"bins {bins} must be >= 1")
    arr = np.asarray(values, dtype=np.float64)
    lo, hi = float(arr.min()), float(arr.max())
    if lo == hi:
        edges = np.linspace(lo, lo + 1.0, bins + 1)
        counts = [0] * bins
        counts[0] = len(arr)
    else:
        width = (hi - lo) / bins
        edges = np.linspace(lo, hi, bins + 1)
        idx = np.floor((arr - lo) / width).astype(int)
        idx = np.clip(idx, 0, bins - 1)
        counts = np.bincount(idx, minlength=bins).tolist()
    return Histogram(feature_name=name, bin_edges=tuple(float(e) for e in edges),
                     counts=tuple(int(c) for c in counts), n=len(arr))


def pearson(x, y) -> float:
    """Pearson correlation coefficient, clamped to [-1, 1]."""
    x = np.asarray(x, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    if x.shape != y.shape or x.ndim != 1:
        raise LengthMismatchError(f"paired vectors differ: {x.shape} vs {y.shape}")
    n = len(x)
    if n < 2:
        raise TooFewPointsError(f"need >= 2 points, got {n}")
    dx = x - x.mean()
    dy = y - y.mean()
    sxx = float(dx @ dx)
    syy = float(dy @ dy)
    # sums of squares this small are pure rounding noise from the mean
    # subtraction, i.e. the input is constant
    if sxx <= _variance_floor(x) or syy <= _variance_floor(y):
        raise ZeroVarianceError("correlation undefined for a constant input")
    r = float(dx @ dy) / math.sqrt(sxx * syy)
    return max(-1.0, min(1.0, r))


def _variance_floor(v: np.ndarray) -> float:
    scale = float(np.max(np.abs(v))) if len(v) else 0.0
    return len(v) * (32.0 * _EPS * scale) ** 2


def loess(x, y, span: float = 0.5, eval_x=None) -> LoessCurve:
    """Locally weighted degree-1 regression (classic minimal LOESS).

    At each evaluation point the k = ceil(span*n) nearest x-neighbours are
    tricube-weighted by w = (1 - (d/dmax)^3)^3 with dmax the k-th smallest
    distance (all weights 1 when dmax == 0), and a weighted straight line
    is fitted; the fitted value is that line at the evaluation point. When
    the weighted design is singular (all effective weight at one x) the
    fit falls back to the weighted mean.
    """
    x = np.asarray(x, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    if x.shape != y.shape or x.ndim != 1:
        raise LengthMismatchError(f"paired vectors differ: {x.shape} vs {y.shape}")
    n = len(x)
    if n < 3:
        raise TooFewPointsError(f"LOESS needs >= 3 points, got {n}")
    if not 0.0 < span <= 1.0:
        raise ValueError(f"span {span} outside (0, 1]")
    k = math.ceil(span * n)
    if k < 2:
        raise SpanTooSmallError(f"span {span} selects {k} < 2 neighbours")
    if eval_x is None:
        eval_x = np.unique(x)
    else:
        eval_x = np.asarray(eval_x, dtype=np.float64)
    fitted = [_local_fit(x, y, float(x0), k) for x0 in eval_x]
    return LoessCurve(feature_name="", eval_x=tuple(float(v) for v in eval_x),
                      fitted_y=tuple(fitted), span=span)


def _local_fit(x: np.ndarray, y: np.ndarray, x0: float, k: int) -> float:
    d = np.abs(x - x0)
    dmax = float(np.partition(d, k - 1)[k - 1])
    if dmax == 0.0:
        w = np.where(d == 0.0, 1.0, 0.0)
    else:
        u = d / dmax
        w = np.where(d <= dmax, (1.0 - u ** 3) ** 3, 0.0)
    # centring on x0 keeps the 2x2 system well conditioned and makes the
    # fitted value the intercept
    xc = x - x0
    s0 = float(np.sum(w))
    s1 = float(np.sum(w * xc))
    s2 = float(np.sum(w * xc * xc))
    t0 = float(np.sum(w * y))
    t1 = float(np.sum(w * xc * y))
    det = s0 * s2 - s1 * s1
    if det <= 1e-12 * s0 * s2 or s2 == 0.0:
        return t0 / s0
    return (s2 * t0 - s1 * t1) / det


def eda_report(ds: AnalysisDataset, span: float = 0.5) -> EDAReport:
    """Histograms, feature-target correlations and LOESS trends.

    Histograms draw on every row where the plotted value is present and
    finite; correlations and LOESS use complete rows only, matching the
    modelling view.
    """
    X, y, _ = modeling_view(ds)
    if len(y) < 3:
        raise TooFewCompleteRowsError(
            f"EDA needs >= 3 complete rows, got {len(y)}")

    histograms = []
    for j, name in enumerate(ds.feature_names):
        values = [r.features.vector()[j] for r in ds.rows
                  if r.features is not None
                  and math.isfinite(r.features.vector()[j])]
        histograms.append(histogram(values, name=name))
    target_values = [r.engagement.average_percentage_viewed for r in ds.rows
                     if r.engagement is not None
                     and math.isfinite(r.engagement.average_percentage_viewed)]
    histograms.append(histogram(target_values, name=ds.target_name))

    correlations = tuple(
        CorrelationResult(feature_name=name, r=pearson(X[:, j], y), n=len(y))
        for j, name in enumerate(ds.feature_names))

    curves = []
    for j, name in enumerate(ds.feature_names):
        curve = loess(X[:, j], y, span=span)
        curves.append(LoessCurve(feature_name=name, eval_x=curve.eval_x,
                                 fitted_y=curve.fitted_y, span=span))
    return EDAReport(span=span, n_complete=len(y), histograms=tuple(histograms),
                     correlations=correlations, loess_curves=tuple(curves))


# --- JSON mapping -------------------------------------------------------------

def report_to_dict(report: EDAReport) -> dict:
    return {
        "span": report.span,
        "n_complete": report.n_complete,
        "histograms": [{
            "feature_name": h.feature_name,
            "bin_edges": list(h.bin_edges),
            "counts": list(h.counts),
            "n": h.n,
        } for h in report.histograms],
        "correlations": [{
            "feature_name": c.feature_name, "r": c.r, "n": c.n,
        } for c in report.correlations],
        "loess_curves": [{
            "feature_name": c.feature_name,
            "span": c.span,
            "degree": c.degree,
            "eval_x": list(c.eval_x),
            "fitted_y": list(c.fitted_y),
        } for c in report.loess_curves],
    }


def report_from_dict(d: dict) -> EDAReport:
    return EDAReport(
        span=d["span"],
        n_complete=d["n_complete"],
        histograms=tuple(Histogram(h["feature_name"], tuple(h["bin_edges"]),
                                   tuple(h["counts"]), h["n"])
                         for h in d["histograms"]),
        correlations=tuple(CorrelationResult(c["feature_name"], c["r"], c["n"])
                           for c in d["correlations"]),
        loess_curves=tuple(LoessCurve(c["feature_name"], tuple(c["eval_x"]),
                                      tuple(c["fitted_y"]), c["span"], c["degree"])
                           for c in d["loess_curves"]),
    )
