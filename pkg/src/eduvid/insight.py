"""Stages 6-7: feature influence ranking, what-if simulation, design feedback.

Standardised weights are compared by magnitude, single-feature deltas are
simulated exactly through the linear model, and the findings become
templated recommendations. Recommendations carry caution flags whenever
explanatory power is low or collinearity makes individual weights
unreliable; they are exploratory indicators, not design rules.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .eda import EDAReport
from .errors import LengthMismatchError, NonFiniteInputError
from .model import Prediction, RegressionModel, predict


@dataclass(frozen=True)
class FeatureInfluence:
    feature_name: str
    weight: float
    rank: int
    direction: str  # "positive" | "negative"


@dataclass(frozen=True)
class WhatIfScenario:
    baseline: tuple[float, ...]
    deltas: tuple[float, ...]
    predicted_baseline: float
    predicted_new: float
    delta_engagement: float


@dataclass(frozen=True)
class Recommendation:
    feature_name: str
    advice: str  # "decrease" | "increase"
    weight: float
    caution: bool


@dataclass(frozen=True)
class DesignReport:
    influences: tuple[FeatureInfluence, ...]
    scenarios: tuple[WhatIfScenario, ...]
    recommendations: tuple[Recommendation, ...]
    caveats: tuple[str, ...]


@dataclass(frozen=True)
class InsightConfig:
    """Materiality and caution thresholds; prudence knobs, not science."""

    materiality_frac: float = 0.10
    r2_caution: float = 0.3
    vif_caution: float = 5.0


def rank_features(model: RegressionModel) -> list[FeatureInfluence]:
    """Influences sorted by |weight| descending, ties broken by name."""
    order = sorted(zip(model.standardizer.feature_names, model.weights),
                   key=lambda item: (-abs(item[1]), item[0]))
    return [FeatureInfluence(feature_name=name, weight=w, rank=i + 1,
                             direction="positive" if w >= 0 else "negative")
            for i, (name, w) in enumerate(order)]


def what_if(model: RegressionModel, baseline, deltas) -> WhatIfScenario:
    """Effect of raw-unit feature changes on predicted engagement.

    delta_engagement = sum_j weight_j * (delta_j / std_j); exact for the
    linear model, so a +1-std single-feature delta returns that feature's
    weight precisely.
    """
    std = model.standardizer
    baseline = tuple(float(v) for v in baseline)
    deltas = tuple(float(v) for v in deltas)
    p = len(std.feature_names)
    if len(baseline) != p or len(deltas) != p:
        raise LengthMismatchError(
            f"expected {p} baseline and delta entries,"
            f" got {len(baseline)} and {len(deltas)}")
    if not all(math.isfinite(v) for v in baseline + deltas):
        raise NonFiniteInputError("baseline or deltas hold NaN or infinity")
    base: Prediction = predict(model, baseline)
    delta_engagement = 0.0
    for w, d, s in zip(model.weights, deltas, std.stds):
        delta_engagement += w * (d / s)
    return WhatIfScenario(baseline=baseline, deltas=deltas,
                          predicted_baseline=base.value,
                          predicted_new=base.value + delta_engagement,
                          delta_engagement=delta_engagement)


def design_feedback(model: RegressionModel, influences: list[FeatureInfluence],
                    vifs: list[float], eda: EDAReport | None = None,
                    config: InsightConfig = InsightConfig()) -> DesignReport:
    """Turn the fitted weights into templated design recommendations.

    One recommendation per feature whose |weight| clears the materiality
    threshold, paired with a 1-std what-if scenario in the advised
    direction. Caution flags fire on low R-squared or high VIF; caveats
    additionally call out weights whose sign contradicts the feature's
    marginal correlation, naming the most collinear partner.
    """
    names = model.standardizer.feature_names
    if len(vifs) != len(names):
        raise LengthMismatchError(f"{len(vifs)} VIFs for {len(names)} features")
    vif_by_name = dict(zip(names, vifs))
    max_abs = max((abs(i.weight) for i in influences), default=0.0)
    low_r2 = model.metrics.r_squared < config.r2_caution

    recommendations = []
    scenarios = []
    baseline = model.standardizer.means
    for influence in influences:
        if max_abs == 0.0 or abs(influence.weight) < config.materiality_frac * max_abs:
            continue
        caution = low_r2 or vif_by_name[influence.feature_name] > config.vif_caution
        advice = "decrease" if influence.weight < 0 else "increase"
        recommendations.append(Recommendation(
            feature_name=influence.feature_name, advice=advice,
            weight=influence.weight, caution=caution))
        j = names.index(influence.feature_name)
        deltas = [0.0] * len(names)
        deltas[j] = -model.standardizer.stds[j] if advice == "decrease" \
            else model.standardizer.stds[j]
        scenarios.append(what_if(model, baseline, deltas))

    caveats = []
    if low_r2:
        caveats.append(
            f"Model explains little variance (R^2 ="
            f" {model.metrics.r_squared:.4f} < {config.r2_caution}); treat every"
            f" recommendation as an exploratory indicator, not a design rule.")
    high_vif = [n for n in names if vif_by_name[n] > config.vif_caution]
    if high_vif:
        caveats.append(
            f"High collinearity (VIF > {config.vif_caution:g}) among:"
            f" {', '.join(high_vif)}; individual weights are unstable.")
    for caveat in _sign_conflict_caveats(model, vif_by_name, eda, config):
        caveats.append(caveat)
    return DesignReport(influences=tuple(influences), scenarios=tuple(scenarios),
                        recommendations=tuple(recommendations),
                        caveats=tuple(caveats))


def _sign_conflict_caveats(model: RegressionModel, vif_by_name: dict[str, float],
                           eda: EDAReport | None,
                           config: InsightConfig) -> list[str]:
    if eda is None:
        return []
    r_by_name = {c.feature_name: c.r for c in eda.correlations}
    caveats = []
    for name, weight in zip(model.standardizer.feature_names, model.weights):
        r = r_by_name.get(name)
        if r is None or r == 0.0 or weight == 0.0:
            continue
        if (r > 0) == (weight > 0):
            continue
        partner = _most_collinear_partner(name, vif_by_name, config)
        against = (f"its marginal correlation (r = {r:+.2f} but weight ="
                   f" {weight:+.2f})")
        if partner is None:
            caveats.append(f"Fitted weight for {name} contradicts {against};"
                           f" interpret with care.")
        else:
            caveats.append(f"Fitted weight for {name} contradicts {against};"
                           f" collinearity with {partner} (VIF"
                           f" {vif_by_name[partner]:.1f}) may be inverting the"
                           f" apparent effect.")
    return caveats


def _most_collinear_partner(name: str, vif_by_name: dict[str, float],
                            config: InsightConfig) -> str | None:
    candidates = [(v, n) for n, v in vif_by_name.items()
                  if n != name and v > config.vif_caution]
    if not candidates:
        return None
    return max(candidates, key=lambda item: (item[0], item[1]))[1]


# --- serialization and rendering -----------------------------------------------

def scenario_to_dict(s: WhatIfScenario) -> dict:
    return {
        "baseline": list(s.baseline),
        "deltas": list(s.deltas),
        "predicted_baseline": s.predicted_baseline,
        "predicted_new": s.predicted_new,
        "delta_engagement": s.delta_engagement,
    }


def report_to_dict(report: DesignReport) -> dict:
    return {
        "influences": [{
            "feature_name": i.feature_name, "weight": i.weight,
            "rank": i.rank, "direction": i.direction,
        } for i in report.influences],
        "scenarios": [scenario_to_dict(s) for s in report.scenarios],
        "recommendations": [{
            "feature_name": r.feature_name, "advice": r.advice,
            "weight": r.weight, "caution": r.caution,
        } for r in report.recommendations],
        "caveats": list(report.caveats),
    }


def report_from_dict(d: dict) -> DesignReport:
    return DesignReport(
        influences=tuple(FeatureInfluence(i["feature_name"], i["weight"],
                                          i["rank"], i["direction"])
                         for i in d["influences"]),
        scenarios=tuple(WhatIfScenario(tuple(s["baseline"]), tuple(s["deltas"]),
                                       s["predicted_baseline"], s["predicted_new"],
                                       s["delta_engagement"])
                        for s in d["scenarios"]),
        recommendations=tuple(Recommendation(r["feature_name"], r["advice"],
                                             r["weight"], r["caution"])
                              for r in d["recommendations"]),
        caveats=tuple(d["caveats"]),
    )


def render_markdown(report: DesignReport) -> str:
    lines = ["# Video design feedback", "", "## Feature influence", ""]
    lines.append("| rank | feature | weight | direction |")
    lines.append("|-----:|---------|-------:|-----------|")
    for i in report.influences:
        lines.append(f"| {i.rank} | {i.feature_name} | {i.weight:+.4f}"
                     f" | {i.direction} |")
    lines += ["", "## Recommendations", ""]
    if not report.recommendations:
        lines.append("No feature clears the materiality threshold.")
    for rec, scenario in zip(report.recommendations, report.scenarios):
        flag = " (interpret with caution)" if rec.caution else ""
        lines.append(f"- **{rec.advice} {rec.feature_name}**{flag}: a one-std-dev"
                     f" change in the advised direction shifts predicted"
                     f" engagement by {scenario.delta_engagement:+.2f} points"
                     f" (weight {rec.weight:+.2f}).")
    if report.caveats:
        lines += ["", "## Caveats", ""]
        for caveat in report.caveats:
            lines.append(f"- {caveat}")
    return "\n".join(lines) + "\n"
