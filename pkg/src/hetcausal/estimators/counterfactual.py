"""Node-level uplift and probabilities of necessity / sufficiency."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .adjusted import NuisanceModels
from .core import CausalData

__all__ = ["CounterfactualReport", "counterfactual_report", "lower_median"]


@dataclass(frozen=True)
class CounterfactualReport:
    mean_uplift: float
    median_uplift: float
    pn: float | None
    ps: float | None


def lower_median(x) -> float:
    """Median taking the lower middle element on even counts."""
    s = np.sort(np.asarray(x, dtype=float))
    if s.size == 0:
        raise ValueError("median of empty input")
    return float(s[(s.size - 1) // 2])


def counterfactual_report(data: CausalData, nuisance: NuisanceModels, adjusted: bool = False) -> CounterfactualReport:
    """Uplift ``mu1 - mu0`` per row, plus PN and PS identified under monotonicity.

    By default PN = (p1 - p0) / p1 and PS = (p1 - p0) / (1 - p0) from the
    observed arm rates, which identifies both when treatment is exogenous.
    With ``adjusted=True`` the interventional rates P(Y(t)=1) are taken from
    the outcome regressions (mean of ``mu_t``), giving

        PN = (P(Y=1) - P(Y(0)=1)) / P(T=1, Y=1)
        PS = (P(Y(1)=1) - P(Y=1)) / P(T=0, Y=0)

    which stays valid under measured confounding. Both are floored at 0 and
    capped at 1; either is None when its denominator vanishes.
    """
    uplift = nuisance.mu1 - nuisance.mu0
    t, y = data.t, data.y
    n = len(data)
    if adjusted:
        py = y.mean()
        py1, py0 = float(nuisance.mu1.mean()), float(nuisance.mu0.mean())
        p_t1y1 = np.sum((t == 1) & (y == 1)) / n
        p_t0y0 = np.sum((t == 0) & (y == 0)) / n
        pn = None if p_t1y1 == 0 else (py - py0) / p_t1y1
        ps = None if p_t0y0 == 0 else (py1 - py) / p_t0y0
    else:
        if data.n1 == 0 or data.n0 == 0:
            raise ValueError("both arms must be nonempty")
        p1 = y[t == 1].mean()
        p0 = y[t == 0].mean()
        pn = None if p1 == 0 else (p1 - p0) / p1
        ps = None if p0 == 1 else (p1 - p0) / (1 - p0)
    clamp = lambda v: None if v is None else float(min(1.0, max(0.0, v)))  # noqa: E731
    return CounterfactualReport(float(uplift.mean()), lower_median(uplift), clamp(pn), clamp(ps))
