"""E-value and agreement across estimators."""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from typing import Mapping, Sequence

from .core import METHODS, EffectEstimate

__all__ = ["SensitivityReport", "ConsistencyVerdict", "e_value", "sensitivity", "consistency_check"]


def e_value(rr: float) -> float:
    """Risk-ratio E-value; protective ratios are inverted first."""
    if not rr > 0:
        raise ValueError(f"risk ratio must be positive, got {rr}")
    if rr < 1:
        rr = 1.0 / rr
    return rr + math.sqrt(rr * (rr - 1.0))


@dataclass(frozen=True)
class SensitivityReport:
    rr_used: float
    e_value: float


def sensitivity(rr: float) -> SensitivityReport:
    return SensitivityReport(rr, e_value(rr))


@dataclass(frozen=True)
class ConsistencyVerdict:
    agree_count: int
    directions: dict[str, int]
    ci_overlap: bool
    consistent: bool


def _sign(x: float) -> int:
    return (x > 0) - (x < 0)


def consistency_check(estimates: Sequence[EffectEstimate] | Mapping[str, EffectEstimate]) -> ConsistencyVerdict:
    """Sign agreement with ``diff_means`` and pairwise overlap of 95% intervals.

    An estimate without an interval counts as non-overlapping.
    """
    if isinstance(estimates, Mapping):
        estimates = list(estimates.values())
    by = {e.method: e for e in estimates}
    missing = [m for m in METHODS if m not in by]
    if missing or len(estimates) != len(METHODS):
        raise ValueError(f"expected exactly the methods {METHODS}; missing {missing}")
    directions = {m: _sign(by[m].ate) for m in METHODS}
    ref = directions["diff_means"]
    agree = sum(d == ref for d in directions.values())
    overlap = True
    for a, b in itertools.combinations(METHODS, 2):
        ca, cb = by[a].ci95, by[b].ci95
        if ca is None or cb is None or max(ca[0], cb[0]) > min(ca[1], cb[1]):
            overlap = False
            break
    return ConsistencyVerdict(agree, directions, overlap, agree == len(METHODS) and overlap)
