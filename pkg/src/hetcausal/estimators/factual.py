"""Unadjusted two-arm analysis: adequacy gate, risk difference, BH q-values."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .core import CausalData, EffectEstimate

__all__ = [
    "ContingencySummary",
    "AdequacyVerdict",
    "FdrResult",
    "contingency",
    "adequacy_check",
    "diff_in_means",
    "bh_fdr",
]


@dataclass(frozen=True)
class ContingencySummary:
    """Arm sizes and event counts of a 2x2 table."""

    n1: int
    n0: int
    events1: int
    events0: int

    def __post_init__(self):
        if min(self.n1, self.n0, self.events1, self.events0) < 0:
            raise ValueError("counts must be nonnegative")
        if self.events1 > self.n1 or self.events0 > self.n0:
            raise ValueError("more events than units in an arm")

    @classmethod
    def from_rates(cls, n1: int, n0: int, p1: float, p0: float) -> "ContingencySummary":
        e1, e0 = round(n1 * p1), round(n0 * p0)
        if abs(e1 - n1 * p1) > 1e-6 or abs(e0 - n0 * p0) > 1e-6:
            raise ValueError("rates do not correspond to integer event counts")
        return cls(n1, n0, int(e1), int(e0))

    @property
    def n(self) -> int:
        return self.n1 + self.n0

    @property
    def p1(self) -> float:
        return self.events1 / self.n1 if self.n1 else float("nan")

    @property
    def p0(self) -> float:
        return self.events0 / self.n0 if self.n0 else float("nan")


def contingency(data: CausalData) -> ContingencySummary:
    t, y = data.t, data.y
    return ContingencySummary(int(t.sum()), int((1 - t).sum()), int(y[t == 1].sum()), int(y[t == 0].sum()))


@dataclass(frozen=True)
class AdequacyVerdict:
    passed: bool
    failures: tuple[str, ...]
    thresholds: tuple[int, int]


def adequacy_check(cs: ContingencySummary, n_min: int = 30, s_min: int = 5) -> AdequacyVerdict:
    """Both arms need ``n_min`` units and ``s_min`` events and non-events."""
    failures = []
    for arm, n, e in (("treated", cs.n1, cs.events1), ("control", cs.n0, cs.events0)):
        if n < n_min:
            failures.append(f"{arm} size {n} < {n_min}")
        if e < s_min:
            failures.append(f"{arm} events {e} < {s_min}")
        if n - e < s_min:
            failures.append(f"{arm} non-events {n - e} < {s_min}")
    return AdequacyVerdict(not failures, tuple(failures), (n_min, s_min))


def diff_in_means(cs: ContingencySummary | CausalData) -> EffectEstimate:
    """Risk difference ``p1 - p0`` with the unpooled binomial standard error."""
    if isinstance(cs, CausalData):
        cs = contingency(cs)
    if cs.n1 == 0 or cs.n0 == 0:
        raise ValueError("empty treatment arm")
    p1, p0 = cs.p1, cs.p0
    se = math.sqrt(p1 * (1 - p1) / cs.n1 + p0 * (1 - p0) / cs.n0)
    rr = p1 / p0 if p0 > 0 else None
    return EffectEstimate.from_se("diff_means", p1 - p0, se, rr, p1=p1, p0=p0, n1=cs.n1, n0=cs.n0)


@dataclass(frozen=True)
class FdrResult:
    m: int
    alpha: float
    q_values: np.ndarray
    k_star: int

    @property
    def rejected(self) -> np.ndarray:
        return self.q_values <= self.alpha


def bh_fdr(p_values, alpha: float = 0.05) -> FdrResult:
    """Benjamini-Hochberg step-up: q-values in input order and the rejection count."""
    p = np.asarray(p_values, dtype=float).ravel()
    if not 0 < alpha < 1:
        raise ValueError("alpha must lie in (0, 1)")
    if np.isnan(p).any() or (p < 0).any() or (p > 1).any():
        raise ValueError("p-values must lie in [0, 1]")
    m = p.size
    if m == 0:
        return FdrResult(0, alpha, p.copy(), 0)
    order = np.argsort(p, kind="stable")
    ps = p[order]
    q_sorted = np.empty(m)
    q_sorted[-1] = ps[-1]
    for i in range(m - 2, -1, -1):
        q_sorted[i] = min(m / (i + 1) * ps[i], q_sorted[i + 1])
    q_sorted = np.minimum(q_sorted, 1.0)
    q = np.empty(m)
    q[order] = q_sorted
    below = np.nonzero(ps <= np.arange(1, m + 1) / m * alpha)[0]
    k_star = int(below[-1] + 1) if below.size else 0
    return FdrResult(m, alpha, q, k_star)
