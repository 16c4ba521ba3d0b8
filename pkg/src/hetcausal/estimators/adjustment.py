"""Balance-driven search for a small sufficient adjustment set."""

from __future__ import annotations

import itertools
import logging
import warnings
from typing import Sequence

import numpy as np

from .adjusted import DEFAULT_CLIP, fit_propensity
from .core import CausalData

logger = logging.getLogger(__name__)

__all__ = ["weighted_smd", "minimal_adjustment_search"]


def weighted_smd(x: np.ndarray, t: np.ndarray, w: np.ndarray) -> np.ndarray:
    """Absolute weighted mean difference per column over the unweighted pooled SD."""
    x = np.asarray(x, dtype=float).reshape(len(t), -1)
    tr, ct = t == 1, t == 0
    m1 = np.average(x[tr], axis=0, weights=w[tr])
    m0 = np.average(x[ct], axis=0, weights=w[ct])
    pooled = np.sqrt((x[tr].var(axis=0, ddof=1) + x[ct].var(axis=0, ddof=1)) / 2)
    diff = np.abs(m1 - m0)
    with np.errstate(divide="ignore", invalid="ignore"):
        smd = np.where(pooled > 0, diff / pooled, np.where(diff > 0, np.inf, 0.0))
    return smd


def _balanced(data: CausalData, subset: tuple[str, ...], threshold: float, clip: float) -> bool:
    if subset:
        with warnings.catch_warnings():
            warnings.simplefilter("ignore")
            e = fit_propensity(data.select(subset), clip).predict(data.select(subset).x)
    else:
        e = np.full(len(data), data.n1 / len(data))
    w = np.where(data.t == 1, 1 / e, 1 / (1 - e))
    return bool(np.all(weighted_smd(data.x, data.t, w) <= threshold))


def minimal_adjustment_search(
    data: CausalData,
    candidates: Sequence[str] | None = None,
    max_size: int = 2,
    balance_threshold: float = 0.1,
    clip: float = DEFAULT_CLIP,
) -> tuple[str, ...]:
    """Smallest covariate subset whose IPW weights balance every candidate.

    Subsets are tried by increasing size, lexicographically within a size;
    the first one with every post-weighting SMD <= ``balance_threshold`` wins.
    Falls back to all candidates with a warning when none qualifies.
    """
    names = tuple(sorted(data.covariate_names if candidates is None else candidates))
    if not names:
        raise ValueError("no candidate covariates")
    if max_size > len(names):
        raise ValueError("max_size exceeds the number of candidates")
    sub = data.select(names)
    for k in range(0, max_size + 1):
        for subset in itertools.combinations(names, k):
            if _balanced(sub, subset, balance_threshold, clip):
                return subset
    warnings.warn("no subset reached the balance threshold; using all candidates", stacklevel=2)
    return names
