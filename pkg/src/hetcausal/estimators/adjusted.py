"""Covariate-adjusted ATE estimators: matching, weighting, AIPW and TMLE.

All estimators take precomputed nuisance predictions (:class:`NuisanceModels`)
so that each can be exercised with hand-specified propensities and outcome
regressions as well as with fitted ones.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from typing import Callable

import numpy as np
from scipy.special import expit, logit

from .core import CausalData, EffectEstimate
from .logistic import LogisticFit, fit_logistic

logger = logging.getLogger(__name__)

__all__ = [
    "NuisanceModels",
    "PropensityModel",
    "fit_propensity",
    "fit_outcome_models",
    "fit_nuisance",
    "bootstrap_se",
    "psm_ate",
    "ipw_ate",
    "dr_ate",
    "tmle_ate",
]

DEFAULT_CLIP = 0.01
DEFAULT_BOOTSTRAP = 200
_MU_BOUND = 1e-10  # keeps logit finite without visibly moving saturated arm means


@dataclass(frozen=True)
class PropensityModel:
    fit: LogisticFit
    clip: float

    def predict(self, x: np.ndarray) -> np.ndarray:
        return np.clip(self.fit.predict_proba(x), self.clip, 1 - self.clip)


@dataclass(frozen=True)
class NuisanceModels:
    """Row-aligned nuisance predictions: clipped ``e_hat`` and ``mu0``/``mu1`` in (0, 1)."""

    e_hat: np.ndarray
    mu0: np.ndarray
    mu1: np.ndarray
    propensity: PropensityModel | None = None
    outcome0: LogisticFit | None = None
    outcome1: LogisticFit | None = None

    def __post_init__(self):
        for name in ("e_hat", "mu0", "mu1"):
            arr = np.asarray(getattr(self, name), dtype=float)
            if ((arr <= 0) | (arr >= 1)).any():
                raise ValueError(f"{name} must lie strictly inside (0, 1)")
            object.__setattr__(self, name, arr)

    @classmethod
    def constant(cls, data: CausalData, e: float | None = None) -> "NuisanceModels":
        """Constant propensity (default ``n1/n``) and arm-mean outcome regressions."""
        n = len(data)
        e = data.n1 / n if e is None else e
        p1 = data.y[data.t == 1].mean()
        p0 = data.y[data.t == 0].mean()
        b = _MU_BOUND
        return cls(np.full(n, e), np.full(n, np.clip(p0, b, 1 - b)), np.full(n, np.clip(p1, b, 1 - b)))


def fit_propensity(data: CausalData, clip: float = DEFAULT_CLIP) -> PropensityModel:
    if data.n1 == 0 or data.n0 == 0:
        raise ValueError("both treatment arms must be nonempty")
    if not 0 <= clip < 0.5:
        raise ValueError("clip must lie in [0, 0.5)")
    return PropensityModel(fit_logistic(data.x, data.t), clip)


def fit_outcome_models(data: CausalData) -> tuple[LogisticFit, LogisticFit]:
    """Separate logistic regressions of Y on covariates within each arm."""
    fits = []
    for arm in (0, 1):
        mask = data.t == arm
        if not mask.any():
            raise ValueError(f"arm {arm} is empty")
        fits.append(fit_logistic(data.x[mask], data.y[mask]))
    return fits[0], fits[1]


def fit_nuisance(data: CausalData, clip: float = DEFAULT_CLIP) -> NuisanceModels:
    ps = fit_propensity(data, clip)
    m0, m1 = fit_outcome_models(data)
    b = _MU_BOUND
    return NuisanceModels(
        e_hat=ps.predict(data.x),
        mu0=np.clip(m0.predict_proba(data.x), b, 1 - b),
        mu1=np.clip(m1.predict_proba(data.x), b, 1 - b),
        propensity=ps,
        outcome0=m0,
        outcome1=m1,
    )


def bootstrap_se(
    stat: Callable[[np.ndarray], float | None],
    n: int,
    n_boot: int = DEFAULT_BOOTSTRAP,
    seed: int = 0,
) -> float | None:
    """Standard deviation of ``stat`` over row resamples.

    Resample ``b`` draws its indices from a generator keyed by ``(seed, b)``,
    so the result does not depend on evaluation order. Resamples for which
    ``stat`` returns None (e.g. an empty arm) are skipped.
    """
    vals = []
    for b in range(n_boot):
        rng = np.random.default_rng([seed, b])
        v = stat(rng.integers(0, n, size=n))
        if v is not None:
            vals.append(v)
    if len(vals) < 2:
        return None
    return float(np.std(vals, ddof=1))


# --------------------------------------------------------------------------- matching


def _match_controls(e_t: np.ndarray, e_c: np.ndarray, ids_c: np.ndarray) -> np.ndarray:
    """Index into the control arrays of each treated unit's nearest-propensity control.

    Ties in distance go to the smaller node id; matching is with replacement.
    """
    order = np.lexsort((ids_c, e_c))
    es, ids_s = e_c[order], ids_c[order]
    # first position of each distinct propensity value holds its smallest id
    uniq, first = np.unique(es, return_index=True)
    pos = np.searchsorted(uniq, e_t)
    left = np.clip(pos - 1, 0, uniq.size - 1)
    right = np.clip(pos, 0, uniq.size - 1)
    dl = np.abs(e_t - uniq[left])
    dr = np.abs(uniq[right] - e_t)
    cand_l, cand_r = first[left], first[right]
    pick = np.where(dl < dr, cand_l, np.where(dr < dl, cand_r, np.where(ids_s[cand_l] <= ids_s[cand_r], cand_l, cand_r)))
    return order[pick]


def _psm_point(t, y, e, ids) -> tuple[float, float, float] | None:
    tr, ct = t == 1, t == 0
    if not tr.any() or not ct.any():
        return None
    j = _match_controls(e[tr], e[ct], ids[ct])
    y_t, y_m = y[tr].astype(float), y[ct][j].astype(float)
    return float(np.mean(y_t - y_m)), float(y_t.mean()), float(y_m.mean())


def psm_ate(
    data: CausalData,
    e_hat: np.ndarray,
    n_boot: int = DEFAULT_BOOTSTRAP,
    seed: int = 0,
) -> EffectEstimate:
    """1-NN propensity matching of every treated unit to a control (with replacement)."""
    e_hat = np.asarray(e_hat, dtype=float)
    point = _psm_point(data.t, data.y, e_hat, data.ids)
    if point is None:
        raise ValueError("need at least one treated and one control unit")
    ate, m1, m0 = point

    def stat(idx):
        r = _psm_point(data.t[idx], data.y[idx], e_hat[idx], data.ids[idx])
        return None if r is None else r[0]

    se = bootstrap_se(stat, len(data), n_boot, seed)
    rr = m1 / m0 if m0 > 0 else None
    return EffectEstimate.from_se("psm", ate, se, rr, n_matched=data.n1)


# --------------------------------------------------------------------------- weighting


def _hajek(t, y, e) -> tuple[float, float] | None:
    w1 = t / e
    w0 = (1 - t) / (1 - e)
    s1, s0 = w1.sum(), w0.sum()
    if s1 == 0 or s0 == 0:
        return None
    return float((w1 * y).sum() / s1), float((w0 * y).sum() / s0)


def ipw_ate(
    data: CausalData,
    e_hat: np.ndarray,
    n_boot: int = DEFAULT_BOOTSTRAP,
    seed: int = 0,
) -> EffectEstimate:
    """Self-normalized (Hajek) inverse-probability-weighted risk difference."""
    e_hat = np.asarray(e_hat, dtype=float)
    t, y = data.t.astype(float), data.y.astype(float)
    means = _hajek(t, y, e_hat)
    if means is None:
        raise ValueError("all weights zero in one arm")
    m1, m0 = means

    def stat(idx):
        r = _hajek(t[idx], y[idx], e_hat[idx])
        return None if r is None else r[0] - r[1]

    se = bootstrap_se(stat, len(data), n_boot, seed)
    rr = m1 / m0 if m0 > 0 else None
    return EffectEstimate.from_se("ipw", m1 - m0, se, rr, mean1=m1, mean0=m0)


# --------------------------------------------------------------------------- doubly robust


def dr_ate(data: CausalData, nuisance: NuisanceModels) -> EffectEstimate:
    """Augmented IPW; SE from the sample SD of the per-row influence terms."""
    if nuisance is None:
        raise ValueError("nuisance models required")
    t, y = data.t.astype(float), data.y.astype(float)
    e, mu0, mu1 = nuisance.e_hat, nuisance.mu0, nuisance.mu1
    psi1 = t * (y - mu1) / e + mu1
    psi0 = (1 - t) * (y - mu0) / (1 - e) + mu0
    terms = psi1 - psi0
    n = terms.size
    ate = float(terms.mean())
    se = float(terms.std(ddof=1) / math.sqrt(n)) if n > 1 else None
    m1, m0 = float(psi1.mean()), float(psi0.mean())
    rr = m1 / m0 if m0 > 0 else None
    return EffectEstimate.from_se("dr", ate, se, rr, mean1=m1, mean0=m0)


# --------------------------------------------------------------------------- TMLE


def _fluctuate(y, offset, h, max_iter: int = 50, tol: float = 1e-10) -> tuple[float, bool]:
    """Scalar MLE of ``eps`` in ``logit P(Y=1) = offset + eps * h``; returns (eps, ok)."""
    eps = 0.0
    for _ in range(max_iter):
        p = expit(offset + eps * h)
        score = float(np.sum(h * (y - p)))
        info = float(np.sum(h * h * p * (1 - p)))
        if info <= 0 or not math.isfinite(score):
            return 0.0, False
        step = score / info
        eps += step
        if not math.isfinite(eps):
            return 0.0, False
        if abs(step) < tol:
            return eps, True
    return 0.0, False


def tmle_ate(data: CausalData, nuisance: NuisanceModels) -> EffectEstimate:
    """One-step logistic fluctuation of the outcome regressions along the clever covariate."""
    if nuisance is None:
        raise ValueError("nuisance models required")
    t, y = data.t.astype(float), data.y.astype(float)
    e, mu0, mu1 = nuisance.e_hat, nuisance.mu0, nuisance.mu1
    h1, h0 = 1.0 / e, -1.0 / (1.0 - e)
    h = t * h1 + (1 - t) * h0
    mu_obs = np.where(t == 1, mu1, mu0)
    eps, ok = _fluctuate(y, logit(mu_obs), h)
    if not ok:
        logger.warning("TMLE fluctuation did not converge; using eps = 0")
    if eps == 0.0:
        s1, s0 = mu1, mu0
    else:
        s1 = expit(logit(mu1) + eps * h1)
        s0 = expit(logit(mu0) + eps * h0)
    ate = float(np.mean(s1 - s0))
    s_obs = np.where(t == 1, s1, s0)
    eif = h * (y - s_obs) + (s1 - s0) - ate
    n = eif.size
    se = float(eif.std(ddof=1) / math.sqrt(n)) if n > 1 else None
    m1, m0 = float(s1.mean()), float(s0.mean())
    rr = m1 / m0 if m0 > 0 else None
    return EffectEstimate.from_se("tmle", ate, se, rr, epsilon=eps, fluctuation_converged=ok, mean1=m1, mean0=m0)
