"""Maximum-likelihood logistic regression by damped Newton (IRLS)."""

from __future__ import annotations

import logging
import warnings
from dataclasses import dataclass

import numpy as np
from scipy.special import expit, log_expit

logger = logging.getLogger(__name__)

__all__ = ["LogisticFit", "SeparationWarning", "fit_logistic"]

SEPARATION_RIDGE = 1e-4
_ETA_LIMIT = 30.0


class SeparationWarning(UserWarning):
    pass


@dataclass(frozen=True)
class LogisticFit:
    intercept: float
    coef: np.ndarray  # one entry per input column; 0.0 for dropped columns
    kept: np.ndarray  # boolean mask of columns used in the fit
    n_iter: int
    converged: bool
    ridge: float

    def linear_predictor(self, x: np.ndarray) -> np.ndarray:
        x = np.asarray(x, dtype=float).reshape(len(x), -1)
        return self.intercept + x @ self.coef

    def predict_proba(self, x: np.ndarray) -> np.ndarray:
        return expit(self.linear_predictor(x))


def _penalized_ll(X, y, beta, ridge):
    eta = X @ beta
    return float(np.sum(y * log_expit(eta) + (1 - y) * log_expit(-eta)) - 0.5 * ridge * beta @ beta)


def _newton(X, y, beta, ridge, max_iter, tol):
    ll = _penalized_ll(X, y, beta, ridge)
    eye = np.eye(X.shape[1])
    for it in range(1, max_iter + 1):
        p = expit(X @ beta)
        w = p * (1 - p)
        grad = X.T @ (y - p) - ridge * beta
        hess = (X * w[:, None]).T @ X + ridge * eye
        try:
            step = np.linalg.solve(hess, grad)
        except np.linalg.LinAlgError:
            step = np.linalg.lstsq(hess, grad, rcond=None)[0]
        # step-halving keeps the likelihood monotone
        scale = 1.0
        for _ in range(30):
            cand = beta + scale * step
            ll_c = _penalized_ll(X, y, cand, ridge)
            if ll_c >= ll - 1e-12 * abs(ll):
                break
            scale *= 0.5
        change = np.max(np.abs(cand - beta)) if cand.size else 0.0
        beta, ll = cand, ll_c
        if change < tol:
            return beta, it, True
    return beta, max_iter, False


def fit_logistic(
    x: np.ndarray,
    y: np.ndarray,
    ridge: float = 0.0,
    max_iter: int = 100,
    tol: float = 1e-8,
) -> LogisticFit:
    """Fit ``P(y=1|x) = expit(b0 + x @ b)``.

    Constant columns are dropped with a warning. If the data are separable
    (coefficients run away or Newton fails to converge) the fit is redone with
    a ridge penalty of 1e-4 on every coefficient, intercept included.
    """
    y = np.asarray(y, dtype=float)
    n = y.shape[0]
    x = np.asarray(x, dtype=float).reshape(n, -1)
    if n == 0:
        raise ValueError("cannot fit a logistic model on zero rows")
    kept = np.ptp(x, axis=0) > 0 if x.shape[1] else np.zeros(0, dtype=bool)
    if x.shape[1] and not kept.all():
        warnings.warn(f"dropping {int((~kept).sum())} constant covariate(s)", stacklevel=2)
    X = np.column_stack([np.ones(n), x[:, kept]])
    beta0 = np.zeros(X.shape[1])
    ybar = y.mean()
    if 0 < ybar < 1:
        beta0[0] = np.log(ybar / (1 - ybar))

    beta, n_iter, converged = _newton(X, y, beta0.copy(), ridge, max_iter, tol)
    separated = (not converged) or np.max(np.abs(X @ beta)) > _ETA_LIMIT or ybar in (0.0, 1.0)
    used_ridge = ridge
    if separated and ridge < SEPARATION_RIDGE:
        warnings.warn("perfect or quasi-perfect separation; refitting with ridge 1e-4", SeparationWarning, stacklevel=2)
        used_ridge = SEPARATION_RIDGE
        beta, n_iter, converged = _newton(X, y, np.zeros(X.shape[1]), used_ridge, max_iter, tol)

    coef = np.zeros(x.shape[1])
    coef[kept] = beta[1:]
    return LogisticFit(float(beta[0]), coef, kept, n_iter, converged, used_ridge)
