"""Shared containers for the estimator battery."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

METHODS = ("diff_means", "psm", "ipw", "dr", "tmle")
Z_975 = 1.959963984540054


def two_sided_p(z: float) -> float:
    """Two-sided standard-normal tail probability, via ``erfc`` for accuracy in the tails."""
    return math.erfc(abs(z) / math.sqrt(2.0))


@dataclass(frozen=True)
class CausalData:
    """Binary treatment ``t``, binary outcome ``y`` and covariate matrix ``x`` (n x d)."""

    t: np.ndarray
    y: np.ndarray
    x: np.ndarray
    ids: np.ndarray
    covariate_names: tuple[str, ...] = ()

    def __post_init__(self):
        t = np.asarray(self.t, dtype=np.int64)
        y = np.asarray(self.y, dtype=np.int64)
        n = t.shape[0]
        x = np.asarray(self.x, dtype=float).reshape(n, -1) if n else np.empty((0, len(self.covariate_names)))
        ids = np.arange(n) if self.ids is None else np.asarray(self.ids, dtype=np.int64)
        if y.shape != (n,) or ids.shape != (n,):
            raise ValueError("t, y and ids must have equal length")
        if not np.isin(t, (0, 1)).all() or not np.isin(y, (0, 1)).all():
            raise ValueError("treatment and outcome must be binary")
        names = tuple(self.covariate_names) or tuple(f"x{j}" for j in range(x.shape[1]))
        if len(names) != x.shape[1]:
            raise ValueError("covariate_names length does not match x")
        object.__setattr__(self, "t", t)
        object.__setattr__(self, "y", y)
        object.__setattr__(self, "x", x)
        object.__setattr__(self, "ids", ids)
        object.__setattr__(self, "covariate_names", names)

    @classmethod
    def from_arrays(cls, t, y, x=None, ids=None, covariate_names: Sequence[str] = ()) -> "CausalData":
        t = np.asarray(t)
        if x is None:
            x = np.empty((t.shape[0], 0))
        return cls(t, y, x, ids, tuple(covariate_names))

    @classmethod
    def from_table(cls, table, treatment=None, covariates: Sequence[str] | None = None) -> "CausalData":
        """From an ``AuditTable``; ``treatment`` overrides the accuracy-based T."""
        names = table.covariate_names if covariates is None else tuple(covariates)
        t = table.T if treatment is None else np.asarray(treatment)
        return cls(t, table.Y, table.covariates(names), table.node_ids, tuple(names))

    def __len__(self) -> int:
        return int(self.t.shape[0])

    def subset(self, idx: np.ndarray) -> "CausalData":
        return CausalData(self.t[idx], self.y[idx], self.x[idx], self.ids[idx], self.covariate_names)

    def select(self, names: Sequence[str]) -> "CausalData":
        cols = [self.covariate_names.index(n) for n in names]
        return CausalData(self.t, self.y, self.x[:, cols], self.ids, tuple(names))

    @property
    def n1(self) -> int:
        return int(self.t.sum())

    @property
    def n0(self) -> int:
        return len(self) - self.n1


@dataclass(frozen=True)
class EffectEstimate:
    method: str
    ate: float
    se: float | None
    ci95: tuple[float, float] | None
    z: float | None
    p_value: float | None
    rd: float
    rr: float | None
    diagnostics: dict = field(default_factory=dict, compare=False)

    @classmethod
    def from_se(cls, method: str, ate: float, se: float | None, rr: float | None, **diag) -> "EffectEstimate":
        if se is None or not math.isfinite(se):
            return cls(method, ate, None, None, None, None, ate, rr, diag)
        ci = (ate - Z_975 * se, ate + Z_975 * se)
        if se > 0:
            z = ate / se
            p = two_sided_p(z)
        else:
            z = None
            p = None
        return cls(method, ate, se, ci, z, p, ate, rr, diag)
