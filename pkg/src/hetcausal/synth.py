"""Synthetic typed graphs and causal tables with known ground truth.

Randomness comes from Philox, a counter-based generator, keyed by
``(seed, stream)``; each logical quantity (labels, a relation's wiring, the
covariates, ...) owns a stream, so outputs do not depend on call order.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Mapping, Sequence

import numpy as np
from numpy.polynomial.hermite_e import hermegauss
from scipy.optimize import brentq
from scipy.special import expit

from .estimators.core import CausalData
from .graph import HeteroGraph
from .treatment import PredictionLog

__all__ = [
    "RelationSpec",
    "GraphGenConfig",
    "CausalGenConfig",
    "PotentialOutcomes",
    "PlantConfig",
    "rng_for",
    "generate_graph",
    "generate_splits",
    "generate_causal_table",
    "calibrate_shift",
    "generate_predictions",
]

# stream ids
_LABELS, _SPLITS, _COVARIATES, _TREATMENT, _OUTCOME, _PREDS = 1, 2, 3, 4, 5, 6
_RELATION_BASE = 1000


def rng_for(seed: int, stream: int) -> np.random.Generator:
    if seed < 0 or stream < 0:
        raise ValueError("seed and stream must be nonnegative")
    return np.random.Generator(np.random.Philox(key=np.array([seed, stream], dtype=np.uint64)))


# --------------------------------------------------------------------------- graphs


@dataclass(frozen=True)
class RelationSpec:
    name: str
    src_type: str
    dst_type: str
    homophily: float | None = None  # target-to-target relations only
    degree: int = 5


@dataclass(frozen=True)
class GraphGenConfig:
    n_nodes: Mapping[str, int] = field(default_factory=lambda: {"paper": 2000})
    relations: Sequence[RelationSpec] = (
        RelationSpec("pap", "paper", "paper", 0.3),
        RelationSpec("psp", "paper", "paper", 0.3),
        RelationSpec("ptp", "paper", "paper", 0.3),
    )
    target_type: str = "paper"
    class_weights: Sequence[float] = (0.25, 0.25, 0.25, 0.25)
    seed: int = 0

    def validate(self) -> None:
        if self.target_type not in self.n_nodes:
            raise ValueError(f"target type {self.target_type!r} has no node count")
        for t, n in self.n_nodes.items():
            if int(n) != n or n <= 0:
                raise ValueError(f"node count for {t!r} must be a positive integer, got {n}")
        w = np.asarray(self.class_weights, dtype=float)
        if w.size < 2 or (w < 0).any() or abs(w.sum() - 1) > 1e-9:
            raise ValueError("class_weights must be >= 2 nonnegative values summing to 1")
        if not self.relations:
            raise ValueError("at least one relation required")
        names = [r.name for r in self.relations]
        if len(set(names)) != len(names):
            raise ValueError("duplicate relation name")
        for r in self.relations:
            for t in (r.src_type, r.dst_type):
                if t not in self.n_nodes:
                    raise ValueError(f"relation {r.name!r} references unknown type {t!r}")
            if r.homophily is not None:
                if not 0 <= r.homophily <= 1:
                    raise ValueError(f"homophily of {r.name!r} outside [0, 1]")
                if r.src_type != self.target_type or r.dst_type != self.target_type:
                    raise ValueError(f"homophily only applies to target-to-target relations ({r.name!r})")
            if r.degree < 1 or r.degree >= self.n_nodes[r.dst_type]:
                raise ValueError(f"infeasible degree {r.degree} for relation {r.name!r}")


def generate_graph(cfg: GraphGenConfig) -> HeteroGraph:
    """Each source node draws ``degree`` distinct neighbors per relation.

    For homophilous relations a neighbor shares the source's label with
    probability ``homophily``; otherwise it is drawn from the other classes.
    Other relations are wired uniformly at random.
    """
    cfg.validate()
    types, offsets = [], {}
    for t, n in cfg.n_nodes.items():
        offsets[t] = len(types)
        types.extend([t] * int(n))
    n_target = int(cfg.n_nodes[cfg.target_type])
    tgt0 = offsets[cfg.target_type]
    C = len(cfg.class_weights)

    labels_arr = rng_for(cfg.seed, _LABELS).choice(C, size=n_target, p=np.asarray(cfg.class_weights))
    pools = [np.nonzero(labels_arr == c)[0] for c in range(C)]
    others = [np.nonzero(labels_arr != c)[0] for c in range(C)]

    edges: list[tuple[int, str, int]] = []
    for k, rel in enumerate(cfg.relations):
        rng = rng_for(cfg.seed, _RELATION_BASE + k)
        n_src, n_dst = int(cfg.n_nodes[rel.src_type]), int(cfg.n_nodes[rel.dst_type])
        s0, d0 = offsets[rel.src_type], offsets[rel.dst_type]
        for i in range(n_src):
            chosen: set[int] = set()
            while len(chosen) < rel.degree:
                if rel.homophily is None:
                    j = int(rng.integers(n_dst))
                else:
                    c = labels_arr[i]
                    pool = pools[c] if rng.random() < rel.homophily else others[c]
                    if pool.size == 0 or (pool.size == 1 and pool[0] == i):
                        raise ValueError(f"relation {rel.name!r}: no eligible neighbor for node {i}")
                    j = int(pool[rng.integers(pool.size)])
                if s0 == d0 and j == i:
                    continue
                chosen.add(j)
            edges.extend((s0 + i, rel.name, d0 + j) for j in sorted(chosen))
    names = tuple(str(v) for v in range(len(types)))
    labels = {tgt0 + i: int(c) for i, c in enumerate(labels_arr)}
    return HeteroGraph(names, tuple(types), tuple(edges), labels, cfg.target_type, C)


def generate_splits(g: HeteroGraph, fractions=(0.6, 0.2, 0.2), seed: int = 0) -> dict[int, str]:
    ids = np.array(sorted(g.labels))
    perm = rng_for(seed, _SPLITS).permutation(ids.size)
    n_tr = int(round(fractions[0] * ids.size))
    n_va = int(round(fractions[1] * ids.size))
    out = {}
    for rank, idx in enumerate(perm):
        out[int(ids[idx])] = "train" if rank < n_tr else "val" if rank < n_tr + n_va else "test"
    return dict(sorted(out.items()))


# --------------------------------------------------------------------------- causal tables


@dataclass(frozen=True)
class CausalGenConfig:
    n: int = 10_000
    true_ate: float = 0.08
    gamma: float = 0.0
    d: int = 3
    seed: int = 0
    base_logit: float = 0.0
    monotone: bool = True

    def validate(self) -> None:
        if self.n <= 0 or self.d < 1:
            raise ValueError("n and d must be positive")
        if not -1 < self.true_ate < 1:
            raise ValueError("true_ate must lie in (-1, 1)")


@dataclass(frozen=True)
class PotentialOutcomes:
    y0: np.ndarray
    y1: np.ndarray
    mu0: np.ndarray
    mu1: np.ndarray
    propensity: np.ndarray


_GH_X, _GH_W = hermegauss(96)
_GH_W = _GH_W / _GH_W.sum()


def calibrate_shift(true_ate: float, base_logit: float = 0.0, gamma: float = 0.0) -> float:
    """Logit shift ``s`` with ``E[expit(b + s + g Z) - expit(b + g Z)] = true_ate`` for ``Z ~ N(0, 1)``."""
    base = expit(base_logit + gamma * _GH_X)

    def gap(s):
        return float(_GH_W @ (expit(base_logit + s + gamma * _GH_X) - base)) - true_ate

    lo, hi = -40.0, 40.0
    if gap(lo) > 0 or gap(hi) < 0:
        raise ValueError(f"true_ate {true_ate} unattainable with base logit {base_logit} and gamma {gamma}")
    return brentq(gap, lo, hi, xtol=1e-14)


def generate_causal_table(cfg: CausalGenConfig) -> tuple[CausalData, PotentialOutcomes]:
    """Confounded binary design: the first covariate drives both treatment and outcome.

    ``T ~ Bernoulli(expit(gamma * Z1))`` and
    ``Y(t) ~ Bernoulli(expit(base + shift * t + gamma * Z1))``. With
    ``monotone`` both potential outcomes threshold one shared uniform, so
    ``Y(1) >= Y(0)`` row-wise whenever the shift is positive.
    """
    cfg.validate()
    shift = calibrate_shift(cfg.true_ate, cfg.base_logit, cfg.gamma)
    z = rng_for(cfg.seed, _COVARIATES).standard_normal((cfg.n, cfg.d))
    e = expit(cfg.gamma * z[:, 0])
    t = (rng_for(cfg.seed, _TREATMENT).random(cfg.n) < e).astype(np.int64)
    lin = cfg.base_logit + cfg.gamma * z[:, 0]
    mu0, mu1 = expit(lin), expit(lin + shift)
    out_rng = rng_for(cfg.seed, _OUTCOME)
    u0 = out_rng.random(cfg.n)
    u1 = u0 if cfg.monotone else out_rng.random(cfg.n)
    y0 = (u0 < mu0).astype(np.int64)
    y1 = (u1 < mu1).astype(np.int64)
    y = t * y1 + (1 - t) * y0
    names = tuple(f"z{j + 1}" for j in range(cfg.d))
    data = CausalData(t, y, z, np.arange(cfg.n), names)
    return data, PotentialOutcomes(y0, y1, mu0, mu1, e)


# --------------------------------------------------------------------------- prediction logs


@dataclass(frozen=True)
class PlantConfig:
    """Planted effect of a node-level factor on majority-correctness of the heterogeneous model."""

    true_ate: float = 0.08
    base_logit: float = 0.0
    seeds: int = 5
    homo_accuracy: float = 0.5
    seed: int = 0


def generate_predictions(g: HeteroGraph, factor: Mapping[int, int], cfg: PlantConfig) -> PredictionLog:
    """Prediction logs in which ``P(hetero majority-correct | factor=a)`` follows a logit shift.

    Nodes with ``factor = 1`` are majority-correct with probability
    ``expit(base + shift)``, the rest with ``expit(base)``, where ``shift`` is
    calibrated to ``true_ate``. Correct-seed counts are then drawn uniformly
    from the majority (or minority) range; the homogeneous model is correct
    in each seed independently with probability ``homo_accuracy``.
    """
    if cfg.seeds < 1:
        raise ValueError("need at least one seed")
    shift = calibrate_shift(cfg.true_ate, cfg.base_logit, 0.0)
    rng = rng_for(cfg.seed, _PREDS)
    s, C = cfg.seeds, g.num_classes
    maj = s // 2 + 1  # smallest count with hits / s > 1/2
    hetero: dict[int, dict[int, int]] = {k: {} for k in range(s)}
    homo: dict[int, dict[int, int]] = {k: {} for k in range(s)}
    for v in sorted(factor):
        y = g.labels[v]
        p = expit(cfg.base_logit + shift * factor[v])
        good = rng.random() < p
        k = int(rng.integers(maj, s + 1)) if good else int(rng.integers(0, maj))
        hits_h = np.zeros(s, dtype=bool)
        hits_h[rng.permutation(s)[:k]] = True
        hits_g = rng.random(s) < cfg.homo_accuracy
        wrong = (y + 1 + rng.integers(0, C - 1, size=2 * s)) % C
        for k_seed in range(s):
            hetero[k_seed][v] = y if hits_h[k_seed] else int(wrong[k_seed])
            homo[k_seed][v] = y if hits_g[k_seed] else int(wrong[s + k_seed])
    return PredictionLog({"hetero": hetero, "homo": homo})
