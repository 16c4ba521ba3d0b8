"""Prediction logs, node-level treatment/outcome assignment and the audit table."""

from __future__ import annotations

import math
import os
from collections import defaultdict
from dataclasses import dataclass, field
from typing import Mapping, Sequence

import numpy as np

from .graph import GraphFormatError, HeteroGraph
from .metrics import AGGREGATES, IndicatorVector, NodeStructuralProfile

__all__ = [
    "MODELS",
    "OUTCOME_SPECS",
    "PredictionLog",
    "AuditRow",
    "AuditTable",
    "load_predictions",
    "write_predictions",
    "success_probability",
    "assign_treatment",
    "default_covariates",
    "build_audit_table",
]

MODELS = ("hetero", "homo")
OUTCOME_SPECS = ("hetero_majority", "homo_majority", "hetero_all_seeds", "hetero_wins")


@dataclass(frozen=True)
class PredictionLog:
    """``preds[model][seed][node] -> predicted class``."""

    preds: Mapping[str, Mapping[int, Mapping[int, int]]]

    def __post_init__(self):
        for m in self.preds:
            if m not in MODELS:
                raise ValueError(f"unknown model id {m!r}")
        seed_sets = {m: frozenset(s) for m, s in self.preds.items()}
        if len(set(seed_sets.values())) > 1:
            raise ValueError("seed sets differ between models")
        for m, by_seed in self.preds.items():
            node_sets = {frozenset(nodes) for nodes in by_seed.values()}
            if len(node_sets) > 1:
                raise ValueError(f"model {m!r}: evaluated nodes differ between seeds")

    @property
    def seeds(self) -> tuple[int, ...]:
        for by_seed in self.preds.values():
            return tuple(sorted(by_seed))
        return ()

    @property
    def seed_count(self) -> int:
        return len(self.seeds)

    def evaluated(self, model_id: str) -> frozenset[int]:
        by_seed = self.preds.get(model_id, {})
        for nodes in by_seed.values():
            return frozenset(nodes)
        return frozenset()

    @classmethod
    def from_records(cls, records) -> "PredictionLog":
        """Build from ``(model_id, seed, node_id, predicted_label)`` tuples."""
        preds: dict = defaultdict(lambda: defaultdict(dict))
        for model, seed, node, label in records:
            if model not in MODELS:
                raise ValueError(f"unknown model id {model!r}")
            if node in preds[model][seed]:
                raise ValueError(f"duplicate record ({model}, {seed}, {node})")
            preds[model][seed][node] = int(label)
        return cls({m: {s: dict(n) for s, n in by.items()} for m, by in preds.items()})


def load_predictions(path: str, g: HeteroGraph) -> PredictionLog:
    """Parse ``preds.tsv`` (``model_id, seed, node_id, predicted_label``)."""
    if not os.path.isfile(path):
        raise GraphFormatError(f"missing file {path}")
    records = []
    seen = set()
    with open(path, encoding="utf-8", newline="") as fh:
        for lineno, raw in enumerate(fh, start=1):
            line = raw.rstrip("\r\n")
            if not line.strip() or line.lstrip().startswith("#"):
                continue
            cols = [c.strip() for c in line.split("\t")]
            if len(cols) != 4:
                raise GraphFormatError(f"expected 4 columns, got {len(cols)}", path, lineno)
            model, seed, name, label = cols
            if model not in MODELS:
                raise GraphFormatError(f"unknown model id {model!r}", path, lineno)
            if name not in g._index:
                raise GraphFormatError(f"unknown node {name!r}", path, lineno)
            try:
                seed_i, label_i = int(seed), int(label)
            except ValueError:
                raise GraphFormatError("malformed seed or label", path, lineno) from None
            if not 0 <= label_i < g.num_classes:
                raise GraphFormatError(f"predicted label {label_i} out of range", path, lineno)
            key = (model, seed_i, g._index[name])
            if key in seen:
                raise GraphFormatError("duplicate record", path, lineno)
            seen.add(key)
            records.append((model, seed_i, g._index[name], label_i))
    try:
        return PredictionLog.from_records(records)
    except ValueError as exc:
        raise GraphFormatError(str(exc), path) from None


def write_predictions(log: PredictionLog, g: HeteroGraph, path: str) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write("# model_id\tseed\tnode_id\tpredicted_label\n")
        for m in MODELS:
            for seed in sorted(log.preds.get(m, {})):
                nodes = log.preds[m][seed]
                for v in sorted(nodes):
                    fh.write(f"{m}\t{seed}\t{g.names[v]}\t{nodes[v]}\n")


def success_probability(log: PredictionLog, model_id: str, v: int, labels: Mapping[int, int]) -> float:
    """Fraction of seeds in which ``model_id`` predicts ``v``'s true label."""
    if v not in labels:
        raise ValueError(f"node {v} is unlabeled")
    by_seed = log.preds.get(model_id)
    if not by_seed:
        raise KeyError(f"no records for model {model_id!r}")
    hits = 0
    for seed, nodes in by_seed.items():
        if v not in nodes:
            raise KeyError(f"missing record ({model_id}, {seed}, {v})")
        hits += nodes[v] == labels[v]
    return hits / len(by_seed)


def assign_treatment(pi_hetero: float, pi_homo: float) -> int:
    """1 iff the heterogeneous model is strictly more often correct; ties go to control."""
    for x in (pi_hetero, pi_homo):
        if not 0.0 <= x <= 1.0:
            raise ValueError(f"probability {x} outside [0, 1]")
    return int(pi_hetero > pi_homo)


def _outcome(spec: str, pi_h: float, pi_g: float, s: int) -> int:
    if spec == "hetero_majority":
        return int(pi_h > 0.5)
    if spec == "homo_majority":
        return int(pi_g > 0.5)
    if spec == "hetero_all_seeds":
        return int(round(pi_h * s) == s)
    if spec == "hetero_wins":
        return assign_treatment(pi_h, pi_g)
    raise ValueError(f"unknown outcome_spec {spec!r}; expected one of {OUTCOME_SPECS}")


@dataclass(frozen=True)
class AuditRow:
    node_id: int
    pi_hetero: float
    pi_homo: float
    T: int
    Y: int
    Z_cov: np.ndarray
    indicators: IndicatorVector


@dataclass(frozen=True)
class AuditTable:
    rows: tuple[AuditRow, ...]
    covariate_names: tuple[str, ...]
    outcome_definition: str
    seed_count: int
    excluded_nodes: tuple[int, ...] = field(default=())

    def __len__(self) -> int:
        return len(self.rows)

    @property
    def node_ids(self) -> np.ndarray:
        return np.array([r.node_id for r in self.rows], dtype=np.int64)

    @property
    def T(self) -> np.ndarray:
        return np.array([r.T for r in self.rows], dtype=np.int64)

    @property
    def Y(self) -> np.ndarray:
        return np.array([r.Y for r in self.rows], dtype=np.int64)

    def covariates(self, names: Sequence[str] | None = None) -> np.ndarray:
        X = np.array([r.Z_cov for r in self.rows], dtype=float).reshape(len(self.rows), len(self.covariate_names))
        if names is None:
            return X
        idx = []
        for n in names:
            if n not in self.covariate_names:
                raise KeyError(f"unknown covariate {n!r}")
            idx.append(self.covariate_names.index(n))
        return X[:, idx]


def default_covariates(g: HeteroGraph) -> list[str]:
    return [f"log_deg:{r}" for r in g.relations] + ["log_deg:proj", "H_avg", "D_avg"]


def _covariate_value(name: str, p: NodeStructuralProfile) -> float:
    if name.startswith("log_deg:"):
        rel = name.split(":", 1)[1]
        if rel == "proj":
            return math.log1p(p.projection.n)
        if rel not in p.per_relation:
            raise KeyError(f"unknown covariate {name!r}")
        return math.log1p(p.per_relation[rel].n)
    if name.startswith("deg:"):
        rel = name.split(":", 1)[1]
        if rel == "proj":
            return float(p.projection.n)
        if rel not in p.per_relation:
            raise KeyError(f"unknown covariate {name!r}")
        return float(p.per_relation[rel].n)
    if name in ("H_proj", "D_proj"):
        val = getattr(p.projection, name[0])
        return float("nan") if val is None else val
    parts = name.split("_")
    if len(parts) == 2 and parts[0] in ("H", "D") and parts[1] in AGGREGATES:
        val = p.aggregate(parts[0], parts[1])
        return float("nan") if val is None else val
    raise KeyError(f"unknown covariate {name!r}")


def _check_covariate_name(name: str, g: HeteroGraph) -> None:
    ok = False
    for prefix in ("log_deg:", "deg:"):
        if name.startswith(prefix):
            rel = name[len(prefix):]
            ok = ok or rel == "proj" or rel in g.relations
    if name in ("H_proj", "D_proj"):
        ok = True
    parts = name.split("_")
    if len(parts) == 2 and parts[0] in ("H", "D") and parts[1] in AGGREGATES:
        ok = True
    if not ok:
        raise KeyError(f"unknown covariate {name!r}")


def build_audit_table(
    graph: HeteroGraph,
    profiles: Sequence[NodeStructuralProfile],
    indicators: Sequence[IndicatorVector],
    log: PredictionLog,
    outcome_spec: str = "hetero_majority",
    covariate_spec: Sequence[str] | None = None,
    splits: Mapping[int, str] | None = None,
    standardize: bool = True,
) -> AuditTable:
    """Assemble one row per eligible node, sorted by node id.

    Eligible nodes are the test split when ``splits`` is given, otherwise all
    labeled target nodes, minus nodes whose metrics are undefined under every
    relation (returned in ``excluded_nodes``). Covariates are standardized
    with population statistics over the eligible set.
    """
    if outcome_spec not in OUTCOME_SPECS:
        raise ValueError(f"unknown outcome_spec {outcome_spec!r}; expected one of {OUTCOME_SPECS}")
    names = list(default_covariates(graph) if covariate_spec is None else covariate_spec)
    for n in names:
        _check_covariate_name(n, graph)

    prof_by = {p.node_id: p for p in profiles}
    ind_by = {iv.node_id: iv for iv in indicators}
    if splits:
        candidates = sorted(v for v, s in splits.items() if s == "test")
    else:
        candidates = sorted(graph.labels)
    s = log.seed_count
    if s == 0:
        raise ValueError("prediction log is empty")

    eligible, excluded = [], []
    for v in candidates:
        p = prof_by.get(v)
        if p is None or v not in ind_by:
            raise KeyError(f"no profile for node {graph.names[v]!r}")
        (eligible if p.defined else excluded).append(v)
    if not eligible:
        raise ValueError("no eligible nodes for the audit table")

    raw = np.array([[_covariate_value(n, prof_by[v]) for n in names] for v in eligible], dtype=float)
    raw = raw.reshape(len(eligible), len(names))
    if standardize and raw.size:
        mu = raw.mean(axis=0)
        sd = raw.std(axis=0)
        sd[sd == 0] = 1.0
        raw = (raw - mu) / sd

    rows = []
    for i, v in enumerate(eligible):
        pi_h = success_probability(log, "hetero", v, graph.labels)
        pi_g = success_probability(log, "homo", v, graph.labels)
        rows.append(
            AuditRow(
                node_id=v,
                pi_hetero=pi_h,
                pi_homo=pi_g,
                T=assign_treatment(pi_h, pi_g),
                Y=_outcome(outcome_spec, pi_h, pi_g, s),
                Z_cov=raw[i].copy(),
                indicators=ind_by[v],
            )
        )
    return AuditTable(tuple(rows), tuple(names), outcome_spec, s, tuple(excluded))
