"""Node-level homophily and local/global label discrepancy.

Per relation ``r`` and labeled node ``v``:

* ``H_r(v)`` is the fraction of labeled neighbors sharing ``v``'s label;
* ``D_r(v)`` is the total-variation distance between the neighbors' label
  histogram and the global label distribution.

Unlabeled neighbors are skipped; a value is undefined (``None``) when ``v``
has no labeled neighbor under ``r``. Aggregates run over defined relations
only, summed in ascending relation-name order.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Iterable, Mapping, Sequence

import numpy as np

from .graph import HeteroGraph, HomoProjection, neighborhood

__all__ = [
    "METRICS",
    "AGGREGATES",
    "RelationValues",
    "NodeStructuralProfile",
    "IndicatorVector",
    "homophily",
    "local_label_distribution",
    "global_label_distribution",
    "tv_discrepancy",
    "aggregate_relations",
    "node_profile",
    "compute_profiles",
    "compute_indicators",
    "write_profiles",
    "write_indicators",
]

METRICS = ("H", "D")
AGGREGATES = ("min", "max", "avg")


def _labeled_counts(g, v: int, r: str | None) -> tuple[np.ndarray, int]:
    nb = neighborhood(g, v, r)
    lab = g.y[nb]
    lab = lab[lab >= 0]
    return np.bincount(lab, minlength=g.num_classes), int(lab.size)


def homophily(g: HeteroGraph | HomoProjection, v: int, r: str | None = None) -> float | None:
    """Same-label fraction among labeled neighbors of ``v``; None if there are none."""
    if v not in g.labels:
        raise ValueError(f"node {v} is unlabeled")
    counts, n = _labeled_counts(g, v, r)
    if n == 0:
        return None
    return int(counts[g.labels[v]]) / n


def local_label_distribution(g, v: int, r: str | None = None) -> np.ndarray | None:
    counts, n = _labeled_counts(g, v, r)
    if n == 0:
        return None
    return counts / n


def global_label_distribution(g: HeteroGraph | HomoProjection) -> np.ndarray:
    """Class frequencies over all labeled (target-type) nodes."""
    if not g.labels:
        raise ValueError("graph has no labeled nodes")
    counts = np.bincount(np.fromiter(g.labels.values(), dtype=np.int64), minlength=g.num_classes)
    return counts / counts.sum()


def tv_discrepancy(local: Sequence[float], glob: Sequence[float]) -> float:
    """Half the L1 distance between two distributions."""
    if len(local) != len(glob):
        raise ValueError(f"length mismatch: {len(local)} vs {len(glob)}")
    total = 0.0
    for a, b in zip(local, glob):
        total += abs(float(a) - float(b))
    return 0.5 * total


def aggregate_relations(values: Mapping[str, float | None]) -> tuple[float, float, float]:
    """(min, max, mean) over defined values; summation in ascending key order."""
    defined = [(k, v) for k, v in sorted(values.items()) if v is not None]
    if not defined:
        raise ValueError("no defined relation values to aggregate")
    vals = [v for _, v in defined]
    total = 0.0
    for x in vals:
        total += x
    return min(vals), max(vals), total / len(vals)


@dataclass(frozen=True)
class RelationValues:
    H: float | None
    D: float | None
    n: int  # neighborhood size, unlabeled neighbors included
    n_labeled: int


@dataclass(frozen=True)
class NodeStructuralProfile:
    node_id: int
    per_relation: dict[str, RelationValues]
    aggregates: dict[str, tuple[float, float, float] | None]  # "H"/"D" -> (min, max, avg)
    projection: RelationValues

    def aggregate(self, metric: str, agg: str) -> float | None:
        trio = self.aggregates[metric]
        if trio is None:
            return None
        return trio[AGGREGATES.index(agg)]

    @property
    def defined(self) -> bool:
        """True when some relation yields a defined value."""
        return self.aggregates["H"] is not None


@dataclass(frozen=True)
class IndicatorVector:
    node_id: int
    Z: dict[tuple[str, str], int | None]

    def __getitem__(self, key: tuple[str, str]) -> int | None:
        return self.Z[key]


def _values(g, v: int, r: str | None, pglob: np.ndarray) -> RelationValues:
    counts, n_lab = _labeled_counts(g, v, r)
    n = int(neighborhood(g, v, r).size)
    if n_lab == 0:
        return RelationValues(None, None, n, 0)
    h = int(counts[g.labels[v]]) / n_lab
    d = tv_discrepancy(counts / n_lab, pglob)
    return RelationValues(h, d, n, n_lab)


def node_profile(
    g: HeteroGraph,
    proj: HomoProjection,
    v: int,
    pglob: np.ndarray | None = None,
) -> NodeStructuralProfile:
    if v not in g.labels:
        raise ValueError(f"node {v} is unlabeled")
    if pglob is None:
        pglob = global_label_distribution(g)
    per = {r: _values(g, v, r, pglob) for r in g.relations}
    aggs: dict[str, tuple[float, float, float] | None] = {}
    for m in METRICS:
        vals = {r: getattr(rv, m) for r, rv in per.items()}
        aggs[m] = aggregate_relations(vals) if any(x is not None for x in vals.values()) else None
    return NodeStructuralProfile(v, per, aggs, _values(proj, v, None, pglob))


def compute_profiles(
    g: HeteroGraph,
    proj: HomoProjection | None = None,
    nodes: Iterable[int] | None = None,
    threads: int = 1,
) -> list[NodeStructuralProfile]:
    """Profiles of ``nodes`` (default: every labeled node), ascending node id."""
    if proj is None:
        from .graph import project_homogeneous

        proj = project_homogeneous(g)
    # materialise lazily-built adjacency before fanning out
    _ = g.adjacency, proj.adjacency, g.y, proj.y
    pglob = global_label_distribution(g)
    ids = sorted(g.labels if nodes is None else nodes)
    if threads <= 1:
        return [node_profile(g, proj, v, pglob) for v in ids]
    with ThreadPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(lambda v: node_profile(g, proj, v, pglob), ids))


def compute_indicators(profile: NodeStructuralProfile) -> IndicatorVector:
    """``Z[M, A] = 1`` iff the projection value is strictly below the heterogeneous aggregate."""
    z: dict[tuple[str, str], int | None] = {}
    for m in METRICS:
        proj_val = getattr(profile.projection, m)
        for a in AGGREGATES:
            agg_val = profile.aggregate(m, a)
            z[(m, a)] = None if proj_val is None or agg_val is None else int(proj_val < agg_val)
    return IndicatorVector(profile.node_id, z)


# --------------------------------------------------------------------------- export


def _fmt(x: float | None) -> str:
    return "-" if x is None or (isinstance(x, float) and math.isnan(x)) else f"{x:.6f}"


def write_profiles(profiles: Sequence[NodeStructuralProfile], g: HeteroGraph, path: str) -> None:
    """One row per (node, relation), then aggregate rows ``*min``/``*max``/``*avg`` and ``*proj``."""
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write("node_id\trelation\tH_r\tD_r\tn_r\n")
        for p in profiles:
            name = g.names[p.node_id]
            for r, rv in p.per_relation.items():
                fh.write(f"{name}\t{r}\t{_fmt(rv.H)}\t{_fmt(rv.D)}\t{rv.n}\n")
            for a in AGGREGATES:
                fh.write(f"{name}\t*{a}\t{_fmt(p.aggregate('H', a))}\t{_fmt(p.aggregate('D', a))}\t-\n")
            pr = p.projection
            fh.write(f"{name}\t*proj\t{_fmt(pr.H)}\t{_fmt(pr.D)}\t{pr.n}\n")


def write_indicators(indicators: Sequence[IndicatorVector], g: HeteroGraph, path: str) -> None:
    keys = [(m, a) for m in METRICS for a in AGGREGATES]
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write("node_id\t" + "\t".join(f"Z_{m}_{a}" for m, a in keys) + "\n")
        for iv in indicators:
            cells = ["-" if iv.Z[k] is None else str(iv.Z[k]) for k in keys]
            fh.write(g.names[iv.node_id] + "\t" + "\t".join(cells) + "\n")
