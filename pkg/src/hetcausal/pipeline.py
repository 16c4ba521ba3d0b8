"""End-to-end steps shared by the command line and the example scripts."""

from __future__ import annotations

import os
from dataclasses import dataclass
from typing import Sequence

from .graph import HeteroGraph, load_graph, load_splits, project_homogeneous, write_graph, write_splits
from .metrics import IndicatorVector, NodeStructuralProfile, compute_indicators, compute_profiles
from .patterns import (
    AuditConfig,
    PatternReport,
    PatternSpec,
    audit_patterns,
    builtin_patterns,
    evaluate_pattern,
    Match,
    occurrence_stats,
)
from .report import reports_to_dict
from .synth import GraphGenConfig, PlantConfig, RelationSpec, generate_graph, generate_predictions, generate_splits
from .treatment import AuditTable, build_audit_table, load_predictions, write_predictions

__all__ = ["GraphBundle", "load_bundle", "structural_metrics", "audit", "synthesize"]


@dataclass(frozen=True)
class GraphBundle:
    graph: HeteroGraph
    splits: dict[int, str] | None


def load_bundle(graph_dir: str) -> GraphBundle:
    g = load_graph(os.path.join(graph_dir, "nodes.tsv"), os.path.join(graph_dir, "edges.tsv"))
    sp = os.path.join(graph_dir, "splits.tsv")
    return GraphBundle(g, load_splits(sp, g) if os.path.isfile(sp) else None)


def structural_metrics(g: HeteroGraph, threads: int = 1) -> tuple[list[NodeStructuralProfile], list[IndicatorVector]]:
    profiles = compute_profiles(g, project_homogeneous(g), threads=threads)
    return profiles, [compute_indicators(p) for p in profiles]


def audit(
    bundle: GraphBundle,
    preds_path: str,
    config: AuditConfig,
    specs: Sequence[PatternSpec] | None = None,
    outcome_spec: str = "hetero_majority",
    covariate_spec: Sequence[str] | None = None,
    threads: int = 1,
) -> tuple[dict, AuditTable, list[PatternReport]]:
    g = bundle.graph
    specs = list(builtin_patterns() if specs is None else specs)
    profiles, indicators = structural_metrics(g, threads)
    log = load_predictions(preds_path, g)
    table = build_audit_table(g, profiles, indicators, log, outcome_spec, covariate_spec, bundle.splits)
    reports = audit_patterns(table, specs, config, threads)
    occ = occurrence_stats([r.indicators for r in table.rows], specs)
    meta = {
        "n_nodes": g.num_nodes,
        "n_relations": len(g.relations),
        "n_evaluated": len(table),
        "excluded_nodes": len(table.excluded_nodes),
        "seeds": table.seed_count,
        "outcome": outcome_spec,
        "alpha": config.alpha,
        "n_min": config.n_min,
        "s_min": config.s_min,
        "clip": config.clip,
        "bootstrap": config.n_bootstrap,
        "seed": config.seed,
    }
    return reports_to_dict(reports, occ, meta), table, reports


def synthesize(
    out_dir: str,
    n_nodes: int = 4000,
    true_ate: float = 0.08,
    seed: int = 0,
    n_classes: int = 4,
    degree: int = 5,
    homophily: Sequence[float] = (0.3, 0.3, 0.3),
    plant: str = "P1",
    seeds: int = 5,
    with_splits: bool = False,
) -> HeteroGraph:
    """Write ``nodes.tsv``, ``edges.tsv``, ``preds.tsv`` (and optionally ``splits.tsv``).

    The heterogeneous model's majority-correctness is planted to depend on
    the named built-in pattern with risk difference ``true_ate``.
    """
    if n_nodes <= 0:
        raise ValueError(f"node count must be positive, got {n_nodes}")
    rels = tuple(RelationSpec(f"r{i}", "paper", "paper", h, degree) for i, h in enumerate(homophily))
    cfg = GraphGenConfig({"paper": n_nodes}, rels, "paper", tuple([1.0 / n_classes] * n_classes), seed)
    g = generate_graph(cfg)
    spec = {s.name: s for s in builtin_patterns()}.get(plant)
    if spec is None:
        raise ValueError(f"unknown pattern {plant!r}")
    _, indicators = structural_metrics(g)
    factor = {iv.node_id: int(evaluate_pattern(spec, iv) is Match.MATCH) for iv in indicators}
    log = generate_predictions(g, factor, PlantConfig(true_ate=true_ate, seeds=seeds, seed=seed))
    os.makedirs(out_dir, exist_ok=True)
    write_graph(g, os.path.join(out_dir, "nodes.tsv"), os.path.join(out_dir, "edges.tsv"))
    write_predictions(log, g, os.path.join(out_dir, "preds.tsv"))
    if with_splits:
        write_splits(g, generate_splits(g, seed=seed), os.path.join(out_dir, "splits.tsv"))
    return g
