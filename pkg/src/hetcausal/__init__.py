"""Causal audit of heterogeneous-graph learning.

Structural metrics on a typed graph and its homogeneous projection, node-level
treatments from prediction logs, and a battery of effect estimators for
structural indicator patterns.
"""

from .graph import HeteroGraph, HomoProjection, load_graph, neighborhood, project_homogeneous
from .metrics import compute_indicators, compute_profiles, global_label_distribution, homophily, tv_discrepancy
from .patterns import AuditConfig, PatternSpec, audit_patterns, builtin_patterns, occurrence_stats, run_pattern_audit
from .treatment import AuditTable, PredictionLog, build_audit_table

__version__ = "0.1.0"

__all__ = [
    "HeteroGraph",
    "HomoProjection",
    "load_graph",
    "neighborhood",
    "project_homogeneous",
    "compute_profiles",
    "compute_indicators",
    "global_label_distribution",
    "homophily",
    "tv_discrepancy",
    "AuditConfig",
    "PatternSpec",
    "audit_patterns",
    "builtin_patterns",
    "occurrence_stats",
    "run_pattern_audit",
    "AuditTable",
    "PredictionLog",
    "build_audit_table",
]
