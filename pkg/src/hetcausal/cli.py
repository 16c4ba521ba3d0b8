"""Command line: ``hetcausal {metrics,audit,synth,report}``.

Settings resolve as built-in defaults < ``--config`` file < explicit flags.
The config file holds ``key = value`` lines (``#`` comments allowed) whose
keys are flag names with or without the leading dashes.

Exit codes: 0 success, 1 internal error, 2 user or input error.
"""

from __future__ import annotations

import argparse
import json
import logging
import os
import sys
from typing import Sequence

from .graph import GraphFormatError
from .metrics import write_indicators, write_profiles
from .patterns import AuditConfig, builtin_patterns, load_patterns
from .pipeline import audit, load_bundle, structural_metrics, synthesize
from .report import dump_effects, render_csv, render_markdown

logger = logging.getLogger("hetcausal")

DEFAULTS = {
    "graph_dir": None,
    "preds": None,
    "out": ".",
    "alpha": 0.05,
    "n_min": 30,
    "s_min": 5,
    "clip": 0.01,
    "bootstrap": 200,
    "seed": 0,
    "threads": 1,
    "outcome": "hetero_majority",
    "covariates": None,
    "adjust": "search",
    "search_k": 2,
    "balance": 0.1,
    "rr_floor": 1.1,
    "patterns": None,
    "adjusted_pn_ps": False,
    # synth
    "nodes": 4000,
    "classes": 4,
    "degree": 5,
    "homophily": "0.3,0.3,0.3",
    "true_ate": 0.08,
    "plant": "P1",
    "seeds": 5,
    "splits": False,
}

_TYPES = {
    "alpha": float, "clip": float, "balance": float, "rr_floor": float, "true_ate": float,
    "n_min": int, "s_min": int, "bootstrap": int, "seed": int, "threads": int, "search_k": int,
    "nodes": int, "classes": int, "degree": int, "seeds": int,
}
_BOOLS = {"adjusted_pn_ps", "splits"}


class UsageError(Exception):
    pass


def read_config(path: str) -> dict:
    if not os.path.isfile(path):
        raise UsageError(f"config file not found: {path}")
    out = {}
    with open(path, encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, start=1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise UsageError(f"{path}:{lineno}: expected key = value")
            key, val = (s.strip() for s in line.split("=", 1))
            key = key.lstrip("-").replace("-", "_")
            if key not in DEFAULTS:
                raise UsageError(f"{path}:{lineno}: unknown key {key!r}")
            out[key] = val
    return out


def _coerce(key: str, val):
    if val is None:
        return None
    if key in _BOOLS:
        if isinstance(val, bool):
            return val
        if str(val).lower() in ("1", "true", "yes", "on"):
            return True
        if str(val).lower() in ("0", "false", "no", "off"):
            return False
        raise UsageError(f"{key}: expected a boolean, got {val!r}")
    if key in _TYPES:
        try:
            return _TYPES[key](val)
        except ValueError:
            raise UsageError(f"{key}: expected {_TYPES[key].__name__}, got {val!r}") from None
    return val


def resolve(args: argparse.Namespace) -> dict:
    cfg = dict(DEFAULTS)
    if getattr(args, "config", None):
        cfg.update(read_config(args.config))
    for k in DEFAULTS:
        v = getattr(args, k, None)
        if v is not None:
            cfg[k] = v
    return {k: _coerce(k, v) for k, v in cfg.items()}


def audit_config(cfg: dict) -> AuditConfig:
    adjust = cfg["adjust"]
    adjustment = None
    if adjust and adjust != "search":
        adjustment = tuple(a.strip() for a in adjust.split(",") if a.strip()) if adjust != "none" else ()
    ac = AuditConfig(
        alpha=cfg["alpha"], n_min=cfg["n_min"], s_min=cfg["s_min"], clip=cfg["clip"],
        n_bootstrap=cfg["bootstrap"], seed=cfg["seed"], rr_floor=cfg["rr_floor"], adjustment=adjustment,
        search_k=cfg["search_k"], balance_threshold=cfg["balance"], adjusted_pn_ps=cfg["adjusted_pn_ps"],
    )
    try:
        ac.validate()
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    if cfg["threads"] < 1:
        raise UsageError("threads must be >= 1")
    return ac


def _write(path: str, text: str) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(text)


def _require_graph_dir(cfg: dict) -> str:
    if not cfg["graph_dir"]:
        raise UsageError("--graph-dir is required")
    return cfg["graph_dir"]


def cmd_metrics(cfg: dict) -> int:
    bundle = load_bundle(_require_graph_dir(cfg))
    profiles, indicators = structural_metrics(bundle.graph, cfg["threads"])
    os.makedirs(cfg["out"], exist_ok=True)
    write_profiles(profiles, bundle.graph, os.path.join(cfg["out"], "profiles.tsv"))
    write_indicators(indicators, bundle.graph, os.path.join(cfg["out"], "indicators.tsv"))
    logger.info("wrote metrics for %d nodes to %s", len(profiles), cfg["out"])
    return 0


def cmd_audit(cfg: dict) -> int:
    graph_dir = _require_graph_dir(cfg)
    preds = cfg["preds"] or os.path.join(graph_dir, "preds.tsv")
    ac = audit_config(cfg)
    specs = load_patterns(cfg["patterns"]) if cfg["patterns"] else builtin_patterns()
    covs = [c.strip() for c in cfg["covariates"].split(",")] if cfg["covariates"] else None
    bundle = load_bundle(graph_dir)
    try:
        doc, _, _ = audit(bundle, preds, ac, specs, cfg["outcome"], covs, cfg["threads"])
    except KeyError as exc:
        raise UsageError(str(exc).strip("'\"")) from None
    os.makedirs(cfg["out"], exist_ok=True)
    _write(os.path.join(cfg["out"], "effects.json"), dump_effects(doc))
    _write(os.path.join(cfg["out"], "patterns_report.md"), render_markdown(doc))
    _write(os.path.join(cfg["out"], "effects.csv"), render_csv(doc))
    logger.info("audited %d patterns; reports in %s", len(doc["patterns"]), cfg["out"])
    return 0


def cmd_synth(cfg: dict) -> int:
    try:
        hom = tuple(float(h) for h in str(cfg["homophily"]).split(","))
    except ValueError:
        raise UsageError(f"homophily: expected comma-separated reals, got {cfg['homophily']!r}") from None
    try:
        synthesize(
            cfg["out"], n_nodes=cfg["nodes"], true_ate=cfg["true_ate"], seed=cfg["seed"],
            n_classes=cfg["classes"], degree=cfg["degree"], homophily=hom, plant=cfg["plant"],
            seeds=cfg["seeds"], with_splits=cfg["splits"],
        )
    except ValueError as exc:
        raise UsageError(f"infeasible synthetic config: {exc}") from None
    logger.info("wrote synthetic graph and predictions to %s", cfg["out"])
    return 0


def cmd_report(cfg: dict) -> int:
    path = os.path.join(cfg["out"], "effects.json")
    if not os.path.isfile(path):
        raise UsageError(f"missing file {path}")
    with open(path, encoding="utf-8") as fh:
        doc = json.load(fh)
    _write(os.path.join(cfg["out"], "patterns_report.md"), render_markdown(doc))
    _write(os.path.join(cfg["out"], "effects.csv"), render_csv(doc))
    return 0


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="key=value file overriding defaults")
    common.add_argument("--out", help="output directory")
    common.add_argument("--seed", type=int)
    common.add_argument("--threads", type=int)
    common.add_argument("-v", "--verbose", action="store_true")

    graph = argparse.ArgumentParser(add_help=False)
    graph.add_argument("--graph-dir", dest="graph_dir", help="directory with nodes.tsv, edges.tsv [, splits.tsv]")

    p = argparse.ArgumentParser(prog="hetcausal", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="command", required=True)
    sub.add_parser("metrics", parents=[common, graph], help="per-node structural profiles and indicators")

    a = sub.add_parser("audit", parents=[common, graph], help="causal audit of structural patterns")
    a.add_argument("--preds", help="prediction log (default: <graph-dir>/preds.tsv)")
    a.add_argument("--alpha", type=float)
    a.add_argument("--n-min", dest="n_min", type=int)
    a.add_argument("--s-min", dest="s_min", type=int)
    a.add_argument("--clip", type=float)
    a.add_argument("--bootstrap", type=int)
    a.add_argument("--outcome", choices=["hetero_majority", "homo_majority", "hetero_all_seeds", "hetero_wins"])
    a.add_argument("--covariates", help="comma-separated covariate names")
    a.add_argument("--adjust", help="'search', 'none' or a comma-separated covariate list")
    a.add_argument("--search-k", dest="search_k", type=int)
    a.add_argument("--balance", type=float, help="SMD threshold for the adjustment search")
    a.add_argument("--rr-floor", dest="rr_floor", type=float)
    a.add_argument("--patterns", help="TOML file with extra pattern definitions")
    a.add_argument("--adjusted-pn-ps", dest="adjusted_pn_ps", action="store_const", const=True)

    s = sub.add_parser("synth", parents=[common], help="write a synthetic graph with planted effect")
    s.add_argument("--nodes", type=int)
    s.add_argument("--classes", type=int)
    s.add_argument("--degree", type=int)
    s.add_argument("--homophily", help="comma-separated per-relation homophily targets")
    s.add_argument("--true-ate", dest="true_ate", type=float)
    s.add_argument("--plant", help="built-in pattern carrying the planted effect")
    s.add_argument("--seeds", type=int, help="number of prediction seeds")
    s.add_argument("--splits", action="store_const", const=True, help="also write splits.tsv")

    sub.add_parser("report", parents=[common], help="re-render markdown/CSV from <out>/effects.json")
    return p


_COMMANDS = {"metrics": cmd_metrics, "audit": cmd_audit, "synth": cmd_synth, "report": cmd_report}


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return 2 if exc.code else 0
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s: %(message)s")
    try:
        cfg = resolve(args)
        return _COMMANDS[args.command](cfg)
    except (UsageError, GraphFormatError, FileNotFoundError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except Exception as exc:  # pragma: no cover
        logger.exception("internal error: %s", exc)
        return 1


if __name__ == "__main__":
    sys.exit(main())
