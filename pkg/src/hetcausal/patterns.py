"""Structural indicator patterns and the per-pattern causal audit."""

from __future__ import annotations

import enum
import logging
import warnings
import zlib
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace
from typing import Mapping, Sequence

import numpy as np

from .estimators import (
    METHODS,
    AdequacyVerdict,
    CausalData,
    ConsistencyVerdict,
    ContingencySummary,
    CounterfactualReport,
    EffectEstimate,
    adequacy_check,
    bh_fdr,
    consistency_check,
    contingency,
    counterfactual_report,
    diff_in_means,
    dr_ate,
    e_value,
    fit_nuisance,
    ipw_ate,
    minimal_adjustment_search,
    psm_ate,
    tmle_ate,
)
from .metrics import AGGREGATES, METRICS, IndicatorVector
from .treatment import AuditTable

logger = logging.getLogger(__name__)

__all__ = [
    "Clause",
    "PatternSpec",
    "Match",
    "OccurrenceReport",
    "AuditConfig",
    "PatternReport",
    "builtin_patterns",
    "parse_patterns",
    "load_patterns",
    "evaluate_pattern",
    "pattern_treatment",
    "occurrence_stats",
    "macro_average",
    "run_pattern_audit",
    "audit_patterns",
]


@dataclass(frozen=True)
class Clause:
    metric: str
    agg: str
    value: int = 1

    def __post_init__(self):
        if self.metric not in METRICS or self.agg not in AGGREGATES or self.value not in (0, 1):
            raise ValueError(f"invalid clause {self}")


@dataclass(frozen=True)
class PatternSpec:
    name: str
    clauses: tuple[Clause, ...]

    def __post_init__(self):
        if not self.clauses:
            raise ValueError(f"pattern {self.name!r} has no clauses")
        keys = [(c.metric, c.agg) for c in self.clauses]
        if len(set(keys)) != len(keys):
            raise ValueError(f"pattern {self.name!r} repeats an indicator")

    @property
    def tag(self) -> str:
        return ", ".join(f"{c.metric}_{c.agg}" for c in self.clauses) + " (" + "".join(str(c.value) for c in self.clauses) + ")"


def builtin_patterns() -> list[PatternSpec]:
    h_avg, d_min = Clause("H", "avg", 1), Clause("D", "min", 1)
    return [PatternSpec("P1", (h_avg, d_min)), PatternSpec("P2", (d_min,)), PatternSpec("P3", (h_avg,))]


def parse_patterns(doc: Mapping, include_builtin: bool = True) -> list[PatternSpec]:
    """Patterns from a parsed TOML document::

        [[pattern]]
        name = "P4"
        clauses = [{metric = "H", agg = "max", value = 1}]
    """
    specs = builtin_patterns() if include_builtin else []
    for entry in doc.get("pattern", []):
        clauses = tuple(Clause(c["metric"], c["agg"], int(c.get("value", 1))) for c in entry["clauses"])
        specs = [s for s in specs if s.name != entry["name"]]
        specs.append(PatternSpec(str(entry["name"]), clauses))
    return specs


def load_patterns(path: str, include_builtin: bool = True) -> list[PatternSpec]:
    try:
        import tomllib
    except ModuleNotFoundError:  # Python < 3.11
        import tomli as tomllib

    with open(path, "rb") as fh:
        return parse_patterns(tomllib.load(fh), include_builtin)


class Match(str, enum.Enum):
    MATCH = "match"
    NO_MATCH = "no_match"
    UNDEFINED = "undefined"


def evaluate_pattern(spec: PatternSpec, indicators: IndicatorVector | Mapping) -> Match:
    z = indicators.Z if isinstance(indicators, IndicatorVector) else indicators
    vals = [z.get((c.metric, c.agg)) for c in spec.clauses]
    if any(v is None for v in vals):
        return Match.UNDEFINED
    ok = all(v == c.value for v, c in zip(vals, spec.clauses))
    return Match.MATCH if ok else Match.NO_MATCH


def pattern_treatment(spec: PatternSpec, indicators: Sequence[IndicatorVector]) -> np.ndarray:
    """1/0 per node, -1 where the pattern is undefined."""
    code = {Match.MATCH: 1, Match.NO_MATCH: 0, Match.UNDEFINED: -1}
    return np.array([code[evaluate_pattern(spec, iv)] for iv in indicators], dtype=np.int64)


# --------------------------------------------------------------------------- occurrence


@dataclass(frozen=True)
class OccurrenceReport:
    per_pattern: dict[str, float]
    none_fraction: float
    n_evaluated: int
    n_undefined: int = 0


def occurrence_stats(indicators: Sequence[IndicatorVector], specs: Sequence[PatternSpec]) -> OccurrenceReport:
    """Fractions of defined nodes matching each pattern, and matching none.

    A node is defined when every pattern evaluates to match or no-match.
    """
    matches = {s.name: 0 for s in specs}
    n_def = n_none = n_undef = 0
    for iv in indicators:
        res = [evaluate_pattern(s, iv) for s in specs]
        if Match.UNDEFINED in res:
            n_undef += 1
            continue
        n_def += 1
        hit = False
        for s, r in zip(specs, res):
            if r is Match.MATCH:
                matches[s.name] += 1
                hit = True
        n_none += not hit
    if n_def == 0:
        raise ValueError("no node has defined indicators for every pattern")
    return OccurrenceReport({k: v / n_def for k, v in matches.items()}, n_none / n_def, n_def, n_undef)


def macro_average(reports: Sequence[OccurrenceReport]) -> OccurrenceReport:
    """Unweighted mean over datasets."""
    if not reports:
        raise ValueError("no datasets")
    names = list(reports[0].per_pattern)
    k = len(reports)
    per = {n: sum(r.per_pattern[n] for r in reports) / k for n in names}
    return OccurrenceReport(
        per,
        sum(r.none_fraction for r in reports) / k,
        sum(r.n_evaluated for r in reports),
        sum(r.n_undefined for r in reports),
    )


# --------------------------------------------------------------------------- audit


@dataclass(frozen=True)
class AuditConfig:
    alpha: float = 0.05
    n_min: int = 30
    s_min: int = 5
    clip: float = 0.01
    n_bootstrap: int = 200
    seed: int = 0
    rr_floor: float = 1.1
    adjustment: Sequence[str] | None = None  # explicit covariate list; None means search
    search_k: int = 2
    balance_threshold: float = 0.1
    adjusted_pn_ps: bool = False

    def validate(self) -> None:
        if not 0 < self.alpha < 1:
            raise ValueError("alpha must lie in (0, 1)")
        if self.n_min < 0 or self.s_min < 0:
            raise ValueError("n_min and s_min must be nonnegative")
        if not 0 <= self.clip < 0.5:
            raise ValueError("clip must lie in [0, 0.5)")
        if self.n_bootstrap < 2:
            raise ValueError("n_bootstrap must be >= 2")


@dataclass(frozen=True)
class PatternReport:
    pattern: PatternSpec
    n: int
    n_undefined: int
    contingency: ContingencySummary | None
    adequacy: AdequacyVerdict | None
    estimates: dict[str, EffectEstimate]
    q_value: float | None
    adjustment_set: tuple[str, ...] | None
    counterfactual: CounterfactualReport | None
    consistency: ConsistencyVerdict | None
    e_value: float | None
    dr_agrees: bool | None
    passed: bool
    status: dict[str, str] = field(default_factory=dict)

    @property
    def p_value(self) -> float | None:
        est = self.estimates.get("diff_means")
        return None if est is None else est.p_value


def _pattern_seed(base: int, name: str) -> int:
    return (base * 1_000_003 + zlib.crc32(name.encode("utf-8"))) % (2**63)


def _passes(rep: PatternReport, cfg: AuditConfig) -> bool:
    est = rep.estimates.get("diff_means")
    return bool(
        rep.adequacy is not None
        and rep.adequacy.passed
        and rep.q_value is not None
        and rep.q_value <= cfg.alpha
        and est is not None
        and est.rr is not None
        and est.rr >= cfg.rr_floor
    )


def run_pattern_audit(table: AuditTable, spec: PatternSpec, config: AuditConfig | None = None) -> PatternReport:
    """Full battery for one pattern used as the treatment.

    Stages: adequacy, diff-in-means, q-value (this pattern alone; see
    :func:`audit_patterns` for the joint correction), adjustment set, nuisance
    fits, PSM/IPW/DR/TMLE, counterfactual summary, consistency and E-value.
    A failing stage is recorded in ``status`` and later stages are skipped.
    """
    cfg = config or AuditConfig()
    cfg.validate()
    treat = pattern_treatment(spec, [r.indicators for r in table.rows])
    keep = treat >= 0
    status: dict[str, str] = {}
    n_undef = int((~keep).sum())
    names = tuple(table.covariate_names)
    full = CausalData(treat[keep], table.Y[keep], table.covariates()[keep], table.node_ids[keep], names)

    empty = dict(
        pattern=spec, n=len(full), n_undefined=n_undef, estimates={}, q_value=None, adjustment_set=None,
        counterfactual=None, consistency=None, e_value=None, dr_agrees=None, passed=False,
    )
    cs = contingency(full)
    adequacy = adequacy_check(cs, cfg.n_min, cfg.s_min)
    status["adequacy"] = "pass" if adequacy.passed else "fail"
    if not adequacy.passed:
        for stage in ("factual", "adjustment", "estimators", "counterfactual", "consistency", "sensitivity"):
            status[stage] = "skipped"
        return PatternReport(contingency=cs, adequacy=adequacy, status=status, **empty)

    estimates: dict[str, EffectEstimate] = {"diff_means": diff_in_means(cs)}
    status["factual"] = "ok"
    dm = estimates["diff_means"]
    q = bh_fdr([dm.p_value], cfg.alpha).q_values[0] if dm.p_value is not None else None

    seed = _pattern_seed(cfg.seed, spec.name)
    adj = None
    cf = cons = None
    ev = None
    dr_ok = None
    try:
        with warnings.catch_warnings():
            warnings.simplefilter("ignore")
            if cfg.adjustment is not None:
                adj = tuple(cfg.adjustment)
            elif names:
                adj = minimal_adjustment_search(full, names, min(cfg.search_k, len(names)), cfg.balance_threshold, cfg.clip)
            else:
                adj = ()
            data = full.select(adj)
            nuis = fit_nuisance(data, cfg.clip)
        status["adjustment"] = "ok"
        estimates["psm"] = psm_ate(data, nuis.e_hat, cfg.n_bootstrap, seed)
        estimates["ipw"] = ipw_ate(data, nuis.e_hat, cfg.n_bootstrap, seed + 1)
        estimates["dr"] = dr_ate(data, nuis)
        estimates["tmle"] = tmle_ate(data, nuis)
        status["estimators"] = "ok"
        cf = counterfactual_report(data, nuis, adjusted=cfg.adjusted_pn_ps)
        status["counterfactual"] = "ok"
        cons = consistency_check([estimates[m] for m in METHODS])
        status["consistency"] = "ok"
        dr = estimates["dr"]
        dr_ok = bool(
            np.sign(dr.ate) == np.sign(dm.ate)
            and dr.ci95 is not None
            and dm.ci95 is not None
            and max(dr.ci95[0], dm.ci95[0]) <= min(dr.ci95[1], dm.ci95[1])
        )
    except (ValueError, np.linalg.LinAlgError) as exc:
        logger.warning("pattern %s: %s", spec.name, exc)
        failed = next((s for s in ("adjustment", "estimators", "counterfactual", "consistency") if s not in status), None)
        if failed:
            status[failed] = f"error: {exc}"
    if dm.rr is not None and dm.rr > 0:
        ev = e_value(dm.rr)
        status["sensitivity"] = "ok"
    else:
        status["sensitivity"] = "undefined: control event rate is zero"

    rep = PatternReport(
        pattern=spec, n=len(full), n_undefined=n_undef, contingency=cs, adequacy=adequacy, estimates=estimates,
        q_value=q, adjustment_set=adj, counterfactual=cf, consistency=cons, e_value=ev, dr_agrees=dr_ok,
        passed=False, status=status,
    )
    return replace(rep, passed=_passes(rep, cfg))


def audit_patterns(
    table: AuditTable,
    specs: Sequence[PatternSpec] | None = None,
    config: AuditConfig | None = None,
    threads: int = 1,
) -> list[PatternReport]:
    """Audit every pattern, then apply one BH correction across the batch."""
    cfg = config or AuditConfig()
    specs = list(builtin_patterns() if specs is None else specs)
    if threads <= 1:
        reports = [run_pattern_audit(table, s, cfg) for s in specs]
    else:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            reports = list(pool.map(lambda s: run_pattern_audit(table, s, cfg), specs))
    tested = [i for i, r in enumerate(reports) if r.p_value is not None]
    if tested:
        q = bh_fdr([reports[i].p_value for i in tested], cfg.alpha).q_values
        for i, qi in zip(tested, q):
            reports[i] = replace(reports[i], q_value=float(qi))
            reports[i] = replace(reports[i], passed=_passes(reports[i], cfg))
    return reports
