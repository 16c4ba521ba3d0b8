"""Serialization of audit results: effects.json, a markdown summary and a CSV of effect rows."""

from __future__ import annotations

import csv
import io
import json
import math
from typing import Any, Mapping, Sequence

from .estimators import METHODS
from .patterns import OccurrenceReport, PatternReport

__all__ = ["sig6", "reports_to_dict", "dump_effects", "render_markdown", "render_csv"]


def sig6(x: float | None) -> float | None:
    """Round to 6 significant digits; non-finite values become None."""
    if x is None:
        return None
    x = float(x)
    if not math.isfinite(x):
        return None
    return float(f"{x:.6g}")


def _effect_row(rep: PatternReport, method: str) -> dict[str, Any]:
    est = rep.estimates.get(method)
    cf, cons = rep.counterfactual, rep.consistency
    return {
        "method": method,
        "ate": sig6(est.ate) if est else None,
        "se": sig6(est.se) if est else None,
        "ci95": [sig6(est.ci95[0]), sig6(est.ci95[1])] if est and est.ci95 else None,
        "z": sig6(est.z) if est else None,
        "p": sig6(est.p_value) if est else None,
        "q": sig6(rep.q_value) if method == "diff_means" else None,
        "rd": sig6(est.rd) if est else None,
        "rr": sig6(est.rr) if est else None,
        "adequacy": {
            "pass": rep.adequacy.passed if rep.adequacy else False,
            "failures": list(rep.adequacy.failures) if rep.adequacy else [],
        },
        "e_value": sig6(rep.e_value),
        "pn": sig6(cf.pn) if cf else None,
        "ps": sig6(cf.ps) if cf else None,
        "mean_uplift": sig6(cf.mean_uplift) if cf else None,
        "median_uplift": sig6(cf.median_uplift) if cf else None,
        "consistency": {
            "agree": cons.agree_count if cons else None,
            "overlap": cons.ci_overlap if cons else None,
            "consistent": cons.consistent if cons else None,
        },
    }


def _pattern_dict(rep: PatternReport) -> dict[str, Any]:
    cs = rep.contingency
    return {
        "name": rep.pattern.name,
        "definition": [{"metric": c.metric, "agg": c.agg, "value": c.value} for c in rep.pattern.clauses],
        "tag": rep.pattern.tag,
        "n": rep.n,
        "n_undefined": rep.n_undefined,
        "n1": cs.n1 if cs else None,
        "n0": cs.n0 if cs else None,
        "p1": sig6(cs.p1) if cs and cs.n1 else None,
        "p0": sig6(cs.p0) if cs and cs.n0 else None,
        "q": sig6(rep.q_value),
        "pass": rep.passed,
        "dr_agrees": rep.dr_agrees,
        "adjustment_set": list(rep.adjustment_set) if rep.adjustment_set is not None else None,
        "status": dict(rep.status),
        "effects": [_effect_row(rep, m) for m in METHODS],
    }


def _occurrence_dict(occ: OccurrenceReport) -> dict[str, Any]:
    return {
        "per_pattern": {k: sig6(v) for k, v in occ.per_pattern.items()},
        "none": sig6(occ.none_fraction),
        "n_evaluated": occ.n_evaluated,
        "n_undefined": occ.n_undefined,
    }


def reports_to_dict(
    reports: Sequence[PatternReport],
    occurrence: OccurrenceReport | None = None,
    meta: Mapping[str, Any] | None = None,
) -> dict[str, Any]:
    out: dict[str, Any] = {"meta": dict(meta or {})}
    if occurrence is not None:
        out["occurrence"] = _occurrence_dict(occurrence)
    out["patterns"] = [_pattern_dict(r) for r in reports]
    return out


def dump_effects(doc: Mapping[str, Any]) -> str:
    return json.dumps(doc, indent=2, sort_keys=False, allow_nan=False) + "\n"


# --------------------------------------------------------------------------- human-readable


def _f(x, digits=3) -> str:
    return "-" if x is None else f"{x:.{digits}f}"


def render_markdown(doc: Mapping[str, Any]) -> str:
    pats = doc.get("patterns", [])
    buf = io.StringIO()
    w = buf.write
    meta = doc.get("meta", {})
    w("# Structural pattern audit\n\n")
    if meta:
        w(" ".join(f"`{k}={v}`" for k, v in meta.items()) + "\n\n")

    w("## Factual evaluation\n\n| Pattern | ATE | SE | RR | q | PASS |\n|---|---|---|---|---|---|\n")
    for p in pats:
        dm = p["effects"][0]
        w(f"| {p['name']}: {p['tag']} | {_f(dm['ate'])} | {_f(dm['se'])} | {_f(dm['rr'], 2)} | {_f(p['q'], 4)} | {'yes' if p['pass'] else 'no'} |\n")

    w("\n## Counterfactual evaluation\n\n| Pattern | Mean Uplift | Median Uplift | PN | PS |\n|---|---|---|---|---|\n")
    for p in pats:
        e = p["effects"][0]
        w(f"| {p['name']} | {_f(e['mean_uplift'])} | {_f(e['median_uplift'])} | {_f(e['pn'], 2)} | {_f(e['ps'], 2)} |\n")

    w("\n## Adjustment, consistency and sensitivity\n\n| Pattern | ATE (DR) | Consistency | E-value | Adjustment set |\n|---|---|---|---|---|\n")
    for p in pats:
        e = p["effects"][0]
        dr = next(x for x in p["effects"] if x["method"] == "dr")
        tick = "-" if p["dr_agrees"] is None else ("yes" if p["dr_agrees"] else "no")
        agree = e["consistency"]["agree"]
        adj = p["adjustment_set"]
        w(
            f"| {p['name']} | {_f(dr['ate'])} ({tick}) | {'-' if agree is None else f'{agree}/{len(METHODS)}'} "
            f"| {_f(e['e_value'], 2)} | {'-' if adj is None else ', '.join(adj) or '(none)'} |\n"
        )

    w("\n## Estimates by method\n\n| Pattern | Method | ATE | SE | 95% CI | p |\n|---|---|---|---|---|---|\n")
    for p in pats:
        for e in p["effects"]:
            ci = "-" if e["ci95"] is None else f"[{_f(e['ci95'][0])}, {_f(e['ci95'][1])}]"
            w(f"| {p['name']} | {e['method']} | {_f(e['ate'])} | {_f(e['se'])} | {ci} | {_f(e['p'], 4)} |\n")

    failing = [p for p in pats if not p["effects"][0]["adequacy"]["pass"]]
    if failing:
        w("\n## Adequacy failures\n\n")
        for p in failing:
            w(f"- {p['name']}: " + "; ".join(p["effects"][0]["adequacy"]["failures"]) + "\n")

    occ = doc.get("occurrence")
    if occ:
        w("\n## Pattern occurrence\n\n| Pattern | Definition | Occurrence (%) |\n|---|---|---|\n")
        for p in pats:
            frac = occ["per_pattern"].get(p["name"])
            w(f"| {p['name']} | {p['tag']} | {_f(None if frac is None else 100 * frac, 2)} |\n")
        w(f"| None | no pattern satisfied | {_f(100 * occ['none'], 2)} |\n")
        w(f"\n{occ['n_evaluated']} nodes evaluated, {occ['n_undefined']} with undefined indicators.\n")
    return buf.getvalue()


def render_csv(doc: Mapping[str, Any]) -> str:
    buf = io.StringIO()
    cols = ["pattern", "method", "ate", "se", "ci_lo", "ci_hi", "z", "p", "q", "rd", "rr", "e_value", "pass"]
    wr = csv.writer(buf, lineterminator="\n")
    wr.writerow(cols)
    for p in doc.get("patterns", []):
        for e in p["effects"]:
            ci = e["ci95"] or [None, None]
            row = [p["name"], e["method"], e["ate"], e["se"], ci[0], ci[1], e["z"], e["p"], e["q"], e["rd"], e["rr"], e["e_value"], p["pass"]]
            wr.writerow(["" if v is None else v for v in row])
    return buf.getvalue()
