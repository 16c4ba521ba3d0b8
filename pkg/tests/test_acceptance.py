"""Acceptance criteria, each at its stated tolerance.

Every test records one PASS/FAIL line, printed in the pytest terminal summary
under "acceptance criteria".
"""

import time
import warnings

import numpy as np
from hypothesis import given, settings, strategies as st

from hetcausal.cli import main
from hetcausal.estimators import (
    CausalData,
    ContingencySummary,
    NuisanceModels,
    adequacy_check,
    bh_fdr,
    counterfactual_report,
    diff_in_means,
    dr_ate,
    e_value,
    fit_nuisance,
    ipw_ate,
    tmle_ate,
)
from hetcausal.graph import from_edge_list
from hetcausal.metrics import compute_indicators, compute_profiles
from hetcausal.metrics import AGGREGATES, METRICS, IndicatorVector
from hetcausal.patterns import builtin_patterns, occurrence_stats
from hetcausal.synth import CausalGenConfig, generate_causal_table
from oracles import oracle_node, random_graph

KEYS = [(m, a) for m in METRICS for a in AGGREGATES]


# 1 ------------------------------------------------------------------ E-values

# reference risk ratios and their expected E-values
REFERENCE = [(1.49, 2.35), (1.35, 2.04), (1.22, 1.74)]


def test_criterion_1_e_values(criterion):
    with criterion(1, "E-value reproduction within 0.005") as c:
        got = [(rr, ev, e_value(rr)) for rr, ev in REFERENCE]
        c.detail = ", ".join(f"e({rr})={v:.4f} vs {ev}" for rr, ev, v in got)
        for rr, ev, v in got:
            assert abs(v - ev) <= 0.005, f"e_value({rr}) = {v:.6f}, expected {ev}"


def test_reference_e_value_is_consistent_with_rounded_rr():
    # a ratio printed as 1.49 lies in [1.485, 1.495); that interval brackets 2.35
    assert e_value(1.485) < 2.35 < e_value(1.495)


# 2 ------------------------------------------------------------------ pattern logic

REFERENCE_OCCURRENCE = {"P1": 57.67, "P2": 76.05, "P3": 59.47}


@st.composite
def indicator_tables(draw):
    n = draw(st.integers(1, 60))
    cell = st.one_of(st.just(None), st.integers(0, 1))
    rows = [IndicatorVector(v, dict(zip(KEYS, draw(st.lists(cell, min_size=6, max_size=6))))) for v in range(n)]
    return rows


@settings(max_examples=1000, deadline=None)
@given(indicator_tables())
def _occurrence_property(ivs):
    specs = builtin_patterns()
    try:
        occ = occurrence_stats(ivs, specs)
    except ValueError:
        return  # every node undefined
    f = occ.per_pattern
    assert f["P1"] <= min(f["P2"], f["P3"])


def test_criterion_2_pattern_logic(criterion):
    with criterion(2, "occurrence(P1) <= min(P2, P3), 1000 random tables and reference row") as c:
        _occurrence_property()
        f = REFERENCE_OCCURRENCE
        c.detail = f"reference {f['P1']} <= min({f['P2']}, {f['P3']})"
        assert f["P1"] <= min(f["P2"], f["P3"])


# 3 ------------------------------------------------------------------ estimator recovery


def test_criterion_3_estimator_recovery(criterion):
    with criterion(3, "estimator recovery on synthetic data") as c:
        t0 = time.perf_counter()
        covered = 0
        for r in range(100):
            d, _ = generate_causal_table(CausalGenConfig(n=10_000, true_ate=0.08, gamma=0.0, seed=r))
            est = diff_in_means(d)
            covered += abs(est.ate - 0.08) <= 3 * est.se
        err = {m: [] for m in ("naive", "ipw", "dr", "tmle")}
        for r in range(20):
            d, _ = generate_causal_table(CausalGenConfig(n=10_000, true_ate=0.08, gamma=2.0, seed=1000 + r))
            with warnings.catch_warnings():
                warnings.simplefilter("ignore")
                nu = fit_nuisance(d)
            err["naive"].append(diff_in_means(d).ate - 0.08)
            err["ipw"].append(ipw_ate(d, nu.e_hat, seed=r).ate - 0.08)
            err["dr"].append(dr_ate(d, nu).ate - 0.08)
            err["tmle"].append(tmle_ate(d, nu).ate - 0.08)
        elapsed = time.perf_counter() - t0
        mae = {m: float(np.mean(np.abs(v))) for m, v in err.items()}
        naive_bias = float(np.mean(err["naive"]))
        c.detail = (
            f"coverage {covered}/100; naive bias {naive_bias:.3f}; "
            + ", ".join(f"{m} mean|err| {mae[m]:.4f}" for m in ("ipw", "dr", "tmle"))
            + f"; {elapsed:.1f}s"
        )
        assert covered >= 95
        for m in ("ipw", "dr", "tmle"):
            assert mae[m] <= 0.02
        assert naive_bias > 0.03
        assert elapsed <= 60


# 4 ------------------------------------------------------------------ BH-FDR


def test_criterion_4_bh_fdr(criterion):
    with criterion(4, "BH-FDR null simulation and hand fixture") as c:
        rng = np.random.default_rng(2024)
        fdp = []
        for _ in range(200):
            rej = bh_fdr(rng.random(1000), 0.05).rejected
            fdp.append(1.0 if rej.any() else 0.0)  # every hypothesis is null
        fdr = float(np.mean(fdp))
        q = bh_fdr([0.01, 0.02, 0.03]).q_values
        c.detail = f"empirical FDR {fdr:.3f}; q = {np.round(q, 6).tolist()}"
        assert fdr <= 0.07
        np.testing.assert_allclose(q, [0.03, 0.03, 0.03], rtol=0, atol=1e-12)


# 5 ------------------------------------------------------------------ metric oracles


def test_criterion_5_metric_oracles(criterion):
    with criterion(5, "metrics equal brute-force oracle on 100 random graphs") as c:
        checked = 0
        for seed in range(100):
            n, types, edges, labels, C = random_graph(50_000 + seed, max_nodes=50, max_relations=3)
            g = from_edge_list(types, edges, labels, "paper", C)
            for p in compute_profiles(g):
                o = oracle_node(edges, labels, p.node_id, C)
                assert {r: rv.H for r, rv in p.per_relation.items()} == o["H"]
                assert {r: rv.D for r, rv in p.per_relation.items()} == o["D"]
                assert (p.projection.H, p.projection.D) == (o["H_proj"], o["D_proj"])
                assert p.aggregates == o["aggs"]
                assert compute_indicators(p).Z == o["Z"]
                checked += 1
        c.detail = f"{checked} nodes, exact equality"


# 6 ------------------------------------------------------------------ coincidences


def test_criterion_6_coincidence(criterion):
    with criterion(6, "diff = IPW = DR to 1e-9; TMLE(eps=0) = plug-in to 1e-12") as c:
        rng = np.random.default_rng(6)
        worst_ipw = worst_dr = worst_tmle = 0.0
        for _ in range(300):
            n = int(rng.integers(10, 400))
            t = (rng.random(n) < rng.uniform(0.1, 0.9)).astype(int)
            y = (rng.random(n) < rng.uniform(0.05, 0.95)).astype(int)
            if t.sum() in (0, n):
                continue
            d = CausalData.from_arrays(t, y)
            p1, p0 = y[t == 1].mean(), y[t == 0].mean()
            e = float(rng.uniform(0.05, 0.95)) if 0 < p1 < 1 and 0 < p0 < 1 else d.n1 / n
            nu = NuisanceModels.constant(d, e)
            dm = diff_in_means(d).ate
            worst_ipw = max(worst_ipw, abs(ipw_ate(d, nu.e_hat, n_boot=2).ate - dm))
            worst_dr = max(worst_dr, abs(dr_ate(d, nu).ate - dm))
            if 0 < p1 < 1 and 0 < p0 < 1:
                tm = tmle_ate(d, nu)
                assert abs(tm.diagnostics["epsilon"]) < 1e-12
                worst_tmle = max(worst_tmle, abs(tm.ate - float(np.mean(nu.mu1 - nu.mu0))))
        c.detail = f"max |ipw-diff| {worst_ipw:.1e}, |dr-diff| {worst_dr:.1e}, |tmle-plugin| {worst_tmle:.1e}"
        assert worst_ipw <= 1e-9 and worst_dr <= 1e-9
        assert worst_tmle <= 1e-12


# 7 ------------------------------------------------------------------ PN / PS


def test_criterion_7_pn_ps(criterion):
    with criterion(7, "PN/PS within 0.01 of counterfactual enumeration, n=1e5") as c:
        d, po = generate_causal_table(CausalGenConfig(n=100_000, true_ate=0.08, gamma=0.0, seed=5, monotone=True))
        assert np.all(po.y1 >= po.y0)
        with warnings.catch_warnings():
            warnings.simplefilter("ignore")
            nu = fit_nuisance(d)
        rep = counterfactual_report(d, nu)
        t, y = d.t, d.y
        te = (t == 1) & (y == 1)
        cn = (t == 0) & (y == 0)
        pn_true = np.sum(te & (po.y0 == 0)) / te.sum()
        ps_true = np.sum(cn & (po.y1 == 1)) / cn.sum()
        c.detail = f"PN {rep.pn:.4f} vs {pn_true:.4f}; PS {rep.ps:.4f} vs {ps_true:.4f}"
        assert abs(rep.pn - pn_true) <= 0.01
        assert abs(rep.ps - ps_true) <= 0.01


# 8 ------------------------------------------------------------------ determinism


def test_criterion_8_end_to_end_determinism(criterion, tmp_path):
    with criterion(8, "synth -> metrics -> audit byte-identical, threads 1 and 8") as c:
        blobs = []
        for run in range(2):
            for threads in ("1", "8"):
                d = tmp_path / f"run{run}_t{threads}"
                common = ["--seed", "11", "--threads", threads]
                assert main(["synth", "--out", str(d), "--nodes", "2500"] + common) == 0
                assert main(["metrics", "--graph-dir", str(d), "--out", str(d)] + common) == 0
                assert main(["audit", "--graph-dir", str(d), "--out", str(d), "--bootstrap", "50"] + common) == 0
                blobs.append((d / "effects.json").read_bytes())
        c.detail = f"{len(blobs)} runs, {len(set(blobs))} distinct effects.json"
        assert len(set(blobs)) == 1


# 9 ------------------------------------------------------------------ adequacy gate


def test_criterion_9_adequacy_gate(criterion):
    with criterion(9, "adequacy gate with default s_min = 5") as c:
        v = adequacy_check(ContingencySummary(n1=50, n0=50, events1=2, events0=25))
        c.detail = "; ".join(v.failures)
        assert v.thresholds[1] == 5
        assert not v.passed
        assert "treated events 2 < 5" in v.failures
        assert adequacy_check(ContingencySummary(50, 50, 5, 25)).passed
