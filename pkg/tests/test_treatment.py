import random

import numpy as np
import pytest
from hypothesis import given, strategies as st

from hetcausal.graph import GraphFormatError, from_edge_list
from hetcausal.metrics import compute_indicators, compute_profiles
from hetcausal.treatment import (
    PredictionLog,
    assign_treatment,
    build_audit_table,
    default_covariates,
    load_predictions,
    success_probability,
    write_predictions,
)


def _log(hits_h, hits_g, labels, C=2):
    """``hits_*[v]`` lists per-seed correctness; wrong predictions use (y + 1) % C."""
    recs = []
    for model, hits in (("hetero", hits_h), ("homo", hits_g)):
        for v, row in hits.items():
            for s, ok in enumerate(row):
                recs.append((model, s, v, labels[v] if ok else (labels[v] + 1) % C))
    return PredictionLog.from_records(recs)


@pytest.fixture
def three():
    g = from_edge_list(["paper"] * 3, [(0, "r", 1), (1, "r", 2), (0, "s", 2)], {0: 0, 1: 1, 2: 0}, "paper", 2)
    hits_h = {0: [1, 1, 1, 0, 0], 1: [1, 1, 0, 0, 0], 2: [1, 1, 1, 1, 1]}
    hits_g = {0: [1, 0, 0, 0, 0], 1: [0, 0, 0, 1, 1], 2: [1, 1, 1, 1, 0]}
    return g, _log(hits_h, hits_g, g.labels)


def test_success_probability_fraction_of_seeds(three):
    g, log = three
    assert success_probability(log, "hetero", 0, g.labels) == 0.6
    assert success_probability(log, "homo", 0, g.labels) == 0.2
    assert log.seed_count == 5


def test_treatment_ties_go_to_control():
    assert assign_treatment(0.4, 0.4) == 0
    assert assign_treatment(0.6, 0.4) == 1
    assert assign_treatment(0.2, 0.4) == 0


def test_three_node_table(three):
    g, log = three
    profiles = compute_profiles(g)
    table = build_audit_table(g, profiles, [compute_indicators(p) for p in profiles], log)
    assert table.node_ids.tolist() == [0, 1, 2]
    assert table.T.tolist() == [1, 0, 1]
    assert table.Y.tolist() == [1, 0, 1]
    # hand-computed indicators (H_min, H_max, H_avg, D_min, D_max, D_avg)
    expected = {0: (0, 1, 0, 1, 1, 1), 1: (0, 0, 0, 0, 0, 0), 2: (0, 1, 0, 1, 1, 1)}
    keys = [(m, a) for m in "HD" for a in ("min", "max", "avg")]
    for row in table.rows:
        assert tuple(row.indicators[k] for k in keys) == expected[row.node_id]
    assert table.excluded_nodes == ()


def test_hetero_majority_threshold(three):
    g, _ = three
    log = _log({0: [1, 1, 1, 0, 0], 1: [1, 1, 0, 0, 0], 2: [1] * 5}, {v: [0] * 5 for v in range(3)}, g.labels)
    profiles = compute_profiles(g)
    table = build_audit_table(g, profiles, [compute_indicators(p) for p in profiles], log)
    assert table.rows[0].pi_hetero == 0.6 and table.rows[0].Y == 1
    assert table.rows[1].pi_hetero == 0.4 and table.rows[1].Y == 0


def test_alternative_outcomes(three):
    g, log = three
    profiles = compute_profiles(g)
    ind = [compute_indicators(p) for p in profiles]
    assert build_audit_table(g, profiles, ind, log, "hetero_all_seeds").Y.tolist() == [0, 0, 1]
    assert build_audit_table(g, profiles, ind, log, "homo_majority").Y.tolist() == [0, 0, 1]
    assert build_audit_table(g, profiles, ind, log, "hetero_wins").Y.tolist() == [1, 0, 1]
    with pytest.raises(ValueError):
        build_audit_table(g, profiles, ind, log, "bogus")


def test_unknown_covariate_is_named(three):
    g, log = three
    profiles = compute_profiles(g)
    ind = [compute_indicators(p) for p in profiles]
    with pytest.raises(KeyError, match="log_deg:zz"):
        build_audit_table(g, profiles, ind, log, covariate_spec=["H_avg", "log_deg:zz"])


def test_covariates_standardized(three):
    g, log = three
    profiles = compute_profiles(g)
    table = build_audit_table(g, profiles, [compute_indicators(p) for p in profiles], log)
    assert table.covariate_names == tuple(default_covariates(g))
    X = table.covariates()
    assert X.shape == (3, len(default_covariates(g)))
    np.testing.assert_allclose(X.mean(axis=0), 0, atol=1e-12)
    sd = X.std(axis=0)
    assert np.all((np.abs(sd - 1) < 1e-12) | (sd == 0))


def test_isolated_nodes_excluded():
    g = from_edge_list(["paper"] * 4, [(0, "r", 1), (1, "r", 2)], {0: 0, 1: 1, 2: 0, 3: 1}, "paper", 2)
    log = _log({v: [1] for v in range(4)}, {v: [0] for v in range(4)}, g.labels)
    profiles = compute_profiles(g)
    table = build_audit_table(g, profiles, [compute_indicators(p) for p in profiles], log)
    assert table.excluded_nodes == (3,)
    assert table.node_ids.tolist() == [0, 1, 2]


def test_splits_restrict_to_test(three):
    g, log = three
    profiles = compute_profiles(g)
    ind = [compute_indicators(p) for p in profiles]
    table = build_audit_table(g, profiles, ind, log, splits={0: "train", 1: "test", 2: "test"})
    assert table.node_ids.tolist() == [1, 2]


# ---------------------------------------------------------------- parsing


def test_load_rejects_unknown_model(tmp_path, three):
    g, _ = three
    (tmp_path / "p.tsv").write_text("hetero\t0\t0\t0\ngnn\t0\t0\t0\n")
    with pytest.raises(GraphFormatError, match=r"unknown model id 'gnn', p\.tsv:2"):
        load_predictions(str(tmp_path / "p.tsv"), g)


def test_log_rejects_unknown_model_in_memory():
    with pytest.raises(ValueError):
        PredictionLog({"hetero": {0: {0: 1}}, "mlp": {0: {0: 1}}})


def test_log_rejects_mismatched_seeds():
    with pytest.raises(ValueError, match="seed"):
        PredictionLog({"hetero": {0: {0: 1}}, "homo": {1: {0: 1}}})


def test_predictions_round_trip(tmp_path, three):
    g, log = three
    write_predictions(log, g, tmp_path / "p.tsv")
    assert load_predictions(str(tmp_path / "p.tsv"), g).preds == log.preds


def test_missing_record_raises(three):
    g, _ = three
    log = PredictionLog({"hetero": {0: {0: 0}}, "homo": {0: {0: 0}}})
    with pytest.raises(KeyError):
        success_probability(log, "hetero", 1, g.labels)


# ---------------------------------------------------------------- invariants


@given(st.integers(0, 10**6))
def test_permuting_records_and_seeds_changes_nothing(seed):
    rng = random.Random(seed)
    n, s, C = 8, rng.randint(1, 6), 3
    labels = {v: rng.randrange(C) for v in range(n)}
    recs = [(m, k, v, rng.randrange(C)) for m in ("hetero", "homo") for k in range(s) for v in range(n)]
    base = PredictionLog.from_records(recs)
    seed_map = list(range(s))
    rng.shuffle(seed_map)
    shuffled = [(m, 100 + seed_map[k], v, y) for m, k, v, y in recs]
    rng.shuffle(shuffled)
    other = PredictionLog.from_records(shuffled)
    for v in range(n):
        for m in ("hetero", "homo"):
            assert success_probability(base, m, v, labels) == success_probability(other, m, v, labels)
        ph, pg = (success_probability(base, m, v, labels) for m in ("hetero", "homo"))
        t = assign_treatment(ph, pg)
        assert t == assign_treatment(*(success_probability(other, m, v, labels) for m in ("hetero", "homo")))
        # pi values are multiples of 1/s and a treated row leads by at least one seed
        assert abs(ph * s - round(ph * s)) < 1e-12
        if t:
            assert ph - pg >= 1 / s - 1e-12
