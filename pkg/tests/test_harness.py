import json

import pytest

from strata.column import StratColumn
from strata.harness import (
    ARTIFACTS,
    SimConfig,
    evaluate,
    run_sim,
    true_divergence_times,
    write_artifacts,
)
from strata.perfect import read_events, replay
from strata.policies import (
    CurbedRecencyProportional,
    DepthProportional,
    FixedResolution,
    gap_bound,
)
from strata.tree import parse_newick, to_newick


def test_config_validation():
    with pytest.raises(ValueError):
        SimConfig(1, 5, FixedResolution(1))
    with pytest.raises(ValueError):
        SimConfig(4, 0, FixedResolution(1))
    with pytest.raises(ValueError):
        SimConfig(4, 5, FixedResolution(1), model="island")
    with pytest.raises(ValueError):
        SimConfig(4, 5, FixedResolution(1), width=7)


def test_one_generation_wright_fisher():
    result = run_sim(SimConfig(2, 1, FixedResolution(1), seed=3))
    births = [e for e in result.events if e["op"] == "birth"]
    assert len(births) == 4
    naive = replay(result.events, "naive")
    assert len(naive) == 4
    assert [c.depth for c in result.columns] == [1, 1]


@pytest.mark.parametrize("model", ["wright_fisher", "moran"])
def test_depth_equals_generations(model):
    result = run_sim(SimConfig(10, 25, FixedResolution(1), model=model, seed=2))
    assert all(c.depth == 25 for c in result.columns)
    assert len(result.truth.leaves()) == 10
    assert len(result.timelapse) == 26


@pytest.mark.parametrize("model", ["wright_fisher", "moran"])
def test_same_seed_same_run(model):
    cfg = SimConfig(12, 30, DepthProportional(2), model=model, seed=7)
    a, b = run_sim(cfg), run_sim(cfg)
    assert a.events == b.events
    assert [c.to_dict() for c in a.columns] == [c.to_dict() for c in b.columns]
    assert to_newick(a.truth) == to_newick(b.truth)
    c = run_sim(SimConfig(12, 30, DepthProportional(2), model=model, seed=8))
    assert a.events != c.events


def test_event_log_replays_to_same_tracker():
    result = run_sim(SimConfig(8, 20, FixedResolution(2), model="moran", seed=5))
    again = replay(result.events)
    assert set(again.records) == set(result.tracker.records)


def test_truth_divergence_wright_fisher_matches_lca():
    result = run_sim(SimConfig(16, 40, FixedResolution(1), seed=11))
    div = true_divergence_times(result.truth)
    lca = result.truth.mrca_times()
    for pair, t in div.items():
        assert t == lca[pair] or (t is None and lca[pair] == 0 and result.truth.root.taxon is None)


def test_twins_window_contains_birth():
    parent = StratColumn(FixedResolution(1), seed=1, id="p")
    for _ in range(4):
        parent.deposit()
    a, b = parent.clone("a"), parent.clone("b")
    a.deposit()
    b.deposit()
    truth = parse_newick("(a:1,b:1):4;")
    report = evaluate(truth, [a, b])
    assert report.pairs == 1
    assert report.containment_rate == 1.0


@pytest.mark.parametrize("model", ["wright_fisher", "moran"])
@pytest.mark.parametrize(
    "policy", [FixedResolution(1), DepthProportional(8), CurbedRecencyProportional(64)], ids=str
)
def test_evaluate_contains_truth(model, policy):
    result = run_sim(SimConfig(24, 60, policy, model=model, seed=3))
    report = evaluate(result.truth, result.columns)
    assert report.pairs == 24 * 23 // 2
    assert report.containment_rate == 1.0
    assert report.window_ceiling_violations == 0
    assert report.fork_containment_rate == 1.0


def test_dpr_mean_window_within_gap_bound():
    policy = DepthProportional(8)
    result = run_sim(SimConfig(20, 100, policy, seed=9))
    report = evaluate(result.truth, result.columns)
    assert report.mean_window_width <= max(gap_bound(policy, n, 0) for n in range(101))


def test_evaluate_id_mismatch():
    result = run_sim(SimConfig(4, 3, FixedResolution(1), seed=0))
    result.columns[0].id = "stranger"
    with pytest.raises(ValueError, match="differ"):
        evaluate(result.truth, result.columns)


def test_report_json():
    result = run_sim(SimConfig(6, 10, FixedResolution(1), seed=0))
    data = json.loads(evaluate(result.truth, result.columns).to_json())
    assert set(data) >= {"containment_rate", "mean_window_width", "max_normalized_error", "trie_stats"}


def test_artifacts_round_trip(tmp_path):
    result = run_sim(SimConfig(6, 12, CurbedRecencyProportional(16), seed=4))
    paths = write_artifacts(result, tmp_path)
    assert sorted(paths) == sorted(ARTIFACTS)
    with open(paths["events.jsonl"]) as fh:
        assert list(read_events(fh)) == result.events
    truth = parse_newick(paths["truth.nwk"].read_text())
    assert truth.signature() == result.truth.signature()
    header = paths["timelapse.csv"].read_text().splitlines()[0]
    assert header == "generation,live,tracker_nodes,mean_strata,max_strata"
