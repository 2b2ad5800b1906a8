import json
import random

import pytest

from strata.perfect import PerfectTracker, read_events, replay


def random_log(rng, size):
    """Birth/removal log where only live taxa reproduce or die."""
    events, live, next_id = [], [], 0
    for _ in range(rng.randint(1, 4)):
        events.append({"op": "birth", "id": next_id, "parent": None, "time": 0})
        live.append(next_id)
        next_id += 1
    step = 0
    while len(events) < size and live:
        step += 1
        if rng.random() < 0.55 or len(live) == 1:
            parent = rng.choice(live)
            events.append({"op": "birth", "id": next_id, "parent": parent, "time": step})
            live.append(next_id)
            next_id += 1
        else:
            victim = live.pop(rng.randrange(len(live)))
            events.append({"op": "remove", "id": victim})
    return events


def live_ancestor_union(events):
    parent, alive = {}, set()
    for e in events:
        if e["op"] == "birth":
            parent[e["id"]] = e["parent"]
            alive.add(e["id"])
        else:
            alive.discard(e["id"])
    keep = set()
    for taxon in alive:
        while taxon is not None and taxon not in keep:
            keep.add(taxon)
            taxon = parent[taxon]
    return keep


def test_founder_birth():
    t = PerfectTracker()
    t.on_birth("f")
    assert len(t) == 1 and t.roots == {"f"}


def test_chain_births():
    t = PerfectTracker()
    t.on_birth(0)
    for k in range(1, 6):
        t.on_birth(k, k - 1, k)
    assert len(t) == 6
    assert t.records[5].parent == 4


def test_birth_errors():
    t = PerfectTracker()
    t.on_birth(0)
    with pytest.raises(KeyError):
        t.on_birth(0)
    with pytest.raises(KeyError):
        t.on_birth(1, 99)


def test_removing_last_leaf_of_dead_chain_removes_chain():
    t = PerfectTracker()
    t.on_birth(0)
    for k in range(1, 6):
        t.on_birth(k, k - 1, k)
    for k in range(5):
        assert t.on_removal(k) == 0
    assert t.on_removal(5) == 6
    assert len(t) == 0


def test_removing_leaf_with_living_sibling():
    t = PerfectTracker()
    t.on_birth(0)
    t.on_birth(1, 0)
    t.on_birth(2, 0)
    t.on_removal(0)
    assert t.on_removal(1) == 1
    assert set(t.records) == {0, 2}


def test_removing_internal_with_living_descendants():
    t = PerfectTracker()
    t.on_birth(0)
    t.on_birth(1, 0)
    assert t.on_removal(0) == 0
    assert set(t.records) == {0, 1}


def test_removal_errors():
    t = PerfectTracker()
    t.on_birth(0)
    t.on_birth(1, 0)
    with pytest.raises(KeyError):
        t.on_removal(7)
    t.on_removal(0)
    with pytest.raises(ValueError):
        t.on_removal(0)


def test_bad_mode():
    with pytest.raises(ValueError):
        PerfectTracker("lazy")


def test_founder_star():
    t = PerfectTracker()
    for k in range(4):
        t.on_birth(k)
    tree = t.extant_tree()
    assert sorted(tree.leaf_labels()) == ["0", "1", "2", "3"]
    assert len(tree.root.children) == 4


def test_live_internal_taxon_gets_self_leaf():
    t = PerfectTracker()
    t.on_birth(0)
    t.on_birth(1, 0, 3)
    tree = t.extant_tree()
    assert sorted(tree.leaf_labels()) == ["0", "1"]
    assert tree.root.taxon == 0


@pytest.mark.parametrize("seed", range(30))
def test_pruning_matches_live_ancestor_union(seed):
    rng = random.Random(seed)
    events = random_log(rng, rng.randint(10, 2000))
    tracker = replay(events)
    assert set(tracker.records) == live_ancestor_union(events)
    assert tracker.removal_ops <= 2 * tracker.removals + tracker.births
    counts = tracker.living_offspring_recount()
    assert all(tracker.records[k].living_offspring_lineages == v for k, v in counts.items())


@pytest.mark.parametrize("seed", range(10))
def test_pruned_tree_is_naive_tree_restricted(seed):
    rng = random.Random(100 + seed)
    events = random_log(rng, 500)
    naive, pruned = replay(events, "naive"), replay(events, "pruning")
    assert len(naive) == naive.births
    keep = live_ancestor_union(events)
    restricted = {k for k in naive.records if k in keep}
    assert set(pruned.records) == restricted
    assert pruned.extant_tree().signature() == _restricted_signature(naive, keep)


def _restricted_signature(naive, keep):
    sub = PerfectTracker()
    for rec in sorted(naive.records.values(), key=lambda r: r.birth_time):
        if rec.id in keep:
            sub.on_birth(rec.id, rec.parent, rec.birth_time)
    for rec in naive.records.values():
        if rec.id in keep and not rec.alive:
            sub.records[rec.id].alive = False
    return sub.extant_tree().signature()


def test_compact_stems_drops_dead_stem():
    t = PerfectTracker(compact_stems=True)
    t.on_birth(0)
    t.on_birth(1, 0, 1)
    t.on_birth(2, 1, 2)
    t.on_birth(3, 1, 2)
    t.on_removal(0)
    t.on_removal(1)
    t.on_removal(2)
    assert set(t.records) == {3}
    assert t.roots == {3}


def test_read_events():
    lines = [json.dumps({"op": "birth", "id": 0}), "", json.dumps({"op": "remove", "id": 0})]
    assert [e["op"] for e in read_events(lines)] == ["birth", "remove"]
    with pytest.raises(ValueError, match="line 2"):
        list(read_events([lines[0], '{"op": "fly"}']))
    with pytest.raises(ValueError, match="line 1"):
        list(read_events(["{"]))
