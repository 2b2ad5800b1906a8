import json

import pytest

from strata.curator import StreamCurator, read_observations, write_observations
from strata.policies import (
    CurbedRecencyProportional,
    DepthProportional,
    FixedResolution,
    GeomSeqNthRoot,
    RecencyProportional,
    enumerate_retained,
)


def curated(policy, count):
    cur = StreamCurator(policy)
    cur.extend(f"obs{i}" for i in range(count))
    return cur


def test_first_ingest_lands_at_zero():
    cur = StreamCurator(FixedResolution(5))
    assert cur.empty and cur.depth is None and len(cur) == 0
    assert cur.ingest("x") == []
    assert list(cur) == [(0, "x")]


def test_fixed_drop_on_ingest():
    cur = curated(FixedResolution(5), 13)
    assert [o.time for o in cur] == [0, 5, 10, 12]
    dropped = cur.ingest("new")
    assert [o.time for o in dropped] == [12]
    assert [o.time for o in cur] == [0, 5, 10, 13]


def test_dpr_buffer_after_nine():
    assert [o.time for o in curated(DepthProportional(2), 9)] == [0, 4, 8]


@pytest.mark.parametrize(
    "policy",
    [FixedResolution(3), DepthProportional(3, tapered=True), RecencyProportional(2),
     GeomSeqNthRoot(4), CurbedRecencyProportional(20)],
    ids=str,
)
def test_buffer_tracks_enumeration_every_prefix(policy):
    cur = StreamCurator(policy)
    for n in range(700):
        cur.ingest(n)
        assert [o.time for o in cur] == enumerate_retained(policy, n).tolist()
        # payloads stay attached to the time they were ingested at
        assert all(o.payload == o.time for o in cur)


def test_time_of_index():
    cur = curated(RecencyProportional(2), 11)
    assert cur.time_of_index(1) == 4
    assert cur.time_of_index(0) == 0
    assert cur.time_of_index(len(cur) - 1) == 10
    for i, obs in enumerate(cur):
        assert cur.time_of_index(i) == obs.time
    with pytest.raises(IndexError):
        cur.time_of_index(len(cur))
    with pytest.raises(IndexError):
        StreamCurator(FixedResolution(1)).time_of_index(0)


def test_jsonl_round_trip():
    lines = [json.dumps({"payload": f"p{i}"}) for i in range(11)]
    cur = StreamCurator(DepthProportional(2))
    cur.extend(read_observations(lines))
    out = [json.loads(line) for line in write_observations(cur)]
    assert out == [{"time": t, "payload": f"p{t}"} for t in (0, 4, 8, 10)]


def test_read_skips_blank_lines():
    assert list(read_observations(['{"payload": "a"}', "", "  \n", '{"payload": "b"}'])) == ["a", "b"]


@pytest.mark.parametrize("bad", ["{not json", '{"nope": 1}', '[1, 2]', '{"payload": 3}'])
def test_read_reports_line_number(bad):
    with pytest.raises(ValueError, match="line 2"):
        list(read_observations(['{"payload": "ok"}', bad]))
