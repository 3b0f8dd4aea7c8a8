import io

import numpy as np
import pytest

import oracles
from mobsim.ingest import (
    CHECKIN,
    CheckinEvent,
    EventStream,
    GpsPoint,
    IngestError,
    Meeting,
    StayInterval,
    TableSchema,
    activity_ranking,
    detect_stay_points,
    extract_meetings_colocation,
    extract_meetings_proximity,
    gps_to_stream,
    parse_checkins,
    parse_gps,
    parse_meetings,
    parse_stays,
    popularity_ranking,
    project_equirectangular,
    repeat_stream,
    stays_to_stream,
    subsample_agents,
    write_checkins,
    write_gps,
    write_meetings,
    write_stays,
)
from mobsim.model import DAY, RngHandle
from mobsim.synthetic import random_stays, random_walks, zipf_checkins, zipf_meetings


def _text(s):
    return io.StringIO(s)


def test_parse_sorts_rows():
    s = parse_checkins(_text("agent_id\tvenue_id\ttimestamp\nb\tv1\t300\na\tv2\t100\nc\tv1\t200\n"))
    assert len(s) == 3
    assert s.t.tolist() == [100.0, 200.0, 300.0]
    assert [s.agents[a] for a in s.a] == ["a", "c", "b"]
    assert s.horizon_days == 1


def test_empty_file_gives_empty_stream():
    s = parse_checkins(_text("agent_id\tvenue_id\ttimestamp\n"))
    assert len(s) == 0 and s.horizon_days == 0


def test_missing_column_is_fatal():
    with pytest.raises(IngestError, match="venue_id"):
        parse_checkins(_text("agent_id\ttimestamp\na\t1\n"))


def test_malformed_rows_skipped_and_counted():
    rows = "".join(f"a{i}\tv\t{i}\n" for i in range(2000))
    s = parse_checkins(_text("agent_id\tvenue_id\ttimestamp\n" + rows + "x\tv\tnot-a-time\n"))
    assert len(s) == 2000
    assert s.meta == {"rows": 2001, "malformed": 1}


def test_malformed_fraction_threshold():
    text = "agent_id\tvenue_id\ttimestamp\na\tv\t1\nb\tv\toops\n"
    with pytest.raises(IngestError, match="malformed"):
        parse_checkins(_text(text))
    s = parse_checkins(_text(text), TableSchema(max_bad_fraction=0.5))
    assert len(s) == 1


def test_iso_and_custom_time_formats():
    s = parse_checkins(_text("agent_id\tvenue_id\ttimestamp\na\tv\t1970-01-02T00:00:00Z\n"))
    assert s.t[0] == DAY
    nyc = TableSchema(columns={"agent_id": 0, "venue_id": 1, "timestamp": 7}, header=False,
                      time_format="%a %b %d %H:%M:%S %z %Y")
    row = "470\t49bbd6c0f964a520f4531fe3\tx\tArts\t40.71\t-74.00\t-240\tTue Apr 03 18:00:09 +0000 2012\n"
    s = parse_checkins(_text(row), nyc)
    assert s.t[0] == 1333476009.0
    assert s.agents == ("470",)


def test_round_trips(tmp_path):
    s = zipf_checkins(30, 10, 3, 2.0, rng=RngHandle(1))
    write_checkins(s, tmp_path / "c.tsv")
    back = parse_checkins(tmp_path / "c.tsv")
    np.testing.assert_array_equal(back.t, s.t)
    assert [back.agents[a] for a in back.a] == [s.agents[a] for a in s.a]

    m = zipf_meetings(30, 3, rng=RngHandle(2))
    write_meetings(m, tmp_path / "m.tsv")
    back = parse_meetings(tmp_path / "m.tsv")
    np.testing.assert_array_equal(back.t_end, m.t_end)

    stays = random_stays(5, 3, 20, 1000, RngHandle(3))
    write_stays(stays, tmp_path / "s.tsv")
    assert sorted(parse_stays(tmp_path / "s.tsv")) == sorted(stays)

    pts = random_walks(3, 20, rng=RngHandle(4))
    write_gps(pts, tmp_path / "g.tsv")
    assert parse_gps(tmp_path / "g.tsv") == sorted(pts, key=lambda p: (p.agent_id, p.t))


def test_latlon_projection(tmp_path):
    (tmp_path / "g.tsv").write_text("agent_id\tlat\tlon\tt\na\t40.0\t-74.0\t0\na\t40.001\t-74.0\t10\n")
    pts = parse_gps(tmp_path / "g.tsv", projection_origin=(40.0, -74.0))
    assert pts[0].x == pytest.approx(0.0) and pts[0].y == pytest.approx(0.0)
    assert pts[1].y == pytest.approx(111.2, abs=0.1)
    x, _ = project_equirectangular(40.0, -73.999, (40.0, -74.0))
    assert float(x) == pytest.approx(85.2, abs=0.1)


def test_meeting_canonical_order():
    m = Meeting(0, 10, "b", "a")
    assert (m.a, m.b) == ("a", "b")
    with pytest.raises(ValueError):
        Meeting(0, 10, "a", "a")


# stay points


def _still(agent, x, y, t0, minutes, step=30):
    return [GpsPoint(agent, x, y, t0 + k * step) for k in range(int(minutes * 60 / step) + 1)]


def test_stationary_agent_one_stay():
    stays = detect_stay_points(_still("a", 0, 0, 0, 10))
    assert len(stays) == 1
    assert stays[0].t_end - stays[0].t_start == 600


def test_moving_agent_no_stay():
    pts = [GpsPoint("a", 10.0 * k, 0.0, 30.0 * k) for k in range(40)]
    assert detect_stay_points(pts) == []


def test_two_pauses_one_long_enough():
    pts = _still("a", 0, 0, 0, 6)
    pts += [GpsPoint("a", 20.0 * k, 0.0, 360 + 30.0 * k) for k in range(1, 10)]
    pts += _still("a", 500, 0, 700, 4)
    got = detect_stay_points(pts)
    assert [(s.t_start, s.t_end) for s in got] == [(0, 360)]
    assert [(a, s, e) for a, s, e in oracles.brute_stay_points(pts, 5.0, 300.0)] == [("a", 0, 360)]


def test_stay_points_match_oracle():
    for k in range(20):
        pts = random_walks(4, 120, step=10, box=30, speed=float(0.2 + k / 10), rng=RngHandle(k))
        got = [(s.agent_id, s.t_start, s.t_end) for s in detect_stay_points(pts, 5.0, 120.0)]
        assert got == oracles.brute_stay_points(pts, 5.0, 120.0)


# co-location


def test_colocation_examples():
    m = extract_meetings_colocation([StayInterval("a", "r", 0, 100), StayInterval("b", "r", 50, 150)])
    assert [(x.t_start, x.t_end) for x in m] == [(50, 100)]
    assert extract_meetings_colocation([StayInterval("a", "r1", 0, 100), StayInterval("b", "r2", 0, 100)]) == []


def test_colocation_matches_oracle():
    for k in range(10):
        stays = random_stays(10, 5, 50, 2000, RngHandle(k))
        got = [(m.t_start, m.t_end, m.a, m.b, m.location_id) for m in extract_meetings_colocation(stays)]
        assert sorted(got) == oracles.brute_colocation(stays)


def test_stays_to_stream_keeps_isolated_agents():
    s = stays_to_stream([StayInterval("a", "r", 0, 100), StayInterval("z", "q", 0, 100)])
    assert s.agents == ("a", "z") and len(s) == 0


# proximity


def test_co_moving_agents_meet():
    pts = []
    for k in range(61):
        pts.append(GpsPoint("a", 2.0 * k, 0.0, 10.0 * k))
        pts.append(GpsPoint("b", 2.0 * k, 3.0, 10.0 * k))
    m = extract_meetings_proximity(pts)
    assert [(x.t_start, x.t_end, x.a, x.b) for x in m] == [(0.0, 600.0, "a", "b")]


def test_distant_agents_never_meet():
    pts = [GpsPoint(a, 0.0, y, 10.0 * k) for k in range(100) for a, y in (("a", 0.0), ("b", 6.0))]
    assert extract_meetings_proximity(pts) == []


def test_proximity_matches_oracle_200_agents():
    pts = random_walks(200, 40, step=10, box=120, speed=1.0, drop=0.05, rng=RngHandle(8))
    got = [(m.t_start, m.t_end, m.a, m.b) for m in extract_meetings_proximity(pts, 5.0, 60.0)]
    want = oracles.brute_proximity(pts, 5.0, 60.0)
    assert sorted(got) == want and want
    s = gps_to_stream(pts, 5.0, 60.0)
    assert s.n_meetings == len(want) and s.n_agents == 200


# transforms


def _week(n=100):
    return zipf_checkins(20, 5, 7, n / 140, rng=RngHandle(9))


def test_repeat_three_times():
    s = _week()
    r = repeat_stream(s, 21)
    assert len(r) == 3 * len(s)
    for k in range(3):
        np.testing.assert_array_equal(np.sort(r.t)[k * len(s):(k + 1) * len(s)], s.t + k * 7 * DAY)
    assert repeat_stream(s, 7).t.tolist() == s.t.tolist()


def test_repeat_count_and_order():
    s = _week(100)
    assert len(s) == 100
    r = repeat_stream(s, 70)
    assert len(r) == 1000 and np.all(np.diff(r.t) >= 0)
    assert r.horizon_days == 70


def test_repeat_truncates_when_shorter():
    s = _week()
    r = repeat_stream(s, 3)
    assert np.all(r.t < 3 * DAY) and r.horizon_days == 3


def test_subsample():
    s = zipf_checkins(10, 5, 3, 2.0, rng=RngHandle(10))
    assert subsample_agents(s, 1.0, RngHandle(0)).agents == s.agents
    half = subsample_agents(s, 0.5, RngHandle(0))
    assert half.n_agents == 5
    assert set(half.agents[a] for a in half.a) <= set(half.agents)
    m = EventStream.build(meetings=[Meeting(0, 1, "a", "b"), Meeting(0, 1, "c", "d")])
    for seed in range(10):
        sub = subsample_agents(m, 0.5, RngHandle(seed))
        kept = set(sub.agents)
        for a, b in zip(sub.a, sub.b):
            assert {sub.agents[a], sub.agents[b]} <= kept
        if kept in ({"a", "c"}, {"a", "d"}, {"b", "c"}, {"b", "d"}):
            assert len(sub) == 0


def test_rankings():
    cs = [CheckinEvent(i, "A", "V") for i in range(5)] + [CheckinEvent(10 + i, "B", "W") for i in range(2)]
    s = EventStream.build(checkins=cs)
    assert activity_ranking(s) == [("A", 5), ("B", 2)]
    tie = EventStream.build(checkins=[CheckinEvent(i, x, "V") for i in range(3) for x in ("b", "a")])
    assert [a for a, _ in activity_ranking(tie)] == ["a", "b"]
    pop = EventStream.build(checkins=[CheckinEvent(i, "a", "V") for i in range(10)] + [CheckinEvent(0, "a", "W")])
    assert popularity_ranking(pop) == [("V", 10), ("W", 1)]
    assert popularity_ranking(EventStream.build()) == []
    assert popularity_ranking(zipf_meetings(20, 2, rng=RngHandle(1))) == []


def test_event_stream_views():
    s = EventStream.build(
        checkins=[CheckinEvent(5, "a", "v")], meetings=[Meeting(1, 2, "a", "b", "v")], t0=0.0
    )
    assert s.n_checkins == 1 and s.n_meetings == 1
    assert s.kind.tolist() == [1, CHECKIN]
    assert [type(e).__name__ for e in s] == ["Meeting", "CheckinEvent"]
    s.check()
