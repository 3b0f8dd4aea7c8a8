import math

import numpy as np
import pytest

from mobsim.engine import SimulationConfig, simulate
from mobsim.ingest import CheckinEvent, EventStream, Meeting
from mobsim.interventions import (
    CloseVenues,
    Cohorts,
    LockdownPolicy,
    NoIntervention,
    ProtectAgents,
    UniformLockdown,
    apply_cohorts,
    apply_static,
    assign_cohorts,
    close_venue_set,
    close_venues,
    health_value,
    protect_agents,
    select_agents,
    select_venues,
    spec_from_dict,
    spec_to_dict,
)
from mobsim.model import DAY, DiseaseParams, RngHandle
from mobsim.synthetic import zipf_checkins, zipf_meetings
from mobsim.transmission import SEED, LogBuilder


@pytest.fixture(scope="module")
def checkins():
    return zipf_checkins(200, 100, 14, 2.0, rng=RngHandle(1))


def test_close_none_and_all(checkins):
    out, cost = close_venues(checkins, "top", 0.0)
    assert len(out) == len(checkins) and cost.social_value == 1.0
    out, cost = close_venues(checkins, "top", 1.0)
    assert out.n_checkins == 0 and cost.social_value == 0.0


def test_close_top_removes_most_visited(checkins):
    chosen = select_venues(checkins, "top", 0.05)
    counts = np.bincount(checkins.place, minlength=len(checkins.venues))
    threshold = sorted(counts, reverse=True)[len(chosen) - 1]
    assert len(chosen) == 5
    assert all(counts[checkins.venues.index(v)] >= threshold for v in chosen)
    out, cost = close_venue_set(checkins, chosen)
    assert cost.events_removed == sum(counts[checkins.venues.index(v)] for v in chosen)
    assert not set(out.place.tolist()) & {checkins.venues.index(v) for v in chosen}


def test_random_venue_selection_is_seeded(checkins):
    a = select_venues(checkins, "random", 0.1, RngHandle(3))
    assert a == select_venues(checkins, "random", 0.1, RngHandle(3))
    assert a != select_venues(checkins, "random", 0.1, RngHandle(4))


def test_closing_removes_located_meetings():
    s = EventStream.build(meetings=[Meeting(0, 1, "a", "b", "v"), Meeting(0, 1, "a", "c")])
    out, _ = close_venue_set(s, ["v"])
    assert len(out) == 1 and out.place[0] == -1


def test_protect_none_and_everyone():
    m = zipf_meetings(50, 5, rng=RngHandle(2))
    out, cost = protect_agents(m, "top", 0.0)
    assert len(out) == len(m) and cost.social_value == 1.0
    # an agent present in every meeting
    hub = EventStream.build(meetings=[Meeting(i, i + 1, "hub", f"x{i}") for i in range(5)])
    out, cost = protect_agents(hub, "top", 1 / 6)
    assert len(out) == 0 and cost.social_value == 0.0


def test_protect_top_picks_most_active(checkins):
    chosen = select_agents(checkins, "top", 0.1)
    counts = np.bincount(checkins.a, minlength=len(checkins.agents))
    assert len(chosen) == 20
    assert counts[chosen].min() >= np.sort(counts)[::-1][19]
    out, _ = protect_agents(checkins, "top", 0.1)
    assert not set(out.a.tolist()) & set(chosen.tolist())


def test_assign_cohorts():
    assert set(assign_cohorts(["a", "b", "c"], 1, RngHandle()).values()) == {0}
    groups = np.array(list(assign_cohorts(range(100_000), 4, RngHandle(5)).values()))
    np.testing.assert_allclose(np.bincount(groups) / len(groups), 0.25, atol=0.01)


def test_apply_cohorts():
    m = EventStream.build(meetings=[Meeting(0, 1, "a", "b")])
    out, cost = apply_cohorts(m, {"a": 0, "b": 0})
    assert len(out) == 1 and cost.social_value == 1.0
    out, cost = apply_cohorts(m, {"a": 0, "b": 1})
    assert len(out) == 0 and cost.events_removed == 1
    with pytest.raises(ValueError, match="cohort"):
        apply_cohorts(m, {"a": 0})


def test_lockdown_policy_trigger_and_window():
    p = LockdownPolicy(1.0, 0.1, 2.0, RngHandle())
    assert not p.drop(0.0, 5, 100)
    assert p.started_at is None
    assert p.drop(DAY, 10, 100)
    assert p.started_at == DAY
    assert p.drop(2.9 * DAY, 10, 100)
    assert not p.drop(3 * DAY, 10, 100)
    assert p.dropped == 2


def test_lockdown_drop_rate():
    p = LockdownPolicy(0.8, 0.0, math.inf, RngHandle(6))
    n = 100_000
    assert abs(sum(p.drop(float(i), 0, 10) for i in range(n)) / n - 0.8) <= 0.01


def test_full_lockdown_leaves_seeds(checkins):
    spec = UniformLockdown(1.0, 0.0, math.inf)
    log = simulate(checkins, SimulationConfig(DiseaseParams(beta=1.0), 5, intervention=spec))
    assert log.n_infected == 5


def _log(n_agents, n_infected, n_seeds):
    b = LogBuilder([f"a{i:03d}" for i in range(n_agents)], (), 0.0, 10)
    for i in range(n_infected):
        b.infect(i, 0.0, 0.0, 5.0, 13.0, SEED if i < n_seeds else 3, -1, 0 if i >= n_seeds else -1, DAY)
    return b.build({})


def test_health_value():
    base = _log(200, 100, 10)
    assert health_value(base, base) == 0.0
    assert health_value(base, _log(200, 10, 10)) == pytest.approx(0.9)
    with pytest.raises(ValueError):
        health_value(_log(10, 0, 0), base)


def test_spec_round_trip():
    for spec in (NoIntervention(), UniformLockdown(0.5, 0.1, 7), CloseVenues("random", 0.2, 3),
                 CloseVenues(venue_ids=["v1"]), ProtectAgents("top", 0.3), Cohorts(3, 1)):
        assert spec_from_dict(spec_to_dict(spec)) == spec
    with pytest.raises(ValueError):
        spec_from_dict({"kind": "curfew"})
    with pytest.raises(ValueError):
        CloseVenues(fraction=1.5)
    with pytest.raises(ValueError):
        ProtectAgents(selector="best")


def test_apply_static_lockdown_is_identity(checkins):
    out, cost = apply_static(checkins, UniformLockdown(), RngHandle())
    assert out is checkins and cost.social_value == 1.0


def test_explicit_venue_list(checkins):
    spec = CloseVenues(venue_ids=[checkins.venues[0]])
    out, cost = apply_static(checkins, spec, RngHandle())
    assert 0 not in out.place.tolist()
    assert cost.events_removed == int(np.count_nonzero(checkins.place == 0))


def test_seed_in_one_cohort_stays_there():
    cs = [CheckinEvent(h * 3600.0, a, "v") for h in range(48) for a in ("a", "b", "c", "d")]
    s = EventStream.build(checkins=cs, t0=0.0)
    for r in range(10):
        log = simulate(s, SimulationConfig(DiseaseParams(beta=1.0), 1, intervention=Cohorts(2, seed=r), rng=RngHandle(r)))
        processed, _ = apply_static(s, Cohorts(2, seed=r), RngHandle(r, 0, (1,)))
        cohort = processed.cohort
        assert {cohort[i] for i in log.order} == {cohort[log.order[0]]}
