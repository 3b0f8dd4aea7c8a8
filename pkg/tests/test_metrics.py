import math
import warnings

import numpy as np
import pytest

import oracles
from instances import fast_params, micro_stream
from mobsim import metrics
from mobsim.engine import SimulationConfig, simulate
from mobsim.ingest import activity_ranking
from mobsim.model import DAY, DiseaseParams, RngHandle
from mobsim.synthetic import zipf_checkins
from mobsim.transmission import AGENT, SEED, VENUE, LogBuilder


def _chain_log():
    # A (seed, day 0) -> B (day 2) -> C (day 4)
    b = LogBuilder(["A", "B", "C", "D"], ("v",), 0.0, 8)
    b.infect(0, 0.0, 0.0, 5.0, 13.0, SEED, -1, -1, DAY)
    b.infect(1, 2 * DAY, 3 * DAY, 5.0, None, AGENT, 0, 0, DAY)
    b.infect(2, 4 * DAY + 5, 5 * DAY, 1.0, None, AGENT, 1, 1, DAY)
    return b.build({})


def test_empty_log_series_are_zero():
    log = LogBuilder(["a", "b"], (), 0.0, 5).build({})
    s = metrics.daily_series(log)
    assert s.total_infected.tolist() == [0] * 5
    assert s.active_infected.tolist() == [0] * 5


def test_daily_series_matches_replay():
    gen = np.random.default_rng(7)
    for k in range(30):
        mode = ("venue", "meeting")[k % 2]
        st = micro_stream(gen, mode)
        log = simulate(st, SimulationConfig(fast_params(0.9), 1, None, mode, rng=RngHandle(k)))
        s = metrics.daily_series(log)
        total, active, new = oracles.replay_daily(log, log.horizon_days)
        np.testing.assert_array_equal(s.total_infected, total)
        np.testing.assert_array_equal(s.active_infected, active)
        np.testing.assert_array_equal(s.new_infected, new)


def test_chain_series():
    s = metrics.daily_series(_chain_log())
    assert s.total_infected.tolist() == [1, 1, 2, 2, 3, 3, 3, 3]
    # C is asymptomatic for one day after onset on day 5, so it recovers on day 6
    assert s.active_infected.tolist()[4:] == [3, 3, 2, 2]
    assert s.new_infected.tolist() == [1, 0, 1, 0, 1, 0, 0, 0]
    assert s.peak() == (4, 3.0)


def _series(new):
    new = np.asarray(new, dtype=float)
    return metrics.DailySeries(np.cumsum(new), np.cumsum(new), new)


def test_growth_rate():
    assert metrics.growth_rate(_series([2, 2, 2])).tolist()[1:] == [1, 1]
    lam = metrics.growth_rate(_series([1, 2, 4]))
    assert math.isnan(lam[0]) and lam[1:].tolist() == [2, 2]
    lam = metrics.growth_rate(_series([0, 3, 0, 0]))
    assert math.isnan(lam[1]) and lam[2] == 0 and math.isnan(lam[3])


def test_reproduction_number_chain():
    r = metrics.reproduction_number(_chain_log())
    assert r[0] == 1 and r[2] == 1 and r[4] == 0
    assert math.isnan(r[1])


def test_reproduction_number_single_seed_three_infections():
    b = LogBuilder(["s", "x", "y", "z"], (), 0.0, 3)
    b.infect(0, 0.0, 0.0, 5.0, 13.0, SEED, -1, -1, DAY)
    for i in (1, 2, 3):
        b.infect(i, DAY + i, 2 * DAY, 5.0, 13.0, AGENT, 0, 0, DAY)
    r = metrics.reproduction_number(b.build({}))
    assert r[0] == 3 and r[1] == 0


def test_rolling_average():
    np.testing.assert_allclose(metrics.rolling_average(np.full(10, 4.2)), 4.2)
    x = np.random.default_rng(1).normal(size=20)
    np.testing.assert_array_equal(metrics.rolling_average(x, 1), x)
    impulse = metrics.rolling_average([0, 0, 7, 0, 0, 0, 0, 0, 0], 7)
    # full windows covering the impulse average to exactly 1
    np.testing.assert_allclose(impulse[3:6], 1.0)
    np.testing.assert_allclose(impulse[6:], 0.0)
    # edge windows shrink, so they divide by fewer days
    np.testing.assert_allclose(impulse[:3], [7 / 4, 7 / 5, 7 / 6])
    with pytest.raises(ValueError):
        metrics.rolling_average(x, 0)


def test_gaussian_smooth():
    np.testing.assert_allclose(metrics.gaussian_smooth(np.full(30, 3.0), 2.0), 3.0, atol=1e-12)
    x = np.random.default_rng(2).normal(size=30)
    np.testing.assert_allclose(metrics.gaussian_smooth(x, 1e-6), x, atol=1e-9)
    impulse = np.zeros(41)
    impulse[20] = 1.0
    k = metrics.gaussian_smooth(impulse, 2.0)
    w = np.exp(-0.5 * (np.arange(-8, 9) / 2.0) ** 2)
    np.testing.assert_allclose(k[12:29], w / w.sum(), atol=1e-12)
    assert k.sum() == pytest.approx(1.0)


def test_smoothing_matches_brute_force_with_gaps():
    gen = np.random.default_rng(3)
    for _ in range(20):
        x = gen.normal(size=50)
        x[gen.random(50) < 0.2] = np.nan
        s = float(gen.uniform(0.5, 3))
        np.testing.assert_allclose(metrics.gaussian_smooth(x, s), oracles.brute_gaussian(x, s), atol=1e-12)


def test_ensemble():
    run = np.arange(5.0)
    e = metrics.ensemble([run])
    for a in (e.median, e.p25, e.p75):
        np.testing.assert_array_equal(a, run)
    e = metrics.ensemble([np.array([1.0]), np.array([3.0]), np.array([2.0])])
    assert e.median[0] == 2
    with pytest.raises(ValueError):
        metrics.ensemble([np.zeros(3), np.zeros(4)])
    with pytest.raises(ValueError):
        metrics.ensemble([])


def test_ensemble_percentiles_match_sort():
    runs = np.random.default_rng(4).integers(0, 50, size=(10, 20)).astype(float)
    e = metrics.ensemble(list(runs))
    for q, got in ((25, e.p25), (50, e.median), (75, e.p75)):
        assert got.tolist() == pytest.approx([oracles.brute_percentile(runs[:, j].tolist(), q) for j in range(20)])


def test_ensemble_all_missing_day_is_quiet():
    with warnings.catch_warnings():
        warnings.simplefilter("error")
        e = metrics.ensemble([np.array([np.nan, 1.0]), np.array([np.nan, 3.0])])
    assert math.isnan(e.median[0]) and e.median[1] == 2


def _venue_log(counts):
    b = LogBuilder([f"a{i:02d}" for i in range(20)], tuple(f"v{j}" for j in range(len(counts))), 0.0, 5)
    b.infect(0, 0.0, 0.0, 5.0, 13.0, SEED, -1, -1, DAY)
    i = 1
    for v, c in enumerate(counts):
        for _ in range(c):
            b.infect(i, DAY, 2 * DAY, 5.0, 13.0, VENUE, v, 0, DAY)
            i += 1
    return b.build({})


def test_infections_per_venue():
    assert metrics.infections_per_venue(_venue_log([])) == ({}, [])
    by_venue, dist = metrics.infections_per_venue(_venue_log([1, 3, 0]))
    assert by_venue == {"v1": 3, "v0": 1}
    assert dist == [(1, "v1", 3, 0.75), (2, "v0", 1, 1.0)]
    assert metrics.top_venue_share(_venue_log([1, 3, 0]), 0.01) == 0.75


def test_cohort_tracking():
    s = zipf_checkins(100, 30, 20, 1.0, rng=RngHandle(5))
    log = simulate(s, SimulationConfig(DiseaseParams(), 3, rng=RngHandle(1)))
    ranking = activity_ranking(s)
    full = metrics.cohort_tracking(log, ranking, 1.0)
    np.testing.assert_allclose(full.total_infected, metrics.daily_series(log).total_infected / 100)
    infected = set(log.infected_ids())
    outsiders = [a for a in s.agents if a not in infected]
    zero = metrics.cohort_tracking(log, outsiders, len(outsiders) / 100)
    assert not zero.total_infected.any()


def test_secondary_distribution():
    assert metrics.secondary_distribution(_chain_log()).tolist() == [1, 2]


def test_csv_round_trip(tmp_path):
    e = metrics.EnsembleSummary(np.array([1.0, np.nan]), np.array([0.5, np.nan]), np.array([2.0, np.nan]))
    metrics.write_summary_csv(tmp_path / "s.csv", e, np.array([False, True]))
    back = metrics.read_series_csv(tmp_path / "s.csv")
    assert back["value"][0] == 1.0 and math.isnan(back["value"][1])
    assert back["censored"].tolist() == [0, 1]


def test_censored_days():
    mask = metrics.censored_days(30)
    assert not mask[:20].any() and mask[21:].all()
