"""Small fixed and randomized streams shared by the tests."""
from __future__ import annotations

import numpy as np

from mobsim.ingest import CHECKIN, MEETING, CheckinEvent, EventStream, Meeting
from mobsim.model import DAY, DiseaseParams

HOUR = 3600.0


def micro_stream(gen: np.random.Generator, mode: str) -> EventStream:
    """Random stream with at most 50 agents, 20 venues and 30 days."""
    n_agents = int(gen.integers(2, 51))
    n_venues = int(gen.integers(1, 21))
    days = int(gen.integers(1, 31))
    n_events = int(gen.integers(1, min(400, 6 * n_agents * days) + 1))
    # coarse 15-minute clock so simultaneous events are common
    t = gen.integers(0, days * 96, size=n_events) * 900.0
    a = gen.integers(0, n_agents, size=n_events)
    agents = tuple(f"a{i:02d}" for i in range(n_agents))
    if mode == "venue":
        v = gen.integers(0, n_venues, size=n_events)
        venues = tuple(f"v{i:02d}" for i in range(n_venues))
        return EventStream.from_arrays(
            np.full(n_events, CHECKIN), t, t, a, np.full(n_events, -1), v, agents, venues,
            t0=0.0, horizon_days=days,
        )
    b = gen.integers(0, n_agents - 1, size=n_events)
    b = b + (b >= a)
    lo, hi = np.minimum(a, b), np.maximum(a, b)
    return EventStream.from_arrays(
        np.full(n_events, MEETING), t, t + 600.0, lo, hi, np.full(n_events, -1), agents, (),
        t0=0.0, horizon_days=days,
    )


def fast_params(beta: float) -> DiseaseParams:
    """Short stage durations so short instances see whole disease courses."""
    return DiseaseParams(
        beta=beta,
        incubation=(1.0, 0.3),
        presymptomatic_infectious=(2.0, 0.5),
        in_care=(2.0, 0.5),
        asymptomatic_infectious=(4.0, 1.0),
    )


# fixed micro-instance: 5 agents, 3 venues, 3 days
ORACLE_PARAMS = DiseaseParams(
    beta=0.5,
    incubation=(0.5, 0.0),
    presymptomatic_infectious=(1.0, 0.0),
    in_care=(13.0, 0.0),
    asymptomatic_infectious=(2.0, 0.0),
)

_CHECKINS = [
    # (hour, agent, venue)
    (1, "A", "v0"), (2, "B", "v0"), (3, "C", "v1"), (5, "D", "v1"), (6, "A", "v1"),
    (9, "E", "v2"), (11, "C", "v2"), (14, "B", "v1"), (20, "D", "v0"), (26, "E", "v1"),
    (30, "C", "v0"), (34, "A", "v2"), (40, "B", "v2"), (47, "E", "v0"), (52, "D", "v2"),
    (58, "A", "v0"), (63, "C", "v1"), (70, "E", "v2"),
]

_MEETINGS = [
    (1, "A", "B"), (3, "C", "D"), (6, "A", "C"), (9, "B", "E"), (14, "D", "E"),
    (20, "A", "E"), (26, "B", "C"), (34, "C", "E"), (40, "A", "D"), (47, "B", "D"),
    (58, "C", "D"), (70, "A", "E"),
]


def oracle_instance(mode: str) -> EventStream:
    if mode == "venue":
        return EventStream.build(
            checkins=[CheckinEvent(h * HOUR, a, v) for h, a, v in _CHECKINS], t0=0.0, horizon_days=3
        )
    return EventStream.build(
        meetings=[Meeting(h * HOUR, h * HOUR + 600.0, a, b) for h, a, b in _MEETINGS], t0=0.0, horizon_days=3
    )


def as_tuples(stream: EventStream, mode: str) -> list[tuple[float, int, int]]:
    x = stream.place if mode == "venue" else stream.b
    return list(zip(stream.t.tolist(), stream.a.tolist(), x.tolist()))


def day(d: float) -> float:
    return d * DAY
