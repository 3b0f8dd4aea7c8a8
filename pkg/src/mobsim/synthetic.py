"""Synthetic mobility streams with controllable heterogeneity."""
from __future__ import annotations

import numpy as np

from .ingest import CHECKIN, MEETING, EventStream, GpsPoint, StayInterval
from .model import DAY, RngHandle


def _ids(prefix: str, n: int) -> tuple[str, ...]:
    width = len(str(max(n - 1, 0)))
    return tuple(f"{prefix}{i:0{width}d}" for i in range(n))


def zipf_weights(n: int, exponent: float, gen: np.random.Generator | None = None) -> np.ndarray:
    """Normalized weights proportional to rank^-exponent, optionally shuffled over ids."""
    w = np.arange(1, n + 1, dtype=float) ** -exponent
    if gen is not None:
        w = gen.permutation(w)
    return w / w.sum()


def zipf_checkins(
    n_agents: int = 2000,
    n_venues: int = 500,
    days: int = 60,
    checkins_per_agent_day: float = 1.0,
    activity_exponent: float = 1.0,
    popularity_exponent: float = 1.0,
    rng: RngHandle | None = None,
) -> EventStream:
    """Check-ins with heavy-tailed agent activity and venue popularity.

    The total count is ``n_agents * days * checkins_per_agent_day``; agents and
    venues are drawn independently from Zipf weights and times uniformly
    over the horizon.
    """
    gen = (rng or RngHandle()).generator
    total = int(round(n_agents * days * checkins_per_agent_day))
    wa = zipf_weights(n_agents, activity_exponent, gen)
    wv = zipf_weights(n_venues, popularity_exponent, gen)
    a = gen.choice(n_agents, size=total, p=wa)
    v = gen.choice(n_venues, size=total, p=wv)
    t = np.floor(gen.random(total) * days * DAY)
    return EventStream.from_arrays(
        np.full(total, CHECKIN), t, t, a, np.full(total, -1), v, _ids("u", n_agents), _ids("v", n_venues),
        t0=0.0, horizon_days=days,
    )


def contact_network(n_agents: int, mean_degree: float, exponent: float, gen: np.random.Generator):
    """Chung-Lu style random graph with heavy-tailed expected degrees.

    Returns unique pairs ``(a, b)`` with ``a < b``.
    """
    w = zipf_weights(n_agents, exponent, gen)
    m = int(round(n_agents * mean_degree / 2))
    a = gen.choice(n_agents, size=3 * m, p=w)
    b = gen.choice(n_agents, size=3 * m, p=w)
    keep = a != b
    a, b = np.minimum(a[keep], b[keep]), np.maximum(a[keep], b[keep])
    key = np.unique(a * n_agents + b)
    key = gen.permutation(key)[:m]
    key.sort()
    return key // n_agents, key % n_agents


def meetings_on_network(
    a: np.ndarray,
    b: np.ndarray,
    rates: np.ndarray,
    n_agents: int,
    days: int,
    gen: np.random.Generator,
    duration: float = 600.0,
) -> EventStream:
    """Poisson meetings per edge and day, at uniform times: a stationary stream."""
    counts = gen.poisson(np.repeat(rates, days))
    edge = np.repeat(np.repeat(np.arange(len(a)), days), counts)
    day = np.repeat(np.tile(np.arange(days), len(a)), counts)
    t = np.floor((day + gen.random(len(edge))) * DAY)
    ma, mb = a[edge], b[edge]
    n = len(edge)
    return EventStream.from_arrays(
        np.full(n, MEETING), t, t + duration, ma, mb, np.full(n, -1), _ids("u", n_agents), (),
        t0=0.0, horizon_days=days,
    )


def zipf_meetings(
    n_agents: int = 2000,
    days: int = 60,
    mean_degree: float = 6.0,
    meetings_per_edge_day: float = 0.5,
    exponent: float = 0.8,
    rng: RngHandle | None = None,
) -> EventStream:
    """Meeting stream on a heavy-tailed contact network with repeated encounters."""
    gen = (rng or RngHandle()).generator
    a, b = contact_network(n_agents, mean_degree, exponent, gen)
    rates = np.full(len(a), meetings_per_edge_day)
    return meetings_on_network(a, b, rates, n_agents, days, gen)


def stationary_meetings(
    n_agents: int = 500,
    days: int = 60,
    mean_degree: float = 6.0,
    meetings_per_edge_day: float = 0.5,
    rng: RngHandle | None = None,
) -> EventStream:
    """Meetings on an Erdos-Renyi style network, i.i.d. uniform over the horizon."""
    return zipf_meetings(n_agents, days, mean_degree, meetings_per_edge_day, 0.0, rng)


def random_stays(
    n_agents: int, n_rooms: int, n_stays: int, span: float, rng: RngHandle | None = None
) -> list[StayInterval]:
    gen = (rng or RngHandle()).generator
    out = []
    for _ in range(n_stays):
        s = float(gen.integers(0, int(span)))
        e = s + float(gen.integers(1, int(span) // 4 + 2))
        out.append(StayInterval(f"u{gen.integers(n_agents)}", f"r{gen.integers(n_rooms)}", s, e))
    return out


def random_walks(
    n_agents: int,
    n_steps: int,
    step: float = 10.0,
    box: float = 60.0,
    speed: float = 1.0,
    drop: float = 0.0,
    rng: RngHandle | None = None,
) -> list[GpsPoint]:
    """Random walks sampled every ``step`` seconds in a square of side ``box`` metres.

    ``drop`` removes fixes at random and timestamps get a little jitter, so
    resampling and gap handling are exercised.
    """
    gen = (rng or RngHandle()).generator
    pts = []
    for i in range(n_agents):
        xy = gen.random(2) * box
        for k in range(n_steps):
            xy = np.clip(xy + gen.normal(0.0, speed * step / 10.0, 2), 0.0, box)
            if gen.random() < drop:
                continue
            t = k * step + gen.uniform(-step / 4, step / 4)
            pts.append(GpsPoint(f"g{i:04d}", float(xy[0]), float(xy[1]), float(t)))
    return pts
