"""Intervention strategies and their social and health accounting.

Static strategies (venue closure, agent protection, cohorts) are event-stream
transforms applied before a run. The uniform lockdown is a dynamic policy the
engine consults per event, since its start depends on the epidemic itself.
"""
from __future__ import annotations

import math
from dataclasses import asdict, dataclass, replace
from typing import Iterable, Literal, Mapping, Union

import numpy as np

from .ingest import MEETING, EventStream, agent_activity, venue_popularity
from .model import DAY, RngHandle
from .transmission import CostReport, TransmissionLog

Selector = Literal["top", "random"]


@dataclass(frozen=True)
class NoIntervention:
    kind = "none"


@dataclass(frozen=True)
class UniformLockdown:
    drop_prob: float = 0.8
    trigger_fraction: float = 0.05
    duration_days: float = 15.0
    kind = "lockdown"

    def __post_init__(self):
        _check_fraction("drop_prob", self.drop_prob)
        _check_fraction("trigger_fraction", self.trigger_fraction)
        if not self.duration_days >= 0:
            raise ValueError("duration_days must be >= 0")


@dataclass(frozen=True)
class CloseVenues:
    selector: Selector = "top"
    fraction: float = 0.01
    seed: int = 0
    venue_ids: tuple[str, ...] | None = None
    kind = "close_venues"

    def __post_init__(self):
        _check_selector(self.selector)
        _check_fraction("fraction", self.fraction)
        if self.venue_ids is not None:
            object.__setattr__(self, "venue_ids", tuple(self.venue_ids))


@dataclass(frozen=True)
class ProtectAgents:
    selector: Selector = "top"
    fraction: float = 0.1
    seed: int = 0
    kind = "protect_agents"

    def __post_init__(self):
        _check_selector(self.selector)
        _check_fraction("fraction", self.fraction)


@dataclass(frozen=True)
class Cohorts:
    k: int = 2
    seed: int = 0
    kind = "cohorts"

    def __post_init__(self):
        if int(self.k) != self.k or self.k < 1:
            raise ValueError(f"cohort count k must be an integer >= 1, got {self.k}")


InterventionSpec = Union[NoIntervention, UniformLockdown, CloseVenues, ProtectAgents, Cohorts]
SPEC_TYPES = {c.kind: c for c in (NoIntervention, UniformLockdown, CloseVenues, ProtectAgents, Cohorts)}


def _check_fraction(name: str, value: float) -> None:
    if not 0.0 <= value <= 1.0:
        raise ValueError(f"{name} must lie in [0, 1], got {value}")


def _check_selector(selector: str) -> None:
    if selector not in ("top", "random"):
        raise ValueError(f"selector must be 'top' or 'random', got {selector!r}")


def spec_to_dict(spec: InterventionSpec) -> dict:
    d = {"kind": spec.kind, **asdict(spec)}
    if d.get("venue_ids") is not None:
        d["venue_ids"] = list(d["venue_ids"])
    elif "venue_ids" in d:
        del d["venue_ids"]
    return d


def spec_from_dict(data: Mapping) -> InterventionSpec:
    data = dict(data)
    kind = data.pop("kind", "none")
    if kind not in SPEC_TYPES:
        raise ValueError(f"unknown intervention kind {kind!r}")
    return SPEC_TYPES[kind](**data)


# ---------------------------------------------------------------------------
# static transforms


def _n_selected(fraction: float, n: int) -> int:
    return min(n, math.ceil(fraction * n - 1e-9))


def _cost(before: EventStream, after: EventStream) -> CostReport:
    return CostReport(len(before), len(after))


def close_venue_set(stream: EventStream, venue_ids: Iterable[str]) -> tuple[EventStream, CostReport]:
    """Remove check-ins and located meetings at an explicit set of venues."""
    vidx = {v: i for i, v in enumerate(stream.venues)}
    closed = np.zeros(len(stream.venues) + 1, dtype=bool)
    for v in venue_ids:
        if v in vidx:
            closed[vidx[v]] = True
    # index -1 (no location) maps to the spare last slot, which stays open
    out = stream.select(~closed[stream.place])
    return out, _cost(stream, out)


def select_venues(stream: EventStream, selector: Selector, fraction: float, rng: RngHandle | None = None) -> list[str]:
    _check_selector(selector)
    _check_fraction("fraction", fraction)
    n = len(stream.venues)
    k = _n_selected(fraction, n)
    if selector == "top":
        chosen = np.argsort(-venue_popularity(stream), kind="stable")[:k]
    else:
        chosen = (rng or RngHandle()).generator.choice(n, size=k, replace=False)
    return [stream.venues[i] for i in np.sort(chosen)]


def close_venues(
    stream: EventStream, selector: Selector = "top", fraction: float = 0.01, rng: RngHandle | None = None
) -> tuple[EventStream, CostReport]:
    """Close the most popular (or a random) ``ceil(fraction * V)`` venues."""
    return close_venue_set(stream, select_venues(stream, selector, fraction, rng))


def select_agents(stream: EventStream, selector: Selector, fraction: float, rng: RngHandle | None = None) -> np.ndarray:
    _check_selector(selector)
    _check_fraction("fraction", fraction)
    n = len(stream.agents)
    k = _n_selected(fraction, n)
    if selector == "top":
        chosen = np.argsort(-agent_activity(stream), kind="stable")[:k]
    else:
        chosen = (rng or RngHandle()).generator.choice(n, size=k, replace=False)
    return np.sort(chosen)


def protect_agents(
    stream: EventStream, selector: Selector = "top", fraction: float = 0.1, rng: RngHandle | None = None
) -> tuple[EventStream, CostReport]:
    """Isolate the most active (or random) agents by dropping all their events."""
    protected = np.zeros(len(stream.agents) + 1, dtype=bool)
    protected[select_agents(stream, selector, fraction, rng)] = True
    hit = protected[stream.a] | protected[stream.b]
    out = stream.select(~hit)
    return out, _cost(stream, out)


def assign_cohorts(roster: Iterable[str], k: int, rng: RngHandle) -> dict[str, int]:
    roster = list(roster)
    groups = rng.generator.integers(0, k, size=len(roster))
    return dict(zip(roster, groups.tolist()))


def apply_cohorts(stream: EventStream, assignment: Mapping[str, int]) -> tuple[EventStream, CostReport]:
    """Cut meetings across cohorts and tag agents with their cohort.

    Check-ins are kept; the engine keeps separate venue infection state per
    cohort, so a venue never carries infection from one cohort to another.
    """
    try:
        cohort = np.array([assignment[a] for a in stream.agents], dtype=np.int64)
    except KeyError as exc:
        raise ValueError(f"agent {exc.args[0]!r} has no cohort") from None
    b_cohort = np.where(stream.b >= 0, cohort[np.maximum(stream.b, 0)], -1)
    cross = (stream.kind == MEETING) & (cohort[stream.a] != b_cohort)
    out = replace(stream.select(~cross), cohort=cohort)
    return out, _cost(stream, out)


# ---------------------------------------------------------------------------
# dynamic lockdown


class LockdownPolicy:
    """Drops events at random for a fixed period once enough agents are infected.

    The trigger compares the cumulative infected fraction (recovered
    included) against ``trigger_fraction`` at event times. ``dropped`` and
    ``seen`` count events while the policy runs.
    """

    def __init__(self, drop_prob: float, trigger_fraction: float, duration_days: float, rng: RngHandle | None = None):
        self.spec = UniformLockdown(drop_prob, trigger_fraction, duration_days)
        self.rng = rng or RngHandle()
        self.started_at: float | None = None
        self.ends_at = math.inf
        self.dropped = 0
        self.seen = 0

    def drop(self, now: float, n_infected: int, n_agents: int) -> bool:
        self.seen += 1
        if self.started_at is None:
            if n_agents and n_infected / n_agents >= self.spec.trigger_fraction:
                self.started_at = now
                self.ends_at = now + self.spec.duration_days * DAY
            else:
                return False
        if now >= self.ends_at:
            return False
        if self.rng.uniform() < self.spec.drop_prob:
            self.dropped += 1
            return True
        return False


def lockdown_policy(drop_prob: float, trigger_fraction: float, duration_days: float,
                    rng: RngHandle | None = None) -> LockdownPolicy:
    return LockdownPolicy(drop_prob, trigger_fraction, duration_days, rng)


def apply_static(stream: EventStream, spec: InterventionSpec, rng: RngHandle) -> tuple[EventStream, CostReport]:
    """Apply a static strategy; lockdown and no-op specs return the stream as is."""
    if isinstance(spec, CloseVenues):
        if spec.venue_ids is not None:
            return close_venue_set(stream, spec.venue_ids)
        return close_venues(stream, spec.selector, spec.fraction, rng)
    if isinstance(spec, ProtectAgents):
        return protect_agents(stream, spec.selector, spec.fraction, rng)
    if isinstance(spec, Cohorts):
        return apply_cohorts(stream, assign_cohorts(stream.agents, spec.k, rng))
    return stream, CostReport(len(stream), len(stream))


# ---------------------------------------------------------------------------
# outcome accounting


def health_value(baseline_log: TransmissionLog, intervention_log: TransmissionLog) -> float:
    """Fraction of baseline infections (seeds included) averted."""
    y = baseline_log.n_infected
    if y == 0:
        raise ValueError("baseline run has no infections")
    return 1.0 - intervention_log.n_infected / y


def social_value(cost: CostReport) -> float:
    return cost.social_value


__all__ = [
    "Cohorts",
    "CloseVenues",
    "CostReport",
    "InterventionSpec",
    "LockdownPolicy",
    "NoIntervention",
    "ProtectAgents",
    "UniformLockdown",
    "apply_cohorts",
    "apply_static",
    "assign_cohorts",
    "close_venue_set",
    "close_venues",
    "health_value",
    "lockdown_policy",
    "protect_agents",
    "select_agents",
    "select_venues",
    "social_value",
    "spec_from_dict",
    "spec_to_dict",
]
