"""Event-ordered contagion over check-ins (via venues) or meetings (person to person)."""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Literal

import numpy as np

from .ingest import CHECKIN, MEETING, EventStream
from .interventions import (
    Cohorts,
    InterventionSpec,
    LockdownPolicy,
    NoIntervention,
    UniformLockdown,
    apply_static,
    spec_to_dict,
)
from .model import DAY, DiseaseParams, RngHandle, assign_symptomatic, sample_stage_durations
from .transmission import AGENT, SEED, VENUE, CostReport, LogBuilder, TransmissionLog

Mode = Literal["venue", "meeting"]


class SimulationError(ValueError):
    pass


@dataclass
class SimulationConfig:
    params: DiseaseParams = field(default_factory=DiseaseParams)
    n_seeds: int = 10
    horizon_days: int | None = None
    mode: Mode = "venue"
    intervention: InterventionSpec = field(default_factory=NoIntervention)
    rng: RngHandle = field(default_factory=RngHandle)


@dataclass
class VenueState:
    infected_until: float = -math.inf
    set_by: int = -1

    def infected(self, now: float) -> bool:
        return now < self.infected_until


def _prepare(stream: EventStream, cfg: SimulationConfig, kind: int):
    """Restrict to the mode's events inside the horizon and draw the seeds."""
    horizon = stream.horizon_days if cfg.horizon_days is None else cfg.horizon_days
    t_stop = stream.t0 + horizon * DAY
    base = stream.select((stream.kind == kind) & (stream.t < t_stop))

    eligible = base.active_agents()
    if cfg.n_seeds > len(eligible):
        raise SimulationError(f"{cfg.n_seeds} seeds requested but only {len(eligible)} agents have events")
    epi = cfg.rng.child(0)
    seeds = np.sort(epi.generator.choice(eligible, size=cfg.n_seeds, replace=False)) if cfg.n_seeds else []

    spec = cfg.intervention
    irng = RngHandle(getattr(spec, "seed", 0), cfg.rng.stream, (*cfg.rng.path, 1))
    events, cost = apply_static(base, spec, irng)
    policy = None
    if isinstance(spec, UniformLockdown):
        policy = LockdownPolicy(spec.drop_prob, spec.trigger_fraction, spec.duration_days, cfg.rng.child(2))

    out = LogBuilder(stream.agents, stream.venues, stream.t0, horizon)
    params = cfg.params
    for s in np.asarray(seeds).tolist():
        sym = assign_symptomatic(params, epi)
        d = sample_stage_durations(params, sym, epi)
        out.infect(s, stream.t0, stream.t0, d.infectious_days, d.in_care_days, SEED, -1, -1, DAY)
    return events, cost, policy, epi, out


def _infect(out: LogBuilder, i: int, now: float, kind: int, source: int, infector: int,
            params: DiseaseParams, rng: RngHandle) -> None:
    sym = assign_symptomatic(params, rng)
    d = sample_stage_durations(params, sym, rng)
    out.infect(i, now, now + d.incubation_days * DAY, d.infectious_days, d.in_care_days, kind, source, infector, DAY)


def _finish(out: LogBuilder, cfg: SimulationConfig, cost: CostReport, policy: LockdownPolicy | None,
            mode: str) -> TransmissionLog:
    if policy is not None:
        cost = CostReport(cost.events_original, cost.events_retained - policy.dropped)
    meta = {
        "mode": mode,
        "rng_seed": cfg.rng.seed,
        "rng_stream": cfg.rng.stream,
        "n_seeds": cfg.n_seeds,
        "params": cfg.params.to_dict(),
        "intervention": spec_to_dict(cfg.intervention),
        "cost": {"events_original": cost.events_original, "events_retained": cost.events_retained},
    }
    if policy is not None:
        meta["lockdown_started_at"] = policy.started_at
    return out.build(meta)


def run_venue_simulation(stream: EventStream, cfg: SimulationConfig) -> TransmissionLog:
    """Replay check-ins; infection passes through venues only.

    An infectious agent's check-in marks the venue infected for the venue
    window (resetting any running timer). A susceptible agent checking in at
    an infected venue is infected with probability beta. In-care agents'
    check-ins are ignored.
    """
    events, cost, policy, rng, out = _prepare(stream, cfg, CHECKIN)
    params = cfg.params
    beta = params.beta
    window = params.venue_window
    n = len(stream.agents)

    k = 1
    cohort = [0] * n
    if events.cohort is not None and len(events.cohort):
        k = int(events.cohort.max()) + 1
        cohort = events.cohort.tolist()
    n_keys = max(1, len(stream.venues) * k)
    until = [-math.inf] * n_keys
    set_by = [-1] * n_keys

    infected_at = out.infected_at
    onset = out.infectious_at
    ends = out.ends_at
    n_infected = len(out.order)
    uniform = rng.uniform

    for t, a, v in zip(events.t.tolist(), events.a.tolist(), events.place.tolist()):
        if policy is not None and policy.drop(t, n_infected, n):
            continue
        key = v * k + cohort[a]
        if infected_at[a] == infected_at[a]:  # infected at some point (not NaN)
            if onset[a] <= t < ends[a]:
                until[key] = t + window
                set_by[key] = a
            continue
        if t < until[key] and uniform() < beta:
            _infect(out, a, t, VENUE, v, set_by[key], params, rng)
            n_infected += 1
    return _finish(out, cfg, cost, policy, "venue")


def run_meeting_simulation(stream: EventStream, cfg: SimulationConfig) -> TransmissionLog:
    """Replay meetings; an infectious and a susceptible participant make one Bernoulli trial."""
    events, cost, policy, rng, out = _prepare(stream, cfg, MEETING)
    params = cfg.params
    beta = params.beta
    n = len(stream.agents)

    infected_at = out.infected_at
    onset = out.infectious_at
    ends = out.ends_at
    n_infected = len(out.order)
    uniform = rng.uniform

    for t, a, b in zip(events.t.tolist(), events.a.tolist(), events.b.tolist()):
        if policy is not None and policy.drop(t, n_infected, n):
            continue
        a_sus = infected_at[a] != infected_at[a]
        b_sus = infected_at[b] != infected_at[b]
        if a_sus == b_sus:
            continue
        if a_sus:
            src, dst = b, a
        else:
            src, dst = a, b
        if onset[src] <= t < ends[src] and uniform() < beta:
            _infect(out, dst, t, AGENT, src, src, params, rng)
            n_infected += 1
    return _finish(out, cfg, cost, policy, "meeting")


def simulate(stream: EventStream, cfg: SimulationConfig) -> TransmissionLog:
    if cfg.mode == "venue":
        return run_venue_simulation(stream, cfg)
    if cfg.mode == "meeting":
        return run_meeting_simulation(stream, cfg)
    raise SimulationError(f"unknown transmission mode {cfg.mode!r}")


def run_ensemble(stream: EventStream, cfg: SimulationConfig, n_runs: int = 10) -> list[TransmissionLog]:
    """Independent runs on rng streams ``cfg.rng.stream + r``."""
    logs = []
    for r in range(n_runs):
        rng = RngHandle(cfg.rng.seed, cfg.rng.stream + r, cfg.rng.path)
        run_cfg = SimulationConfig(cfg.params, cfg.n_seeds, cfg.horizon_days, cfg.mode, cfg.intervention, rng)
        logs.append(simulate(stream, run_cfg))
    return logs


__all__ = [
    "Cohorts",
    "SimulationConfig",
    "SimulationError",
    "VenueState",
    "run_ensemble",
    "run_meeting_simulation",
    "run_venue_simulation",
    "simulate",
]
