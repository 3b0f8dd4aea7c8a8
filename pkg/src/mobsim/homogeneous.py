"""Homogeneous-mixing SEIR baseline: same disease model, random daily contacts."""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .ingest import MEETING, EventStream
from .model import DAY, DiseaseParams, RngHandle, assign_symptomatic, sample_stage_durations
from .transmission import AGENT, SEED, LogBuilder, TransmissionLog


@dataclass
class HomogeneousConfig:
    N: int
    c: float
    params: DiseaseParams = field(default_factory=DiseaseParams)
    n_seeds: int = 10
    horizon_days: int = 100
    rng: RngHandle = field(default_factory=RngHandle)
    roster: Sequence[str] | None = None

    def __post_init__(self):
        if self.N < 2:
            raise ValueError("N must be >= 2")
        if not self.c > 0:
            raise ValueError("c must be > 0")
        if self.n_seeds > self.N:
            raise ValueError("more seeds than agents")


def estimate_c(stream: EventStream, n_agents: int, days: float) -> float:
    """Average daily contacts per agent: 2 * meetings / (N * days)."""
    if days <= 0:
        raise ValueError("days must be > 0")
    if n_agents <= 0:
        raise ValueError("population must be positive")
    return 2.0 * int(np.count_nonzero(stream.kind == MEETING)) / (n_agents * days)


def daily_contacts(n: int, c: float) -> int:
    return int(math.floor(n * c / 2.0))


def sample_pairs(n: int, m: int, gen: np.random.Generator) -> tuple[np.ndarray, np.ndarray]:
    """``m`` uniform unordered pairs of distinct agents, drawn with replacement."""
    a = gen.integers(0, n, size=m)
    b = gen.integers(0, n - 1, size=m)
    b = b + (b >= a)
    return a, b


def run_homogeneous(cfg: HomogeneousConfig, t0: float = 0.0) -> TransmissionLog:
    """Daily rounds of ``floor(N c / 2)`` random meetings held at the start of each day.

    Each day's meetings are processed in sampled order through the same state
    machine and beta as the mobility simulation.
    """
    n = cfg.N
    roster = tuple(cfg.roster) if cfg.roster is not None else tuple(f"a{i:0{len(str(n - 1))}d}" for i in range(n))
    params = cfg.params
    epi = cfg.rng.child(0)
    pair_gen = cfg.rng.child(4).generator
    out = LogBuilder(roster, (), t0, cfg.horizon_days)
    for s in np.sort(epi.generator.choice(n, size=cfg.n_seeds, replace=False)).tolist():
        sym = assign_symptomatic(params, epi)
        d = sample_stage_durations(params, sym, epi)
        out.infect(s, t0, t0, d.infectious_days, d.in_care_days, SEED, -1, -1, DAY)

    infected_at = np.full(n, np.nan)
    onset = np.full(n, np.inf)
    ends = np.full(n, np.inf)
    for i in out.order:
        infected_at[i] = out.infected_at[i]
        onset[i] = out.infectious_at[i]
        ends[i] = out.ends_at[i]

    m = daily_contacts(n, cfg.c)
    beta = params.beta
    for day in range(cfg.horizon_days):
        t = t0 + day * DAY
        a, b = sample_pairs(n, m, pair_gen)
        sus = np.isnan(infected_at)
        inf = (onset <= t) & (t < ends)
        # only mixed infectious-susceptible pairs can transmit; nobody infected
        # today becomes infectious today, so the day-start states decide
        cand = np.nonzero((inf[a] & sus[b]) | (inf[b] & sus[a]))[0]
        for k in cand.tolist():
            x, y = int(a[k]), int(b[k])
            src, dst = (x, y) if inf[x] else (y, x)
            if not np.isnan(infected_at[dst]):
                continue
            if epi.uniform() < beta:
                sym = assign_symptomatic(params, epi)
                d = sample_stage_durations(params, sym, epi)
                start = t + d.incubation_days * DAY
                out.infect(dst, t, start, d.infectious_days, d.in_care_days, AGENT, src, src, DAY)
                infected_at[dst] = t
                onset[dst] = start
                ends[dst] = out.ends_at[dst]
    meta = {
        "mode": "homogeneous",
        "rng_seed": cfg.rng.seed,
        "rng_stream": cfg.rng.stream,
        "n_seeds": cfg.n_seeds,
        "c": cfg.c,
        "params": params.to_dict(),
    }
    return out.build(meta)
