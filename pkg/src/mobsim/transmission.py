"""Who infected whom, when, and each infected agent's stage timeline."""
from __future__ import annotations

import csv
import json
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterator

import numpy as np

NONE, SEED, VENUE, AGENT = 0, 1, 2, 3
SOURCE_KINDS = {NONE: "", SEED: "seed", VENUE: "venue", AGENT: "agent"}
_KIND_CODES = {v: k for k, v in SOURCE_KINDS.items()}


@dataclass(frozen=True)
class InfectionRecord:
    infectee: str
    source_kind: str
    source_id: str
    time: float
    attributed_to: str


@dataclass(frozen=True)
class CostReport:
    events_original: int
    events_retained: int

    @property
    def social_value(self) -> float:
        if self.events_original == 0:
            return 1.0
        return self.events_retained / self.events_original

    @property
    def events_removed(self) -> int:
        return self.events_original - self.events_retained

    def then(self, other: "CostReport") -> "CostReport":
        """Compose with a second intervention applied to this one's output."""
        return CostReport(self.events_original, self.events_retained - other.events_removed)


@dataclass(frozen=True)
class TransmissionLog:
    """Outcome of one simulation run.

    Per-agent arrays are indexed by roster position; times are absolute
    seconds and NaN where a stage never happens. ``infector`` is the agent
    credited with each infection: the direct source in person-to-person
    transmission, or the agent who last infected or refreshed the venue.
    ``order`` lists infected agents in processing order, seeds first.
    """

    agents: tuple[str, ...]
    t0: float
    horizon_days: int
    infected_at: np.ndarray
    infectious_at: np.ndarray
    care_at: np.ndarray
    recovered_at: np.ndarray
    source_kind: np.ndarray
    source: np.ndarray
    infector: np.ndarray
    order: np.ndarray
    venues: tuple[str, ...] = ()
    meta: dict = field(default_factory=dict, compare=False)

    @property
    def n_agents(self) -> int:
        return len(self.agents)

    @property
    def n_infected(self) -> int:
        return len(self.order)

    @property
    def seeds(self) -> list[str]:
        return [self.agents[i] for i in self.order.tolist() if self.source_kind[i] == SEED]

    @property
    def n_seeds(self) -> int:
        return int(np.count_nonzero(self.source_kind == SEED))

    def infected_ids(self) -> set[str]:
        return {self.agents[i] for i in self.order.tolist()}

    @property
    def cost(self) -> CostReport | None:
        c = self.meta.get("cost")
        return None if c is None else CostReport(c["events_original"], c["events_retained"])

    def records(self) -> Iterator[InfectionRecord]:
        for i in self.order.tolist():
            kind = int(self.source_kind[i])
            src = int(self.source[i])
            if kind == VENUE:
                source_id = self.venues[src]
            elif kind == AGENT:
                source_id = self.agents[src]
            else:
                source_id = ""
            inf = int(self.infector[i])
            yield InfectionRecord(
                self.agents[i], SOURCE_KINDS[kind], source_id, float(self.infected_at[i]),
                self.agents[inf] if inf >= 0 else "",
            )

    def secondary_counts(self) -> np.ndarray:
        """Infections credited to each agent."""
        inf = self.infector[self.infector >= 0]
        return np.bincount(inf, minlength=self.n_agents)


def _t(x: float) -> str:
    return "" if math.isnan(x) else repr(float(x))


def _parse_t(s: str) -> float:
    return float(s) if s else math.nan


def write_log(tlog: TransmissionLog, directory, prefix: str = "") -> list[Path]:
    """Write infections, stage events and run metadata; returns the paths."""
    d = Path(directory)
    d.mkdir(parents=True, exist_ok=True)
    inf_path = d / f"{prefix}infections.tsv"
    stage_path = d / f"{prefix}stages.tsv"
    meta_path = d / f"{prefix}log.json"
    with open(inf_path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, delimiter="\t", lineterminator="\n")
        w.writerow(["infectee", "source_kind", "source_id", "time", "attributed_to"])
        for r in tlog.records():
            w.writerow([r.infectee, r.source_kind, r.source_id, _t(r.time), r.attributed_to])
    with open(stage_path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, delimiter="\t", lineterminator="\n")
        w.writerow(["agent", "infected_at", "infectious_at", "care_at", "recovered_at"])
        for i in tlog.order.tolist():
            w.writerow([
                tlog.agents[i], _t(tlog.infected_at[i]), _t(tlog.infectious_at[i]),
                _t(tlog.care_at[i]), _t(tlog.recovered_at[i]),
            ])
    meta = {
        "agents": list(tlog.agents),
        "venues": list(tlog.venues),
        "t0": tlog.t0,
        "horizon_days": tlog.horizon_days,
        "meta": tlog.meta,
    }
    meta_path.write_text(json.dumps(meta, sort_keys=True, indent=1) + "\n", encoding="utf-8")
    return [inf_path, stage_path, meta_path]


def read_log(directory, prefix: str = "") -> TransmissionLog:
    d = Path(directory)
    meta = json.loads((d / f"{prefix}log.json").read_text(encoding="utf-8"))
    agents = tuple(meta["agents"])
    venues = tuple(meta["venues"])
    aidx = {a: i for i, a in enumerate(agents)}
    vidx = {v: i for i, v in enumerate(venues)}
    n = len(agents)
    arrays = {k: np.full(n, np.nan) for k in ("infected_at", "infectious_at", "care_at", "recovered_at")}
    source_kind = np.zeros(n, dtype=np.int8)
    source = np.full(n, -1, dtype=np.int64)
    infector = np.full(n, -1, dtype=np.int64)
    order = []
    with open(d / f"{prefix}infections.tsv", newline="", encoding="utf-8") as fh:
        for row in csv.DictReader(fh, delimiter="\t"):
            i = aidx[row["infectee"]]
            order.append(i)
            kind = _KIND_CODES[row["source_kind"]]
            source_kind[i] = kind
            if kind == VENUE:
                source[i] = vidx[row["source_id"]]
            elif kind == AGENT:
                source[i] = aidx[row["source_id"]]
            if row["attributed_to"]:
                infector[i] = aidx[row["attributed_to"]]
    with open(d / f"{prefix}stages.tsv", newline="", encoding="utf-8") as fh:
        for row in csv.DictReader(fh, delimiter="\t"):
            i = aidx[row["agent"]]
            for k in arrays:
                arrays[k][i] = _parse_t(row[k])
    return TransmissionLog(
        agents=agents, t0=float(meta["t0"]), horizon_days=int(meta["horizon_days"]),
        source_kind=source_kind, source=source, infector=infector,
        order=np.array(order, dtype=np.int64), venues=venues, meta=meta["meta"], **arrays,
    )


class LogBuilder:
    """Mutable per-run state that becomes a :class:`TransmissionLog`."""

    def __init__(self, agents, venues, t0: float, horizon_days: int):
        n = len(agents)
        self.agents = tuple(agents)
        self.venues = tuple(venues)
        self.t0 = t0
        self.horizon_days = horizon_days
        self.infected_at = [math.nan] * n
        self.infectious_at = [math.inf] * n
        self.care_at = [math.nan] * n
        self.ends_at = [math.inf] * n
        self.recovered_at = [math.inf] * n
        self.source_kind = [NONE] * n
        self.source = [-1] * n
        self.infector = [-1] * n
        self.order: list[int] = []

    def infect(self, i: int, now: float, onset: float, infectious_days: float, care_days, kind: int, source: int,
               infector: int, day: float) -> None:
        self.infected_at[i] = now
        self.infectious_at[i] = onset
        end = onset + infectious_days * day
        self.ends_at[i] = end
        if care_days is None:
            self.recovered_at[i] = end
        else:
            self.care_at[i] = end
            self.recovered_at[i] = end + care_days * day
        self.source_kind[i] = kind
        self.source[i] = source
        self.infector[i] = infector
        self.order.append(i)

    def build(self, meta: dict) -> TransmissionLog:
        nan_inf = lambda xs: np.where(np.isinf(xs), np.nan, xs)  # noqa: E731
        return TransmissionLog(
            agents=self.agents,
            t0=self.t0,
            horizon_days=self.horizon_days,
            infected_at=np.array(self.infected_at, dtype=float),
            infectious_at=nan_inf(np.array(self.infectious_at, dtype=float)),
            care_at=np.array(self.care_at, dtype=float),
            recovered_at=nan_inf(np.array(self.recovered_at, dtype=float)),
            source_kind=np.array(self.source_kind, dtype=np.int8),
            source=np.array(self.source, dtype=np.int64),
            infector=np.array(self.infector, dtype=np.int64),
            order=np.array(self.order, dtype=np.int64),
            venues=self.venues,
            meta=meta,
        )
