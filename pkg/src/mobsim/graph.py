"""Static contact-graph abstraction of a mobility stream and its round-based contagion.

Meetings become a weighted person-person graph and check-ins a weighted
agent-venue bipartite graph; weights are average daily interaction counts.
Contagion runs in synchronous daily rounds using the same disease model.
"""
from __future__ import annotations

import csv
import math
from dataclasses import dataclass, replace
from pathlib import Path
from typing import Iterable, Union

import numpy as np

from .ingest import CHECKIN, MEETING, EventStream, Meeting
from .model import DAY, DiseaseParams, RngHandle, assign_symptomatic, sample_stage_durations
from .transmission import AGENT, SEED, VENUE, LogBuilder, TransmissionLog


@dataclass(frozen=True)
class PersonGraph:
    """Undirected graph; edge ``(u[i], v[i])`` with ``u < v`` has weight ``w[i]``."""

    nodes: tuple[str, ...]
    u: np.ndarray
    v: np.ndarray
    w: np.ndarray

    @property
    def n_edges(self) -> int:
        return len(self.w)

    def strength(self) -> np.ndarray:
        n = len(self.nodes)
        return np.bincount(self.u, self.w, n) + np.bincount(self.v, self.w, n)

    def with_edges(self, keep: np.ndarray) -> "PersonGraph":
        return replace(self, u=self.u[keep], v=self.v[keep], w=self.w[keep])

    def edges(self) -> list[tuple[str, str, float]]:
        return [(self.nodes[a], self.nodes[b], float(x)) for a, b, x in zip(self.u, self.v, self.w)]


@dataclass(frozen=True)
class BipartiteGraph:
    """Agent-venue graph; edge ``i`` joins agent ``u[i]`` and venue ``v[i]``."""

    nodes: tuple[str, ...]
    venues: tuple[str, ...]
    u: np.ndarray
    v: np.ndarray
    w: np.ndarray

    @property
    def n_edges(self) -> int:
        return len(self.w)

    def strength(self) -> np.ndarray:
        return np.bincount(self.u, self.w, len(self.nodes))

    def with_edges(self, keep: np.ndarray) -> "BipartiteGraph":
        return replace(self, u=self.u[keep], v=self.v[keep], w=self.w[keep])

    def edges(self) -> list[tuple[str, str, float]]:
        return [(self.nodes[a], self.venues[b], float(x)) for a, b, x in zip(self.u, self.v, self.w)]


Graph = Union[PersonGraph, BipartiteGraph]


def transmission_probability(beta, w):
    """Per-round infection probability over an edge of weight ``w``: 1 - (1 - beta)^w."""
    return 1.0 - np.power(1.0 - np.asarray(beta, dtype=float), w)


def removal_probability(alpha, w):
    """Probability that a stay-home rate ``alpha`` removes an edge of weight ``w``."""
    return 1.0 - np.power(1.0 - np.asarray(alpha, dtype=float), w)


def build_person_graph(meetings: Union[EventStream, Iterable[Meeting]], days: float) -> PersonGraph:
    if not days > 0:
        raise ValueError("days must be > 0")
    if not isinstance(meetings, EventStream):
        meetings = EventStream.build(meetings=meetings)
    ms = meetings.select(meetings.kind == MEETING)
    n = len(meetings.agents)
    keys = ms.a * n + ms.b
    uniq, counts = np.unique(keys, return_counts=True)
    return PersonGraph(meetings.agents, uniq // n, uniq % n, counts / days)


def build_bipartite_graph(checkins: EventStream, days: float) -> BipartiteGraph:
    if not days > 0:
        raise ValueError("days must be > 0")
    cs = checkins.select(checkins.kind == CHECKIN)
    nv = max(1, len(checkins.venues))
    keys = cs.a * nv + cs.place
    uniq, counts = np.unique(keys, return_counts=True)
    return BipartiteGraph(checkins.agents, checkins.venues, uniq // nv, uniq % nv, counts / days)


# ---------------------------------------------------------------------------
# graph-level interventions


def graph_lockdown(graph: Graph, alpha: float, rng: RngHandle) -> Graph:
    """Drop each edge independently with probability 1 - (1 - alpha)^w."""
    if not 0.0 <= alpha <= 1.0:
        raise ValueError("alpha must lie in [0, 1]")
    drop = rng.generator.random(graph.n_edges) < removal_probability(alpha, graph.w)
    return graph.with_edges(~drop)


def graph_protect_top(graph: Graph, fraction: float) -> Graph:
    """Isolate the ``ceil(fraction * N)`` agents of largest strength (ties by id).

    The nodes stay in the roster without edges, so logs remain comparable.
    """
    if not 0.0 <= fraction <= 1.0:
        raise ValueError("fraction must lie in [0, 1]")
    n = len(graph.nodes)
    k = min(n, math.ceil(fraction * n - 1e-9))
    top = np.argsort(-graph.strength(), kind="stable")[:k]
    removed = np.zeros(n, dtype=bool)
    removed[top] = True
    keep = ~removed[graph.u]
    if isinstance(graph, PersonGraph):
        keep &= ~removed[graph.v]
    return graph.with_edges(keep)


def protected_nodes(graph: Graph, fraction: float) -> list[str]:
    n = len(graph.nodes)
    k = min(n, math.ceil(fraction * n - 1e-9))
    return [graph.nodes[i] for i in np.argsort(-graph.strength(), kind="stable")[:k]]


def graph_cohorts(graph: Graph, k: int, rng: RngHandle | None = None, groups=None) -> Graph:
    """Random groups of agents with every cross-group contact removed.

    ``groups`` forces the per-node group index instead of drawing it. For
    bipartite graphs each venue is split into one copy per group, the graph
    analogue of per-cohort venue state.
    """
    if k < 1:
        raise ValueError("k must be >= 1")
    if groups is None:
        group = (rng or RngHandle()).generator.integers(0, k, size=len(graph.nodes))
    else:
        group = np.asarray(groups, dtype=np.int64)
        if group.shape != (len(graph.nodes),) or group.min(initial=0) < 0 or group.max(initial=0) >= k:
            raise ValueError("groups must give one index in [0, k) per node")
    if isinstance(graph, PersonGraph):
        return graph.with_edges(group[graph.u] == group[graph.v])
    if k == 1:
        return graph
    key = graph.v * k + group[graph.u]
    uniq, inv = np.unique(key, return_inverse=True)
    venues = tuple(f"{graph.venues[x // k]}#{x % k}" for x in uniq.tolist())
    return BipartiteGraph(graph.nodes, venues, graph.u, inv.astype(np.int64), graph.w)


# ---------------------------------------------------------------------------
# round-based contagion


def _rounds(x: float) -> int:
    return max(1, int(math.floor(x + 0.5)))


class _RoundState:
    def __init__(self, n: int, params: DiseaseParams, rng: RngHandle):
        self.params = params
        self.rng = rng
        self.infected = np.zeros(n, dtype=bool)
        self.onset = np.full(n, np.iinfo(np.int64).max, dtype=np.int64)
        self.end = np.full(n, np.iinfo(np.int64).max, dtype=np.int64)

    def infect(self, out: LogBuilder, i: int, r: int, onset_now: bool, kind: int, source: int, infector: int):
        sym = assign_symptomatic(self.params, self.rng)
        d = sample_stage_durations(self.params, sym, self.rng)
        onset = r if onset_now else r + _rounds(d.incubation_days)
        inf_days = _rounds(d.infectious_days)
        care = None if d.in_care_days is None else _rounds(d.in_care_days)
        t = out.t0 + r * DAY
        out.infect(i, t, out.t0 + onset * DAY, inf_days, care, kind, source, infector, DAY)
        self.infected[i] = True
        self.onset[i] = onset
        self.end[i] = onset + inf_days

    def infectious(self, r: int) -> np.ndarray:
        return (self.onset <= r) & (r < self.end)


def _first_success(dst: np.ndarray, src: np.ndarray) -> tuple[list[int], list[int]]:
    """First source per destination, destinations in increasing order."""
    if len(dst) == 0:
        return [], []
    order = np.lexsort((np.arange(len(dst)), dst))
    dst, src = dst[order], src[order]
    first = np.ones(len(dst), dtype=bool)
    first[1:] = dst[1:] != dst[:-1]
    return dst[first].tolist(), src[first].tolist()


def run_graph_simulation(
    graph: Graph,
    params: DiseaseParams,
    n_seeds: int,
    rng: RngHandle,
    max_rounds: int,
    t0: float = 0.0,
) -> TransmissionLog:
    """Synchronous daily rounds of contagion on a contact graph.

    Person graphs: each agent infectious at the start of a round tries once
    per susceptible neighbour with probability 1 - (1 - beta)^w. Bipartite
    graphs: infectious agents first infect venues with probability
    min(1, w), venues stay infected for two rounds, then infected venues
    infect susceptible visitors with probability 1 - (1 - beta)^w. Stage
    durations are rounded to whole days.
    """
    if max_rounds <= 0:
        raise ValueError("max_rounds must be positive")
    n = len(graph.nodes)
    if n == 0:
        raise ValueError("empty graph")
    bipartite = isinstance(graph, BipartiteGraph)
    eligible = np.unique(graph.u) if bipartite else np.unique(np.concatenate([graph.u, graph.v]))
    if n_seeds > len(eligible):
        raise ValueError(f"{n_seeds} seeds requested but only {len(eligible)} nodes have edges")

    epi = rng.child(0)
    draws = rng.child(3).generator
    state = _RoundState(n, params, epi)
    out = LogBuilder(graph.nodes, graph.venues if bipartite else (), t0, max_rounds)
    seeds = np.sort(epi.generator.choice(eligible, size=n_seeds, replace=False)) if n_seeds else []
    for s in np.asarray(seeds).tolist():
        state.infect(out, s, 0, True, SEED, -1, -1)

    p_edge = transmission_probability(params.beta, graph.w)
    if bipartite:
        p_visit = np.minimum(1.0, graph.w)
        nv = len(graph.venues)
        venue_until = np.full(nv, -1, dtype=np.int64)
        venue_setter = np.full(nv, -1, dtype=np.int64)
    else:
        src_all = np.concatenate([graph.u, graph.v])
        dst_all = np.concatenate([graph.v, graph.u])
        p_all = np.concatenate([p_edge, p_edge])

    for r in range(max_rounds):
        inf = state.infectious(r)
        sus = ~state.infected
        if bipartite:
            m = np.nonzero(inf[graph.u])[0]
            hit = m[draws.random(len(m)) < p_visit[m]]
            # later edges overwrite earlier ones, so the setter is deterministic
            venue_until[graph.v[hit]] = r + 2
            venue_setter[graph.v[hit]] = graph.u[hit]
            live = venue_until > r
            m = np.nonzero(live[graph.v] & sus[graph.u])[0]
            ok = m[draws.random(len(m)) < p_edge[m]]
            dsts, venues = _first_success(graph.u[ok], graph.v[ok])
            for d, v in zip(dsts, venues):
                state.infect(out, d, r, False, VENUE, v, int(venue_setter[v]))
        else:
            m = np.nonzero(inf[src_all] & sus[dst_all])[0]
            ok = m[draws.random(len(m)) < p_all[m]]
            dsts, srcs = _first_success(dst_all[ok], src_all[ok])
            for d, s in zip(dsts, srcs):
                state.infect(out, d, r, False, AGENT, s, s)
    meta = {
        "mode": "bipartite" if bipartite else "person",
        "rng_seed": rng.seed,
        "rng_stream": rng.stream,
        "n_seeds": n_seeds,
        "params": params.to_dict(),
    }
    return out.build(meta)


def compare_with_mobility(graph_log: TransmissionLog, mobility_log: TransmissionLog) -> tuple[float, float]:
    """(relative difference of final infected counts, Jaccard of infected sets)."""
    a, b = graph_log.n_infected, mobility_log.n_infected
    diff = 0.0 if max(a, b) == 0 else abs(a - b) / max(a, b)
    return diff, jaccard(graph_log.infected_ids(), mobility_log.infected_ids())


def jaccard(a: set, b: set) -> float:
    union = len(a | b)
    return 1.0 if union == 0 else len(a & b) / union


# ---------------------------------------------------------------------------
# edge-list files


def write_graph(graph: Graph, edges_path, nodes_path) -> None:
    with open(edges_path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, delimiter="\t", lineterminator="\n")
        w.writerow(["node_a", "node_b", "weight"])
        for a, b, x in graph.edges():
            w.writerow([a, b, repr(x)])
    with open(nodes_path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, delimiter="\t", lineterminator="\n")
        w.writerow(["node", "part"])
        for a in graph.nodes:
            w.writerow([a, "agent"])
        if isinstance(graph, BipartiteGraph):
            for v in graph.venues:
                w.writerow([v, "venue"])


def read_graph(edges_path, nodes_path) -> Graph:
    agents, venues = [], []
    with open(Path(nodes_path), newline="", encoding="utf-8") as fh:
        for row in csv.DictReader(fh, delimiter="\t"):
            (venues if row["part"] == "venue" else agents).append(row["node"])
    aidx = {a: i for i, a in enumerate(agents)}
    vidx = {v: i for i, v in enumerate(venues)}
    target = vidx if venues else aidx
    u, v, w = [], [], []
    with open(Path(edges_path), newline="", encoding="utf-8") as fh:
        for row in csv.DictReader(fh, delimiter="\t"):
            u.append(aidx[row["node_a"]])
            v.append(target[row["node_b"]])
            w.append(float(row["weight"]))
    u_, v_, w_ = np.array(u, dtype=np.int64), np.array(v, dtype=np.int64), np.array(w, dtype=float)
    if venues:
        return BipartiteGraph(tuple(agents), tuple(venues), u_, v_, w_)
    return PersonGraph(tuple(agents), u_, v_, w_)
