"""Mobility data ingestion: check-ins, stay intervals and GPS traces.

Every modality ends up as an :class:`EventStream`, a time-ordered columnar
table of check-ins and pairwise meetings with integer-coded agent and venue
rosters. Rosters are kept lexicographically sorted, so integer codes order
exactly like the original string ids.
"""
from __future__ import annotations

import csv
import io
import logging
import math
import os
from collections import defaultdict
from dataclasses import dataclass, field, replace
from datetime import datetime, timezone
from typing import IO, Iterable, Iterator, Sequence, Union

import numpy as np
from scipy.spatial import cKDTree

from .model import DAY, RngHandle

log = logging.getLogger(__name__)

CHECKIN = 0
MEETING = 1

Source = Union[str, os.PathLike, IO[bytes], IO[str]]


class IngestError(ValueError):
    pass


@dataclass(frozen=True, order=True)
class CheckinEvent:
    t: float
    agent_id: str
    venue_id: str


@dataclass(frozen=True, order=True)
class StayInterval:
    agent_id: str
    location_id: str
    t_start: float
    t_end: float


@dataclass(frozen=True, order=True)
class GpsPoint:
    agent_id: str
    x: float
    y: float
    t: float


@dataclass(frozen=True, order=True)
class Meeting:
    t_start: float
    t_end: float
    a: str
    b: str
    location_id: str | None = None

    def __post_init__(self):
        if self.a == self.b:
            raise ValueError("a meeting needs two distinct agents")
        if self.b < self.a:
            a, b = self.b, self.a
            object.__setattr__(self, "a", a)
            object.__setattr__(self, "b", b)


Event = Union[CheckinEvent, Meeting]


@dataclass(frozen=True)
class EventStream:
    """Time-ordered check-ins and meetings.

    Columns are parallel numpy arrays. ``t`` is the primary time (check-in
    time or meeting start), ``b`` is -1 for check-ins and ``place`` is -1 when
    a meeting has no location. ``cohort`` optionally tags each agent with a
    cohort index (see :func:`mobsim.interventions.apply_cohorts`).
    """

    kind: np.ndarray
    t: np.ndarray
    t_end: np.ndarray
    a: np.ndarray
    b: np.ndarray
    place: np.ndarray
    agents: tuple[str, ...]
    venues: tuple[str, ...]
    t0: float = 0.0
    horizon_days: int = 0
    cohort: np.ndarray | None = None
    meta: dict = field(default_factory=dict, compare=False)

    @classmethod
    def build(
        cls,
        checkins: Iterable[CheckinEvent] = (),
        meetings: Iterable[Meeting] = (),
        *,
        agents: Iterable[str] = (),
        venues: Iterable[str] = (),
        t0: float | None = None,
        horizon_days: int | None = None,
        meta: dict | None = None,
    ) -> "EventStream":
        checkins = list(checkins)
        meetings = list(meetings)
        agent_set = set(agents)
        venue_set = set(venues)
        for c in checkins:
            agent_set.add(c.agent_id)
            venue_set.add(c.venue_id)
        for m in meetings:
            agent_set.update((m.a, m.b))
            if m.location_id is not None:
                venue_set.add(m.location_id)
        agent_roster = tuple(sorted(agent_set))
        venue_roster = tuple(sorted(venue_set))
        aidx = {x: i for i, x in enumerate(agent_roster)}
        vidx = {x: i for i, x in enumerate(venue_roster)}

        n = len(checkins) + len(meetings)
        kind = np.empty(n, dtype=np.int8)
        t = np.empty(n)
        t_end = np.empty(n)
        a = np.empty(n, dtype=np.int64)
        b = np.empty(n, dtype=np.int64)
        place = np.empty(n, dtype=np.int64)
        k = len(checkins)
        if k:
            kind[:k] = CHECKIN
            t[:k] = [c.t for c in checkins]
            t_end[:k] = t[:k]
            a[:k] = [aidx[c.agent_id] for c in checkins]
            b[:k] = -1
            place[:k] = [vidx[c.venue_id] for c in checkins]
        if meetings:
            kind[k:] = MEETING
            t[k:] = [m.t_start for m in meetings]
            t_end[k:] = [m.t_end for m in meetings]
            a[k:] = [aidx[m.a] for m in meetings]
            b[k:] = [aidx[m.b] for m in meetings]
            place[k:] = [-1 if m.location_id is None else vidx[m.location_id] for m in meetings]
        return cls.from_arrays(
            kind, t, t_end, a, b, place, agent_roster, venue_roster, t0=t0, horizon_days=horizon_days, meta=meta
        )

    @classmethod
    def from_arrays(
        cls, kind, t, t_end, a, b, place, agents, venues, *, t0=None, horizon_days=None, cohort=None, meta=None
    ) -> "EventStream":
        """Sort by (time, agent, partner, venue) and fill in origin and horizon."""
        t = np.asarray(t, dtype=float)
        order = np.lexsort((place, b, a, t))
        t = t[order]
        if t0 is None:
            t0 = float(t[0]) if len(t) else 0.0
        if horizon_days is None:
            horizon_days = int(math.floor((t[-1] - t0) / DAY)) + 1 if len(t) else 0
        return cls(
            kind=np.asarray(kind, dtype=np.int8)[order],
            t=t,
            t_end=np.asarray(t_end, dtype=float)[order],
            a=np.asarray(a, dtype=np.int64)[order],
            b=np.asarray(b, dtype=np.int64)[order],
            place=np.asarray(place, dtype=np.int64)[order],
            agents=tuple(agents),
            venues=tuple(venues),
            t0=float(t0),
            horizon_days=int(horizon_days),
            cohort=cohort,
            meta=dict(meta or {}),
        )

    def __len__(self) -> int:
        return len(self.t)

    def __iter__(self) -> Iterator[Event]:
        agents, venues = self.agents, self.venues
        for k, t, te, a, b, p in zip(
            self.kind.tolist(), self.t.tolist(), self.t_end.tolist(), self.a.tolist(), self.b.tolist(), self.place.tolist()
        ):
            if k == CHECKIN:
                yield CheckinEvent(t, agents[a], venues[p])
            else:
                yield Meeting(t, te, agents[a], agents[b], None if p < 0 else venues[p])

    @property
    def n_checkins(self) -> int:
        return int(np.count_nonzero(self.kind == CHECKIN))

    @property
    def n_meetings(self) -> int:
        return int(np.count_nonzero(self.kind == MEETING))

    @property
    def n_agents(self) -> int:
        return len(self.agents)

    def select(self, mask: np.ndarray) -> "EventStream":
        """Subset of events; rosters, origin and horizon unchanged."""
        return replace(
            self,
            kind=self.kind[mask],
            t=self.t[mask],
            t_end=self.t_end[mask],
            a=self.a[mask],
            b=self.b[mask],
            place=self.place[mask],
        )

    def checkins(self) -> "EventStream":
        return self.select(self.kind == CHECKIN)

    def meetings(self) -> "EventStream":
        return self.select(self.kind == MEETING)

    def active_agents(self) -> np.ndarray:
        """Sorted codes of agents with at least one event."""
        ids = np.concatenate([self.a, self.b[self.b >= 0]])
        return np.unique(ids)

    def check(self) -> None:
        """Raise AssertionError if sortedness or roster closure is violated."""
        assert np.all(np.diff(self.t) >= 0), "events are not time ordered"
        n, v = len(self.agents), len(self.venues)
        if len(self):
            assert self.a.min() >= 0 and self.a.max() < n
            assert self.b.max() < n
            assert self.place.max() < v
        assert list(self.agents) == sorted(self.agents)
        assert list(self.venues) == sorted(self.venues)


# ---------------------------------------------------------------------------
# file formats


def _open_text(source: Source):
    if isinstance(source, (str, os.PathLike)):
        return open(source, "r", encoding="utf-8", errors="replace", newline="")
    if isinstance(source, io.TextIOBase):
        return source
    return io.TextIOWrapper(source, encoding="utf-8", errors="replace", newline="")


def _parse_time_value(value: str, mode: str, time_format: str | None) -> float:
    value = value.strip()
    if mode == "epoch":
        return float(value)
    if time_format:
        dt = datetime.strptime(value, time_format)
    else:
        dt = datetime.fromisoformat(value.replace("Z", "+00:00"))
    if dt.tzinfo is None:
        dt = dt.replace(tzinfo=timezone.utc)
    return dt.timestamp()


def _detect_time_mode(value: str) -> str:
    try:
        float(value)
        return "epoch"
    except ValueError:
        return "iso"


@dataclass(frozen=True)
class TableSchema:
    """Column mapping for a delimited file.

    Columns are names when ``header`` is true and 0-based indices otherwise.
    ``time_format`` is a strptime pattern; when unset, timestamps are
    auto-detected per file as epoch seconds or ISO-8601.
    """

    columns: dict = field(default_factory=dict)
    delimiter: str = "\t"
    header: bool = True
    time_format: str | None = None
    max_bad_fraction: float = 0.001


CHECKIN_COLUMNS = {"agent_id": "agent_id", "venue_id": "venue_id", "timestamp": "timestamp"}
STAY_COLUMNS = {"agent_id": "agent_id", "location_id": "location_id", "t_start": "t_start", "t_end": "t_end"}
GPS_COLUMNS = {"agent_id": "agent_id", "x": "x", "y": "y", "t": "t"}
LATLON_COLUMNS = {"agent_id": "agent_id", "lat": "lat", "lon": "lon", "t": "t"}
MEETING_COLUMNS = {"a": "a", "b": "b", "t_start": "t_start", "t_end": "t_end", "location_id": "location_id"}


def _read_rows(source: Source, schema: TableSchema, defaults: dict, time_fields: Sequence[str], convert):
    """Yield converted records; skip and count malformed rows."""
    columns = {**defaults, **schema.columns}
    fh = _open_text(source)
    try:
        reader = csv.reader(fh, delimiter=schema.delimiter)
        if schema.header:
            try:
                header = next(reader)
            except StopIteration:
                header = []
            header = [h.strip().lstrip("﻿") for h in header]
            missing = [c for c in columns.values() if c not in header and c != "location_id"]
            if header and missing:
                raise IngestError(f"missing required column(s): {', '.join(missing)}")
            if not header:
                return [], 0, 0
            index = {k: (header.index(c) if c in header else None) for k, c in columns.items()}
        else:
            index = {k: int(c) for k, c in columns.items()}

        out = []
        bad = 0
        total = 0
        mode = None
        for row in reader:
            if not row or all(not x.strip() for x in row):
                continue
            total += 1
            try:
                values = {k: (row[i] if i is not None else None) for k, i in index.items()}
                if mode is None and not schema.time_format:
                    mode = _detect_time_mode(values[time_fields[0]])
                for tf in time_fields:
                    values[tf] = _parse_time_value(values[tf], mode or "iso", schema.time_format)
                out.append(convert(values))
            except (ValueError, IndexError, TypeError, OverflowError):
                bad += 1
        return out, bad, total
    finally:
        if isinstance(source, (str, os.PathLike)):
            fh.close()


def _check_bad(bad: int, total: int, schema: TableSchema, what: str) -> None:
    if bad:
        log.warning("skipped %d malformed %s row(s) of %d", bad, what, total)
    if total and bad > schema.max_bad_fraction * total:
        raise IngestError(
            f"{bad} of {total} {what} rows are malformed, above the tolerated fraction {schema.max_bad_fraction}"
        )


def _nonempty(*ids: str) -> None:
    for x in ids:
        if not x:
            raise ValueError("empty id")


def parse_checkins(source: Source, schema: TableSchema | None = None) -> EventStream:
    """Read a check-in table into a sorted :class:`EventStream`.

    ``stream.meta`` records the number of rows read and rows skipped.
    """
    schema = schema or TableSchema()

    def convert(v):
        agent, venue = v["agent_id"].strip(), v["venue_id"].strip()
        _nonempty(agent, venue)
        if not math.isfinite(v["timestamp"]):
            raise ValueError("non-finite time")
        return CheckinEvent(v["timestamp"], agent, venue)

    rows, bad, total = _read_rows(source, schema, CHECKIN_COLUMNS, ("timestamp",), convert)
    _check_bad(bad, total, schema, "check-in")
    return EventStream.build(checkins=rows, meta={"rows": total, "malformed": bad})


def parse_stays(source: Source, schema: TableSchema | None = None) -> list[StayInterval]:
    schema = schema or TableSchema()

    def convert(v):
        agent, loc = v["agent_id"].strip(), v["location_id"].strip()
        _nonempty(agent, loc)
        if not v["t_start"] < v["t_end"]:
            raise ValueError("stay must have t_start < t_end")
        return StayInterval(agent, loc, v["t_start"], v["t_end"])

    rows, bad, total = _read_rows(source, schema, STAY_COLUMNS, ("t_start", "t_end"), convert)
    _check_bad(bad, total, schema, "stay")
    return rows


def project_equirectangular(lat, lon, origin: tuple[float, float]):
    """Local projection of degrees to metres around ``origin = (lat0, lon0)``."""
    r = 6371008.8
    lat0, lon0 = origin
    lat = np.asarray(lat, dtype=float)
    lon = np.asarray(lon, dtype=float)
    x = np.radians(lon - lon0) * r * math.cos(math.radians(lat0))
    y = np.radians(lat - lat0) * r
    return x, y


def parse_gps(
    source: Source, schema: TableSchema | None = None, projection_origin: tuple[float, float] | None = None
) -> list[GpsPoint]:
    """Read GPS fixes in projected metres, or lat/lon when an origin is given."""
    schema = schema or TableSchema()
    latlon = projection_origin is not None

    def convert(v):
        agent = v["agent_id"].strip()
        _nonempty(agent)
        if latlon:
            x, y = project_equirectangular(float(v["lat"]), float(v["lon"]), projection_origin)
            x, y = float(x), float(y)
        else:
            x, y = float(v["x"]), float(v["y"])
        if not (math.isfinite(x) and math.isfinite(y) and math.isfinite(v["t"])):
            raise ValueError("non-finite coordinate")
        return GpsPoint(agent, x, y, v["t"])

    defaults = LATLON_COLUMNS if latlon else GPS_COLUMNS
    rows, bad, total = _read_rows(source, schema, defaults, ("t",), convert)
    _check_bad(bad, total, schema, "GPS")
    rows.sort(key=lambda p: (p.agent_id, p.t))
    return rows


def parse_meetings(source: Source, schema: TableSchema | None = None, agents: Iterable[str] = ()) -> EventStream:
    schema = schema or TableSchema()

    def convert(v):
        a, b = v["a"].strip(), v["b"].strip()
        _nonempty(a, b)
        loc = (v.get("location_id") or "").strip() or None
        return Meeting(v["t_start"], v["t_end"], a, b, loc)

    rows, bad, total = _read_rows(source, schema, MEETING_COLUMNS, ("t_start", "t_end"), convert)
    _check_bad(bad, total, schema, "meeting")
    return EventStream.build(meetings=rows, agents=agents, meta={"rows": total, "malformed": bad})


def _fmt_time(t: float) -> str:
    return repr(float(t))


def _write(path, header, rows, delimiter="\t") -> None:
    with open(path, "w", encoding="utf-8", newline="") as fh:
        w = csv.writer(fh, delimiter=delimiter, lineterminator="\n")
        w.writerow(header)
        w.writerows(rows)


def write_checkins(stream: EventStream, path, delimiter: str = "\t") -> None:
    cs = stream.checkins()
    rows = (
        (stream.agents[a], stream.venues[p], _fmt_time(t))
        for a, p, t in zip(cs.a.tolist(), cs.place.tolist(), cs.t.tolist())
    )
    _write(path, ["agent_id", "venue_id", "timestamp"], rows, delimiter)


def write_meetings(stream: EventStream, path, delimiter: str = "\t") -> None:
    ms = stream.meetings()
    rows = (
        (stream.agents[a], stream.agents[b], _fmt_time(t), _fmt_time(te), "" if p < 0 else stream.venues[p])
        for a, b, t, te, p in zip(ms.a.tolist(), ms.b.tolist(), ms.t.tolist(), ms.t_end.tolist(), ms.place.tolist())
    )
    _write(path, ["a", "b", "t_start", "t_end", "location_id"], rows, delimiter)


def write_stays(stays: Iterable[StayInterval], path, delimiter: str = "\t") -> None:
    rows = ((s.agent_id, s.location_id, _fmt_time(s.t_start), _fmt_time(s.t_end)) for s in stays)
    _write(path, ["agent_id", "location_id", "t_start", "t_end"], rows, delimiter)


def write_gps(points: Iterable[GpsPoint], path, delimiter: str = "\t") -> None:
    rows = ((p.agent_id, repr(p.x), repr(p.y), _fmt_time(p.t)) for p in points)
    _write(path, ["agent_id", "x", "y", "t"], rows, delimiter)


def filter_bbox(points: Iterable[GpsPoint], xmin: float, ymin: float, xmax: float, ymax: float) -> list[GpsPoint]:
    return [p for p in points if xmin <= p.x <= xmax and ymin <= p.y <= ymax]


# ---------------------------------------------------------------------------
# stay points and meetings


def _by_agent(points: Iterable[GpsPoint]) -> dict[str, list[GpsPoint]]:
    groups: dict[str, list[GpsPoint]] = defaultdict(list)
    for p in points:
        groups[p.agent_id].append(p)
    for pts in groups.values():
        pts.sort(key=lambda p: p.t)
    return groups


def grid_cell(x: float, y: float, cell: float = 5.0) -> str:
    return f"{math.floor(x / cell)}:{math.floor(y / cell)}"


def detect_stay_points(
    trace: Iterable[GpsPoint], radius: float = 5.0, min_duration: float = 300.0, cell: float = 5.0
) -> list[StayInterval]:
    """Stay intervals of each agent in ``trace``.

    A stay starts at an anchor point and extends while following points stay
    within ``radius`` of the anchor; it is kept when it lasts at least
    ``min_duration`` seconds, and the search resumes after it. Otherwise the
    anchor moves one point forward.
    """
    out: list[StayInterval] = []
    for agent, pts in sorted(_by_agent(trace).items()):
        xs = np.array([p.x for p in pts])
        ys = np.array([p.y for p in pts])
        ts = np.array([p.t for p in pts])
        n = len(pts)
        i = 0
        while i < n:
            d = np.hypot(xs[i:] - xs[i], ys[i:] - ys[i])
            outside = np.nonzero(d > radius)[0]
            j = i + (int(outside[0]) if len(outside) else n - i)
            # points i .. j-1 lie within radius of the anchor
            if ts[j - 1] - ts[i] >= min_duration:
                out.append(StayInterval(agent, grid_cell(xs[i], ys[i], cell), float(ts[i]), float(ts[j - 1])))
                i = j
            else:
                i += 1
    return out


def extract_meetings_colocation(stays: Iterable[StayInterval]) -> list[Meeting]:
    """Pairwise overlaps of stay intervals sharing a location."""
    by_loc: dict[str, list[StayInterval]] = defaultdict(list)
    for s in stays:
        by_loc[s.location_id].append(s)
    out: list[Meeting] = []
    for loc, items in by_loc.items():
        items.sort(key=lambda s: (s.t_start, s.t_end, s.agent_id))
        active: list[StayInterval] = []
        for s in items:
            active = [x for x in active if x.t_end > s.t_start]
            for x in active:
                if x.agent_id != s.agent_id:
                    lo, hi = max(x.t_start, s.t_start), min(x.t_end, s.t_end)
                    if lo < hi:
                        out.append(Meeting(lo, hi, x.agent_id, s.agent_id, loc))
            active.append(s)
    out.sort()
    return out


def resample_to_grid(points: Iterable[GpsPoint], step: float = 10.0):
    """Nearest-sample assignment of each agent's fixes to slots ``k * step``.

    Returns ``(agents, agent_code, slot, x, y)`` arrays with one row per
    occupied (agent, slot); a slot takes the fix closest to its time, ties
    going to the earlier fix.
    """
    pts = list(points)
    if not pts:
        e = np.empty(0)
        return (), np.empty(0, dtype=np.int64), np.empty(0, dtype=np.int64), e, e
    agents = tuple(sorted({p.agent_id for p in pts}))
    code = {a: i for i, a in enumerate(agents)}
    ac = np.array([code[p.agent_id] for p in pts], dtype=np.int64)
    t = np.array([p.t for p in pts])
    x = np.array([p.x for p in pts])
    y = np.array([p.y for p in pts])
    slot = np.floor(t / step + 0.5).astype(np.int64)
    err = np.abs(t - slot * step)
    order = np.lexsort((t, err, slot, ac))
    ac, slot, x, y = ac[order], slot[order], x[order], y[order]
    first = np.ones(len(ac), dtype=bool)
    first[1:] = (ac[1:] != ac[:-1]) | (slot[1:] != slot[:-1])
    return agents, ac[first], slot[first], x[first], y[first]


def _episodes(pair_slots: dict, agents, step: float, min_duration: float) -> list[Meeting]:
    out = []
    for (i, j), slots in pair_slots.items():
        slots = np.sort(np.asarray(slots))
        breaks = np.nonzero(np.diff(slots) > 1)[0]
        starts = np.concatenate([[0], breaks + 1])
        ends = np.concatenate([breaks, [len(slots) - 1]])
        for s, e in zip(starts, ends):
            t0, t1 = slots[s] * step, slots[e] * step
            if t1 - t0 >= min_duration:
                out.append(Meeting(float(t0), float(t1), agents[i], agents[j]))
    out.sort()
    return out


def extract_meetings_proximity(
    points: Iterable[GpsPoint], radius: float = 5.0, min_duration: float = 300.0, step: float = 10.0
) -> list[Meeting]:
    """Meetings of agents staying within ``radius`` metres for ``min_duration``.

    Traces are resampled to a ``step``-second grid; each slot's positions go
    into a kd-tree and close pairs are chained into episodes over consecutive
    slots. A missing or distant slot ends an episode.
    """
    agents, ac, slot, x, y = resample_to_grid(points, step)
    if len(ac) == 0:
        return []
    order = np.argsort(slot, kind="stable")
    ac, slot, x, y = ac[order], slot[order], x[order], y[order]
    bounds = np.nonzero(np.diff(slot))[0] + 1
    starts = np.concatenate([[0], bounds])
    stops = np.concatenate([bounds, [len(slot)]])
    pair_slots: dict[tuple[int, int], list[int]] = defaultdict(list)
    xy = np.column_stack([x, y])
    for s, e in zip(starts.tolist(), stops.tolist()):
        if e - s < 2:
            continue
        tree = cKDTree(xy[s:e])
        pairs = tree.query_pairs(radius, output_type="ndarray")
        if len(pairs) == 0:
            continue
        k = int(slot[s])
        codes = ac[s:e]
        for p, q in pairs.tolist():
            i, j = int(codes[p]), int(codes[q])
            pair_slots[(i, j) if i < j else (j, i)].append(k)
    return _episodes(pair_slots, agents, step, min_duration)


# ---------------------------------------------------------------------------
# stream transforms and rankings


def repeat_stream(stream: EventStream, target_days: int) -> EventStream:
    """Tile the stream cyclically until it covers ``target_days`` days."""
    h = stream.horizon_days
    if h < 1:
        raise IngestError("cannot repeat a stream shorter than one day")
    reps = max(1, math.ceil(target_days / h))
    shift = np.repeat(np.arange(reps) * h * DAY, len(stream))
    tiled = [np.tile(col, reps) for col in (stream.kind, stream.t, stream.t_end, stream.a, stream.b, stream.place)]
    kind, t, t_end, a, b, place = tiled
    t = t + shift
    t_end = t_end + shift
    keep = t - stream.t0 < target_days * DAY
    out = EventStream.from_arrays(
        kind[keep], t[keep], t_end[keep], a[keep], b[keep], place[keep], stream.agents, stream.venues,
        t0=stream.t0, horizon_days=target_days, cohort=stream.cohort, meta=stream.meta,
    )
    return out


def subsample_agents(stream: EventStream, fraction: float, rng: RngHandle) -> EventStream:
    """Keep a uniform ``ceil(fraction * N)`` subset of the agents.

    Meetings survive only when both endpoints are kept; the agent roster is
    reduced to the sample.
    """
    if not 0.0 < fraction <= 1.0:
        raise ValueError(f"fraction must lie in (0, 1], got {fraction}")
    n = len(stream.agents)
    k = math.ceil(fraction * n)
    chosen = np.sort(rng.generator.choice(n, size=k, replace=False))
    keep_agent = np.zeros(n, dtype=bool)
    keep_agent[chosen] = True
    mask = keep_agent[stream.a] & ((stream.b < 0) | keep_agent[np.maximum(stream.b, 0)])
    new_code = np.full(n, -1, dtype=np.int64)
    new_code[chosen] = np.arange(k)
    sub = stream.select(mask)
    b = np.where(sub.b >= 0, new_code[np.maximum(sub.b, 0)], -1)
    cohort = None if stream.cohort is None else stream.cohort[chosen]
    return replace(
        sub, a=new_code[sub.a], b=b, agents=tuple(stream.agents[i] for i in chosen), cohort=cohort
    )


def agent_activity(stream: EventStream) -> np.ndarray:
    """Events per agent code: check-ins plus meeting participations."""
    n = len(stream.agents)
    counts = np.bincount(stream.a, minlength=n)
    counts += np.bincount(stream.b[stream.b >= 0], minlength=n)
    return counts


def venue_popularity(stream: EventStream) -> np.ndarray:
    """Check-ins per venue code."""
    mask = stream.kind == CHECKIN
    return np.bincount(stream.place[mask], minlength=len(stream.venues))


def _rank(counts: np.ndarray) -> np.ndarray:
    # codes are in id order, so a stable sort on -count breaks ties by id
    return np.argsort(-counts, kind="stable")


def activity_ranking(stream: EventStream) -> list[tuple[str, int]]:
    counts = agent_activity(stream)
    return [(stream.agents[i], int(counts[i])) for i in _rank(counts) if counts[i] > 0]


def popularity_ranking(stream: EventStream) -> list[tuple[str, int]]:
    counts = venue_popularity(stream)
    return [(stream.venues[i], int(counts[i])) for i in _rank(counts) if counts[i] > 0]


def meetings_stream(meetings: Iterable[Meeting], agents: Iterable[str] = (), **kwargs) -> EventStream:
    return EventStream.build(meetings=meetings, agents=agents, **kwargs)


def stays_to_stream(stays: Sequence[StayInterval]) -> EventStream:
    agents = {s.agent_id for s in stays}
    return meetings_stream(extract_meetings_colocation(stays), agents=agents)


def gps_to_stream(points: Sequence[GpsPoint], radius: float = 5.0, min_duration: float = 300.0) -> EventStream:
    agents = {p.agent_id for p in points}
    return meetings_stream(extract_meetings_proximity(points, radius, min_duration), agents=agents)
