"""Time series, epidemiological rates and ensemble summaries from transmission logs."""
from __future__ import annotations

import csv
import math
import warnings
from dataclasses import dataclass
from pathlib import Path
from typing import Sequence

import numpy as np

from .model import DAY, INFECTIOUS_PERIOD_DAYS
from .transmission import VENUE, TransmissionLog


@dataclass(frozen=True)
class DailySeries:
    total_infected: np.ndarray
    active_infected: np.ndarray
    new_infected: np.ndarray

    @property
    def horizon(self) -> int:
        return len(self.total_infected)

    def scaled(self, factor: float) -> "DailySeries":
        return DailySeries(self.total_infected * factor, self.active_infected * factor, self.new_infected * factor)

    def peak(self) -> tuple[int, float]:
        """Day and height of the active-case peak (first day on ties)."""
        if not self.horizon:
            return 0, 0.0
        d = int(np.argmax(self.active_infected))
        return d, float(self.active_infected[d])


@dataclass(frozen=True)
class EnsembleSummary:
    median: np.ndarray
    p25: np.ndarray
    p75: np.ndarray


def _day_index(times: np.ndarray, t0: float) -> np.ndarray:
    return np.floor((times - t0) / DAY)


def _cumulative_by_day(days: np.ndarray, horizon: int) -> np.ndarray:
    days = days[~np.isnan(days)].astype(np.int64)
    days = days[days < horizon]
    counts = np.bincount(np.maximum(days, 0), minlength=horizon)[:horizon]
    return np.cumsum(counts)


def daily_series(log: TransmissionLog, horizon: int | None = None, agents: np.ndarray | None = None) -> DailySeries:
    """Total, active and new infections per day, day 0 starting at the log origin.

    A day's value is the state at the end of that day. ``agents`` restricts
    the counts to a subset of roster positions.
    """
    horizon = log.horizon_days if horizon is None else horizon
    infected = log.infected_at
    recovered = log.recovered_at
    if agents is not None:
        infected = infected[agents]
        recovered = recovered[agents]
    total = _cumulative_by_day(_day_index(infected, log.t0), horizon)
    rec = _cumulative_by_day(_day_index(recovered, log.t0), horizon)
    new = np.diff(total, prepend=0)
    return DailySeries(total.astype(float), (total - rec).astype(float), new.astype(float))


def growth_rate(series: DailySeries) -> np.ndarray:
    """new_t / new_(t-1); NaN where the previous day had no new infections."""
    new = np.asarray(series.new_infected, dtype=float)
    out = np.full(len(new), np.nan)
    if len(new) > 1:
        prev = new[:-1]
        with np.errstate(divide="ignore", invalid="ignore"):
            out[1:] = np.where(prev > 0, new[1:] / np.where(prev > 0, prev, 1), np.nan)
    return out


def reproduction_number(log: TransmissionLog, horizon: int | None = None) -> np.ndarray:
    """Mean number of infections credited to agents infected on each day.

    Days without new infections are NaN.
    """
    horizon = log.horizon_days if horizon is None else horizon
    infected = log.order
    days = _day_index(log.infected_at[infected], log.t0).astype(np.int64)
    secondary = log.secondary_counts()[infected]
    keep = (days >= 0) & (days < horizon)
    n = np.bincount(days[keep], minlength=horizon)[:horizon]
    s = np.bincount(days[keep], weights=secondary[keep], minlength=horizon)[:horizon]
    with np.errstate(divide="ignore", invalid="ignore"):
        return np.where(n > 0, s / np.where(n > 0, n, 1), np.nan)


def censored_days(horizon: int, infectious_days: float = INFECTIOUS_PERIOD_DAYS) -> np.ndarray:
    """Mask of days whose rates still depend on infections after the horizon."""
    days = np.arange(horizon)
    return days >= horizon - infectious_days


def rolling_average(series, window: int = 7) -> np.ndarray:
    """Centered moving average; windows shrink at the ends."""
    if window < 1:
        raise ValueError("window must be >= 1")
    x = np.asarray(series, dtype=float)
    n = len(x)
    left = (window - 1) // 2
    right = window // 2
    if n == 0:
        return x.copy()
    # full[k] sums x[k - window + 1 .. k], i.e. the window ending right of day k - right
    sums = np.convolve(x, np.ones(window))[right:right + n]
    idx = np.arange(n)
    lo = np.maximum(idx - left, 0)
    hi = np.minimum(idx + right + 1, n)
    return sums / (hi - lo)


def gaussian_smooth(series, sigma_days: float = 2.0) -> np.ndarray:
    """Gaussian filter truncated at 4 sigma, renormalized over available points.

    NaN entries carry no weight; an output is NaN only when no point in its
    window is available.
    """
    if not sigma_days > 0:
        raise ValueError("sigma must be > 0")
    x = np.asarray(series, dtype=float)
    n = len(x)
    half = int(math.ceil(4 * sigma_days))
    offsets = np.arange(-half, half + 1)
    kernel = np.exp(-0.5 * (offsets / sigma_days) ** 2)
    valid = ~np.isnan(x)
    xv = np.where(valid, x, 0.0)
    num = np.zeros(n)
    den = np.zeros(n)
    for off, w in zip(offsets.tolist(), kernel.tolist()):
        if w == 0.0:
            continue
        # out[i] += w * x[i + off]
        lo, hi = max(0, -off), min(n, n - off)
        if lo >= hi:
            continue
        num[lo:hi] += w * xv[lo + off:hi + off]
        den[lo:hi] += w * valid[lo + off:hi + off]
    with np.errstate(invalid="ignore", divide="ignore"):
        return np.where(den > 0, num / np.where(den > 0, den, 1), np.nan)


def ensemble(runs: Sequence) -> EnsembleSummary:
    """Pointwise median and quartiles (linear interpolation) across runs.

    Accepts DailySeries (summarizing active cases) or plain arrays.
    """
    if not runs:
        raise ValueError("need at least one run")
    arrays = [r.active_infected if isinstance(r, DailySeries) else np.asarray(r, dtype=float) for r in runs]
    lengths = {len(a) for a in arrays}
    if len(lengths) != 1:
        raise ValueError(f"runs have different horizons: {sorted(lengths)}")
    m = np.vstack(arrays)
    if np.isnan(m).any():
        # days where every run is missing (e.g. undefined growth rate) stay NaN
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", RuntimeWarning)
            p25, med, p75 = np.nanpercentile(m, [25, 50, 75], axis=0)
    else:
        p25, med, p75 = np.percentile(m, [25, 50, 75], axis=0)
    return EnsembleSummary(med, p25, p75)


def ensemble_series(runs: Sequence[DailySeries]) -> dict[str, EnsembleSummary]:
    return {
        name: ensemble([getattr(r, name) for r in runs])
        for name in ("total_infected", "active_infected", "new_infected")
    }


def infections_per_venue(log: TransmissionLog) -> tuple[dict[str, int], list[tuple[int, str, int, float]]]:
    """Infections caused by each venue and the cumulative share by venue rank.

    Ranks start at 1; ties are broken by venue id.
    """
    mask = log.source_kind == VENUE
    src = log.source[mask]
    if len(src) == 0:
        return {}, []
    counts = np.bincount(src, minlength=len(log.venues))
    order = np.argsort(-counts, kind="stable")
    order = order[counts[order] > 0]
    total = counts.sum()
    cum = np.cumsum(counts[order]) / total
    by_venue = {log.venues[i]: int(counts[i]) for i in order}
    dist = [(r + 1, log.venues[i], int(counts[i]), float(c)) for r, (i, c) in enumerate(zip(order, cum))]
    return by_venue, dist


def top_venue_share(log: TransmissionLog, top_fraction: float, n_venues: int | None = None) -> float:
    """Share of venue-borne infections caused by the top ``ceil(fraction * V)`` venues."""
    _, dist = infections_per_venue(log)
    if not dist:
        return 0.0
    v = len(log.venues) if n_venues is None else n_venues
    k = max(1, math.ceil(top_fraction * v))
    return dist[min(k, len(dist)) - 1][3]


def cohort_tracking(log: TransmissionLog, ranking: Sequence, top_fraction: float,
                    horizon: int | None = None) -> DailySeries:
    """Series over the top ``ceil(fraction * N)`` ranked agents, as fractions of that cohort.

    ``ranking`` is a sequence of agent ids or ``(agent_id, count)`` pairs in
    rank order, as produced by :func:`mobsim.ingest.activity_ranking`;
    agents missing from it rank last in id order.
    """
    ids = [r[0] if isinstance(r, tuple) else r for r in ranking]
    seen = set(ids)
    ids += [a for a in log.agents if a not in seen]
    n = log.n_agents
    k = min(n, math.ceil(top_fraction * n - 1e-9))
    if k == 0:
        h = log.horizon_days if horizon is None else horizon
        z = np.zeros(h)
        return DailySeries(z, z, z)
    aidx = {a: i for i, a in enumerate(log.agents)}
    members = np.array([aidx[a] for a in ids[:k]], dtype=np.int64)
    return daily_series(log, horizon, agents=members).scaled(1.0 / k)


def secondary_distribution(log: TransmissionLog) -> np.ndarray:
    """Number of infected agents with 0, 1, 2, ... secondary infections."""
    counts = log.secondary_counts()[log.order]
    return np.bincount(counts) if len(counts) else np.zeros(1, dtype=np.int64)


# ---------------------------------------------------------------------------
# CSV export


def _fmt(x: float) -> str:
    return "" if isinstance(x, float) and math.isnan(x) else repr(float(x))


def write_series_csv(path, values, p25=None, p75=None, censored=None) -> None:
    """Columns (day, value[, p25, p75][, censored])."""
    header = ["day", "value"]
    if p25 is not None:
        header += ["p25", "p75"]
    if censored is not None:
        header += ["censored"]
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for d in range(len(values)):
            row = [d, _fmt(values[d])]
            if p25 is not None:
                row += [_fmt(p25[d]), _fmt(p75[d])]
            if censored is not None:
                row.append(int(bool(censored[d])))
            w.writerow(row)


def write_summary_csv(path, summary: EnsembleSummary, censored=None) -> None:
    write_series_csv(path, summary.median, summary.p25, summary.p75, censored)


def write_venue_distribution(path, dist) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["rank", "venue_id", "count", "cumulative_share"])
        for rank, venue, count, share in dist:
            w.writerow([rank, venue, count, repr(share)])


def read_series_csv(path) -> dict[str, np.ndarray]:
    with open(Path(path), newline="", encoding="utf-8") as fh:
        rows = list(csv.DictReader(fh))
    out = {}
    for key in rows[0].keys() if rows else []:
        out[key] = np.array([float(r[key]) if r[key] != "" else np.nan for r in rows])
    return out
