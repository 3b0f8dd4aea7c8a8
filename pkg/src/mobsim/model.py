"""Disease parameterization, per-agent state machine and stochastic primitives.

All simulation backends (event replay, contact graph, homogeneous mixing)
share these definitions so that their outputs are directly comparable.
"""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field, fields, replace
from typing import Any

import numpy as np

DAY = 86400.0
MIN_STAGE_DAYS = 0.5
# Average infectious period implied by the default stage means:
# 0.65 * 5 days (pre-symptomatic) + 0.35 * 18 days (asymptomatic).
INFECTIOUS_PERIOD_DAYS = 9.55


class ParameterError(ValueError):
    pass


@dataclass(frozen=True)
class DiseaseParams:
    """COVID-19 parameters of the extended SEIR model.

    Stage durations are normal samples in days, given as (mean, std) pairs.
    """

    beta: float = 0.75
    incubation: tuple[float, float] = (6.0, 1.0)
    presymptomatic_infectious: tuple[float, float] = (5.0, 1.0)
    in_care: tuple[float, float] = (13.0, 1.0)
    asymptomatic_infectious: tuple[float, float] = (18.0, 1.0)
    asymptomatic_fraction: float = 0.35
    venue_window_hours: float = 48.0

    def __post_init__(self):
        for name in ("beta", "asymptomatic_fraction"):
            value = getattr(self, name)
            if not 0.0 <= value <= 1.0:
                raise ParameterError(f"{name} must lie in [0, 1], got {value}")
        for name in ("incubation", "presymptomatic_infectious", "in_care", "asymptomatic_infectious"):
            mean, std = getattr(self, name)
            if not mean > 0:
                raise ParameterError(f"{name} mean must be > 0, got {mean}")
            if not std >= 0:
                raise ParameterError(f"{name} std must be >= 0, got {std}")
            object.__setattr__(self, name, (float(mean), float(std)))
        if not self.venue_window_hours > 0:
            raise ParameterError(f"venue_window_hours must be > 0, got {self.venue_window_hours}")

    @property
    def venue_window(self) -> float:
        """Venue infection window in seconds."""
        return self.venue_window_hours * 3600.0

    @property
    def mean_infectious_days(self) -> float:
        a = self.asymptomatic_fraction
        return (1 - a) * self.presymptomatic_infectious[0] + a * self.asymptomatic_infectious[0]

    def with_beta(self, beta: float) -> "DiseaseParams":
        return replace(self, beta=beta)

    def degenerate(self) -> "DiseaseParams":
        """Copy with every standard deviation set to zero."""
        return replace(
            self,
            incubation=(self.incubation[0], 0.0),
            presymptomatic_infectious=(self.presymptomatic_infectious[0], 0.0),
            in_care=(self.in_care[0], 0.0),
            asymptomatic_infectious=(self.asymptomatic_infectious[0], 0.0),
        )

    # flat key-value form used by experiment configs
    def to_dict(self) -> dict[str, float]:
        out: dict[str, float] = {}
        for f in fields(self):
            value = getattr(self, f.name)
            if isinstance(value, tuple):
                out[f"{f.name}_mean"], out[f"{f.name}_std"] = value
            else:
                out[f.name] = value
        return out

    @classmethod
    def from_dict(cls, data: dict[str, Any]) -> "DiseaseParams":
        data = dict(data)
        kwargs: dict[str, Any] = {}
        defaults = cls()
        for f in fields(cls):
            default = getattr(defaults, f.name)
            if isinstance(default, tuple):
                mean = data.pop(f"{f.name}_mean", default[0])
                std = data.pop(f"{f.name}_std", default[1])
                kwargs[f.name] = (float(mean), float(std))
            elif f.name in data:
                kwargs[f.name] = float(data.pop(f.name))
        if data:
            raise ParameterError(f"unknown disease parameter(s): {', '.join(sorted(data))}")
        return cls(**kwargs)


class Stage(enum.IntEnum):
    SUSCEPTIBLE = 0
    EXPOSED = 1
    INFECTIOUS = 2
    IN_CARE = 3
    RECOVERED = 4


@dataclass(frozen=True)
class StageDurations:
    incubation_days: float
    infectious_days: float
    in_care_days: float | None = None

    @property
    def symptomatic(self) -> bool:
        return self.in_care_days is not None


@dataclass(frozen=True)
class AgentState:
    """State of one agent plus the pre-sampled times of its future transitions.

    Times are absolute seconds. ``ends_at`` is the end of the infectious
    stage; ``recovers_at`` equals ``ends_at`` for asymptomatic agents.
    """

    stage: Stage = Stage.SUSCEPTIBLE
    infectious_at: float = math.inf
    ends_at: float = math.inf
    recovers_at: float = math.inf
    symptomatic: bool = True

    @classmethod
    def exposed(cls, now: float, durations: StageDurations) -> "AgentState":
        infectious_at = now + durations.incubation_days * DAY
        return cls._from_onset(Stage.EXPOSED, infectious_at, durations)

    @classmethod
    def infectious(cls, now: float, durations: StageDurations) -> "AgentState":
        return cls._from_onset(Stage.INFECTIOUS, now, durations)

    @classmethod
    def _from_onset(cls, stage: Stage, onset: float, durations: StageDurations) -> "AgentState":
        ends_at = onset + durations.infectious_days * DAY
        if durations.symptomatic:
            recovers_at = ends_at + durations.in_care_days * DAY
        else:
            recovers_at = ends_at
        return cls(stage, onset, ends_at, recovers_at, durations.symptomatic)


def stage_at(infectious_at: float, ends_at: float, recovers_at: float, now: float) -> Stage:
    """Stage of an infected agent at ``now`` from its transition times."""
    if now < infectious_at:
        return Stage.EXPOSED
    if now < ends_at:
        return Stage.INFECTIOUS
    if now < recovers_at:
        return Stage.IN_CARE
    return Stage.RECOVERED


def advance_agent(state: AgentState, now: float) -> AgentState:
    """Apply every transition that is due at ``now``."""
    if state.stage in (Stage.SUSCEPTIBLE, Stage.RECOVERED):
        return state
    stage = stage_at(state.infectious_at, state.ends_at, state.recovers_at, now)
    if stage < state.stage:
        # never move backwards, even if called with a stale clock
        return state
    return replace(state, stage=stage)


@dataclass
class RngHandle:
    """Reproducible random stream identified by ``(seed, stream)``.

    Child handles (``child``) give independent sub-streams, e.g. one for the
    epidemic and one for intervention sampling. Uniform draws are buffered,
    which keeps per-event Bernoulli trials cheap without changing results.
    """

    seed: int = 0
    stream: int = 0
    path: tuple[int, ...] = ()
    _gen: np.random.Generator = field(init=False, repr=False, compare=False)
    _buf: list = field(init=False, repr=False, compare=False, default_factory=list)
    _pos: int = field(init=False, repr=False, compare=False, default=0)

    _BLOCK = 1024

    def __post_init__(self):
        ss = np.random.SeedSequence(entropy=int(self.seed) & (2**64 - 1), spawn_key=(int(self.stream), *self.path))
        self._gen = np.random.Generator(np.random.PCG64(ss))

    def child(self, index: int) -> "RngHandle":
        return RngHandle(self.seed, self.stream, (*self.path, int(index)))

    @property
    def generator(self) -> np.random.Generator:
        return self._gen

    def uniform(self) -> float:
        if self._pos >= len(self._buf):
            self._buf = self._gen.random(self._BLOCK).tolist()
            self._pos = 0
        u = self._buf[self._pos]
        self._pos += 1
        return u

    def normal(self, mean: float, std: float) -> float:
        return float(self._gen.normal(mean, std))


def bernoulli(p: float, rng: RngHandle) -> bool:
    if not 0.0 <= p <= 1.0:
        raise ParameterError(f"probability must lie in [0, 1], got {p}")
    return rng.uniform() < p


def _truncated_normal(mean: float, std: float, rng: RngHandle) -> float:
    if std == 0.0:
        return max(mean, MIN_STAGE_DAYS)
    while True:
        x = rng.normal(mean, std)
        if x >= MIN_STAGE_DAYS:
            return x


def assign_symptomatic(params: DiseaseParams, rng: RngHandle) -> bool:
    """True for a symptomatic case; drawn once, at infection time."""
    return not (rng.uniform() < params.asymptomatic_fraction)


def sample_stage_durations(params: DiseaseParams, symptomatic: bool, rng: RngHandle) -> StageDurations:
    """Draw incubation, infectious and (for symptomatic cases) in-care days.

    Samples below half a day are redrawn.
    """
    incubation = _truncated_normal(*params.incubation, rng)
    if symptomatic:
        infectious = _truncated_normal(*params.presymptomatic_infectious, rng)
        in_care = _truncated_normal(*params.in_care, rng)
        return StageDurations(incubation, infectious, in_care)
    infectious = _truncated_normal(*params.asymptomatic_infectious, rng)
    return StageDurations(incubation, infectious, None)


def derive_beta(r0: float, avg_daily_contacts_c: float, infectious_days_T: float = INFECTIOUS_PERIOD_DAYS) -> float:
    """Transmission probability from ``R0 = c * beta * T``."""
    if avg_daily_contacts_c <= 0 or infectious_days_T <= 0:
        raise ParameterError("contact rate c and infectious period T must be positive")
    if r0 < 0:
        raise ParameterError(f"r0 must be non-negative, got {r0}")
    beta = r0 / (avg_daily_contacts_c * infectious_days_T)
    if beta > 1.0:
        raise ParameterError(
            f"R0={r0} with c={avg_daily_contacts_c} and T={infectious_days_T} needs beta={beta:.3f} > 1"
        )
    return beta


__all__ = [
    "DAY",
    "INFECTIOUS_PERIOD_DAYS",
    "MIN_STAGE_DAYS",
    "AgentState",
    "DiseaseParams",
    "ParameterError",
    "RngHandle",
    "Stage",
    "StageDurations",
    "advance_agent",
    "assign_symptomatic",
    "bernoulli",
    "derive_beta",
    "sample_stage_durations",
    "stage_at",
]
