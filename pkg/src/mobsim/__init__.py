"""Mobility-driven epidemic simulation and intervention analysis."""
from .engine import SimulationConfig, SimulationError, run_ensemble, run_meeting_simulation, run_venue_simulation, simulate
from .ingest import CheckinEvent, EventStream, GpsPoint, Meeting, StayInterval
from .model import DiseaseParams, RngHandle, Stage, derive_beta
from .transmission import CostReport, TransmissionLog

__version__ = "0.1.0"

__all__ = [
    "CheckinEvent",
    "CostReport",
    "DiseaseParams",
    "EventStream",
    "GpsPoint",
    "Meeting",
    "RngHandle",
    "SimulationConfig",
    "SimulationError",
    "Stage",
    "StayInterval",
    "TransmissionLog",
    "derive_beta",
    "run_ensemble",
    "run_meeting_simulation",
    "run_venue_simulation",
    "simulate",
]
