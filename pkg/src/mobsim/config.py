"""Experiment configuration: a YAML file validated against a fixed schema.

Unknown keys and invalid values are rejected before any work starts, with
the offending line number when it can be located.
"""
from __future__ import annotations

import copy
import hashlib
import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any

import yaml

from .interventions import InterventionSpec, spec_from_dict, spec_to_dict
from .model import DiseaseParams, ParameterError


class ConfigError(ValueError):
    def __init__(self, message: str, line: int | None = None, path: str | None = None):
        self.line = line
        self.path = path
        where = f"{path}:{line}: " if path and line else (f"line {line}: " if line else "")
        super().__init__(where + message)


_PARAM_KEYS = set(DiseaseParams().to_dict())

SCHEMA: dict[str, dict[str, Any]] = {
    "dataset": {
        "path": None,
        "format": "checkins",
        "delimiter": "\t",
        "header": True,
        "columns": None,
        "time_format": None,
        "max_bad_fraction": 0.001,
        "projection_origin": None,
        "repeat_to_days": None,
        "subsample_fraction": None,
        "radius": 5.0,
        "min_duration": 300.0,
    },
    "model": {
        "mode": "venue",
        "r0": None,
        "horizon_days": None,
        **DiseaseParams().to_dict(),
    },
    "seeds": {"n_seeds": 10, "rng_seed": 0, "n_runs": 10},
    "intervention": {"kind": "none"},
    "comparisons": {"contact_graph": False, "homogeneous": False},
    "outputs": {"directory": "out", "logs": False, "venue_distribution": False, "gnuplot": False},
}

INTERVENTION_KEYS = {
    "none": set(),
    "lockdown": {"drop_prob", "trigger_fraction", "duration_days"},
    "close_venues": {"selector", "fraction", "seed", "venue_ids"},
    "protect_agents": {"selector", "fraction", "seed"},
    "cohorts": {"k", "seed"},
}

FORMATS = ("checkins", "stays", "gps", "meetings")
MODES = ("venue", "meeting")


def _line_map(text: str) -> dict[tuple[str, ...], int]:
    """1-based line of every mapping key, by key path."""
    lines: dict[tuple[str, ...], int] = {}

    def walk(node, prefix):
        if isinstance(node, yaml.MappingNode):
            for k, v in node.value:
                path = (*prefix, str(k.value))
                lines[path] = k.start_mark.line + 1
                walk(v, path)

    try:
        root = yaml.compose(text, Loader=yaml.SafeLoader)
    except yaml.YAMLError:
        return lines
    walk(root, ())
    return lines


@dataclass
class ExperimentConfig:
    dataset: dict
    model: dict
    seeds: dict
    intervention: InterventionSpec
    comparisons: dict
    outputs: dict
    source: Path | None = None
    lines: dict = field(default_factory=dict, repr=False)

    @property
    def params_dict(self) -> dict:
        return {k: v for k, v in self.model.items() if k in _PARAM_KEYS}

    def disease_params(self, beta: float | None = None) -> DiseaseParams:
        d = self.params_dict
        if beta is not None:
            d["beta"] = beta
        return DiseaseParams.from_dict(d)

    @property
    def base_dir(self) -> Path:
        return self.source.parent if self.source else Path.cwd()

    def dataset_path(self) -> Path:
        p = Path(self.dataset["path"])
        return p if p.is_absolute() else self.base_dir / p

    def to_dict(self) -> dict:
        return {
            "dataset": self.dataset,
            "model": self.model,
            "seeds": self.seeds,
            "intervention": spec_to_dict(self.intervention),
            "comparisons": self.comparisons,
            "outputs": self.outputs,
        }

    def hash(self) -> str:
        blob = json.dumps(self.to_dict(), sort_keys=True, default=str).encode()
        return hashlib.sha256(blob).hexdigest()[:16]

    def with_override(self, dotted: str, value) -> "ExperimentConfig":
        data = copy.deepcopy(self.to_dict())
        section, key = dotted.split(".", 1)
        data[section][key] = value
        if dotted == "model.beta":
            data["model"]["r0"] = None
        return from_dict(data, source=self.source)


def from_dict(data: Any, source: Path | None = None, lines: dict | None = None) -> ExperimentConfig:
    lines = lines or {}
    where = str(source) if source else None

    def fail(msg, *path):
        line = None
        for k in range(len(path), 0, -1):
            line = lines.get(tuple(path[:k]))
            if line:
                break
        raise ConfigError(msg, line, where)

    if not isinstance(data, dict):
        raise ConfigError("config must be a mapping of sections", 1, where)
    for section in data:
        if section not in SCHEMA:
            fail(f"unknown section {section!r}", section)
    sections = {}
    for section, defaults in SCHEMA.items():
        given = data.get(section) or {}
        if not isinstance(given, dict):
            fail(f"section {section!r} must be a mapping", section)
        if section == "intervention":
            sections[section] = dict(given)
            continue
        for key in given:
            if key not in defaults:
                fail(f"unknown key {section}.{key}", section, key)
        sections[section] = {**defaults, **given}

    ds = sections["dataset"]
    if not ds["path"]:
        fail("dataset.path is required", "dataset")
    if ds["format"] not in FORMATS:
        fail(f"dataset.format must be one of {FORMATS}", "dataset", "format")
    for key in ("subsample_fraction",):
        v = ds[key]
        if v is not None and not (isinstance(v, (int, float)) and 0 < v <= 1):
            fail(f"dataset.{key} must lie in (0, 1]", "dataset", key)
    if ds["repeat_to_days"] is not None and not (isinstance(ds["repeat_to_days"], int) and ds["repeat_to_days"] >= 1):
        fail("dataset.repeat_to_days must be a positive integer", "dataset", "repeat_to_days")
    if ds["columns"] is not None and not isinstance(ds["columns"], dict):
        fail("dataset.columns must be a mapping", "dataset", "columns")
    if ds["projection_origin"] is not None and len(ds["projection_origin"]) != 2:
        fail("dataset.projection_origin must be [lat, lon]", "dataset", "projection_origin")

    model = sections["model"]
    if model["mode"] not in MODES:
        fail(f"model.mode must be one of {MODES}", "model", "mode")
    if model["r0"] is not None and model["mode"] != "meeting":
        fail("model.r0 only applies to person-to-person (meeting) mode", "model", "r0")
    if model["horizon_days"] is not None and not (isinstance(model["horizon_days"], int) and model["horizon_days"] > 0):
        fail("model.horizon_days must be a positive integer", "model", "horizon_days")
    try:
        DiseaseParams.from_dict({k: v for k, v in model.items() if k in _PARAM_KEYS})
    except (ParameterError, TypeError, ValueError) as exc:
        given = data.get("model") or {}
        bad = [k for k in given if k in _PARAM_KEYS and str(exc).startswith(k.removesuffix("_mean").removesuffix("_std"))]
        fail(f"invalid disease parameters: {exc}", "model", *bad[:1])

    seeds = sections["seeds"]
    for key, lo in (("n_seeds", 0), ("n_runs", 1), ("rng_seed", 0)):
        v = seeds[key]
        if not isinstance(v, int) or isinstance(v, bool) or v < lo:
            fail(f"seeds.{key} must be an integer >= {lo}", "seeds", key)

    iv = sections["intervention"]
    kind = iv.get("kind", "none")
    if kind not in INTERVENTION_KEYS:
        fail(f"unknown intervention kind {kind!r}", "intervention", "kind")
    for key in iv:
        if key != "kind" and key not in INTERVENTION_KEYS[kind]:
            fail(f"unknown key intervention.{key} for kind {kind!r}", "intervention", key)
    try:
        spec = spec_from_dict(iv)
    except (TypeError, ValueError) as exc:
        fail(f"invalid intervention: {exc}", "intervention")

    comp = sections["comparisons"]
    if comp["homogeneous"] and model["mode"] != "meeting":
        fail("the homogeneous baseline needs meeting mode", "comparisons", "homogeneous")

    return ExperimentConfig(
        dataset=ds, model=model, seeds=seeds, intervention=spec, comparisons=comp,
        outputs=sections["outputs"], source=source, lines=lines,
    )


def load_config(path) -> ExperimentConfig:
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise ConfigError(f"cannot read config: {exc}") from None
    try:
        data = yaml.safe_load(text)
    except yaml.YAMLError as exc:
        mark = getattr(exc, "problem_mark", None)
        raise ConfigError(f"YAML syntax error: {getattr(exc, 'problem', exc)}",
                          mark.line + 1 if mark else None, str(path)) from None
    return from_dict(data, source=path.resolve(), lines=_line_map(text))
