"""Config-driven experiments: ensembles, parameter sweeps and model comparisons."""
from __future__ import annotations

import csv
import json
import logging
import os
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Sequence

import numpy as np

from . import metrics
from .config import ConfigError, ExperimentConfig
from .engine import SimulationConfig, simulate
from .graph import build_bipartite_graph, build_person_graph, compare_with_mobility, run_graph_simulation
from .homogeneous import HomogeneousConfig, estimate_c, run_homogeneous
from .ingest import (
    IngestError,
    TableSchema,
    detect_stay_points,
    extract_meetings_colocation,
    extract_meetings_proximity,
    meetings_stream,
    parse_checkins,
    parse_gps,
    parse_meetings,
    parse_stays,
    repeat_stream,
    subsample_agents,
    write_checkins,
    write_meetings,
    write_stays,
)
from .interventions import NoIntervention, health_value
from .model import RngHandle, derive_beta
from .transmission import TransmissionLog, write_log

log = logging.getLogger(__name__)

SWEEP_PARAMETERS = {
    "beta": "model.beta",
    "n_seeds": "seeds.n_seeds",
    "asymptomatic_fraction": "model.asymptomatic_fraction",
    "fraction": "intervention.fraction",
    "k": "intervention.k",
    "subsample_fraction": "dataset.subsample_fraction",
    "trigger_fraction": "intervention.trigger_fraction",
    "duration_days": "intervention.duration_days",
    "drop_prob": "intervention.drop_prob",
}

RUN_FILES = ("total.csv", "active.csv", "new.csv", "growth_rate.csv", "reproduction_number.csv", "summary.json")


@dataclass
class RunSummary:
    config_hash: str
    mode: str
    beta: float
    n_agents: int
    n_runs: int
    rng_seed: int
    final_total_median: float
    final_total_p25: float
    final_total_p75: float
    final_fraction: float
    peak_active: float
    peak_day: int
    social_value: float
    health_value: float | None = None
    cost: dict = field(default_factory=dict)
    wall_clock_seconds: float = field(default=0.0, compare=False)

    def to_json(self) -> dict:
        d = asdict(self)
        # wall-clock time varies between identical runs; keep files reproducible
        d.pop("wall_clock_seconds")
        return d


# ---------------------------------------------------------------------------
# data loading


def _schema(cfg: ExperimentConfig) -> TableSchema:
    ds = cfg.dataset
    return TableSchema(
        columns=dict(ds["columns"] or {}),
        delimiter=ds["delimiter"],
        header=bool(ds["header"]),
        time_format=ds["time_format"],
        max_bad_fraction=float(ds["max_bad_fraction"]),
    )


def load_dataset(cfg: ExperimentConfig):
    """Read the configured dataset; returns ``(stream, stays_or_None)``."""
    ds = cfg.dataset
    path = cfg.dataset_path()
    schema = _schema(cfg)
    stays = None
    try:
        fmt = ds["format"]
        if fmt == "checkins":
            stream = parse_checkins(path, schema)
        elif fmt == "meetings":
            stream = parse_meetings(path, schema)
        elif fmt == "stays":
            stays = parse_stays(path, schema)
            stream = meetings_stream(extract_meetings_colocation(stays), agents={s.agent_id for s in stays})
        else:
            origin = tuple(ds["projection_origin"]) if ds["projection_origin"] else None
            points = parse_gps(path, schema, origin)
            stays = detect_stay_points(points, ds["radius"], ds["min_duration"])
            meetings = extract_meetings_proximity(points, ds["radius"], ds["min_duration"])
            stream = meetings_stream(meetings, agents={p.agent_id for p in points})
    except OSError as exc:
        raise IngestError(f"cannot read dataset {path}: {exc}") from None
    if ds["repeat_to_days"]:
        stream = repeat_stream(stream, ds["repeat_to_days"])
    if ds["subsample_fraction"] and ds["subsample_fraction"] < 1:
        stream = subsample_agents(stream, ds["subsample_fraction"], RngHandle(cfg.seeds["rng_seed"], 0, (5,)))
    return stream, stays


def resolve_beta(cfg: ExperimentConfig, stream) -> float:
    if cfg.model["r0"] is None:
        return float(cfg.model["beta"])
    days = stream.horizon_days
    if days <= 0:
        raise IngestError("dataset is empty; cannot estimate contacts for r0")
    c = estimate_c(stream, stream.n_agents, days)
    try:
        return derive_beta(float(cfg.model["r0"]), c)
    except ValueError as exc:
        raise ConfigError(str(exc), cfg.lines.get(("model", "r0"))) from None


# ---------------------------------------------------------------------------
# ensemble execution

_WORKER_STREAM = None


def _init_worker(stream):
    global _WORKER_STREAM
    _WORKER_STREAM = stream


def _run_one(sim_cfg: SimulationConfig) -> TransmissionLog:
    return simulate(_WORKER_STREAM, sim_cfg)


def run_configs(stream, configs: Sequence[SimulationConfig], workers: int = 1) -> list[TransmissionLog]:
    if workers <= 1 or len(configs) <= 1:
        return [simulate(stream, c) for c in configs]
    with ProcessPoolExecutor(max_workers=workers, initializer=_init_worker, initargs=(stream,)) as ex:
        return list(ex.map(_run_one, configs))


def default_workers() -> int:
    return int(os.environ.get("MOBSIM_WORKERS", "1"))


def sim_configs(cfg: ExperimentConfig, beta: float, intervention=None) -> list[SimulationConfig]:
    params = cfg.disease_params(beta)
    seed = cfg.seeds["rng_seed"]
    return [
        SimulationConfig(
            params=params,
            n_seeds=cfg.seeds["n_seeds"],
            horizon_days=cfg.model["horizon_days"],
            mode=cfg.model["mode"],
            intervention=cfg.intervention if intervention is None else intervention,
            rng=RngHandle(seed, r),
        )
        for r in range(cfg.seeds["n_runs"])
    ]


def _rate_summary(per_run: list[np.ndarray]) -> metrics.EnsembleSummary:
    ens = metrics.ensemble(per_run)
    smooth = lambda x: metrics.gaussian_smooth(metrics.rolling_average(x, 7), 2.0)  # noqa: E731
    return metrics.EnsembleSummary(smooth(ens.median), smooth(ens.p25), smooth(ens.p75))


def summarize(cfg: ExperimentConfig, logs: list[TransmissionLog], beta: float,
              baseline: list[TransmissionLog] | None = None) -> tuple[RunSummary, dict]:
    horizon = logs[0].horizon_days
    series = [metrics.daily_series(lg, horizon) for lg in logs]
    ens = metrics.ensemble_series(series)
    finals = np.array([lg.n_infected for lg in logs], dtype=float)
    peak_day = int(np.argmax(ens["active_infected"].median)) if horizon else 0
    peak = float(ens["active_infected"].median[peak_day]) if horizon else 0.0
    costs = [lg.cost for lg in logs]
    social = float(np.median([c.social_value for c in costs]))
    hv = None
    if baseline is not None:
        hv = float(np.median([health_value(b, lg) for b, lg in zip(baseline, logs)]))
    n = logs[0].n_agents
    p25, med, p75 = np.percentile(finals, [25, 50, 75])
    summary = RunSummary(
        config_hash=cfg.hash(),
        mode=cfg.model["mode"],
        beta=beta,
        n_agents=n,
        n_runs=len(logs),
        rng_seed=cfg.seeds["rng_seed"],
        final_total_median=float(med),
        final_total_p25=float(p25),
        final_total_p75=float(p75),
        final_fraction=float(med) / n if n else 0.0,
        peak_active=peak,
        peak_day=peak_day,
        social_value=social,
        health_value=hv,
        cost={
            "events_original": int(np.median([c.events_original for c in costs])),
            "events_retained": int(np.median([c.events_retained for c in costs])),
        },
    )
    mean_inf = cfg.disease_params(beta).mean_infectious_days
    rates = {
        "growth_rate": _rate_summary([metrics.growth_rate(s) for s in series]),
        "reproduction_number": _rate_summary([metrics.reproduction_number(lg, horizon) for lg in logs]),
    }
    return summary, {"series": ens, "rates": rates, "censored": metrics.censored_days(horizon, mean_inf)}


def write_outputs(out: Path, summary: RunSummary, tables: dict, cfg: ExperimentConfig,
                  logs: list[TransmissionLog]) -> list[Path]:
    out.mkdir(parents=True, exist_ok=True)
    ens = tables["series"]
    paths = []
    for name, key in (("total.csv", "total_infected"), ("active.csv", "active_infected"), ("new.csv", "new_infected")):
        metrics.write_summary_csv(out / name, ens[key])
        paths.append(out / name)
    for name, s in tables["rates"].items():
        metrics.write_summary_csv(out / f"{name}.csv", s, tables["censored"])
        paths.append(out / f"{name}.csv")
    doc = summary.to_json()
    doc["config"] = cfg.to_dict()
    (out / "summary.json").write_text(json.dumps(doc, indent=2, sort_keys=True, default=str) + "\n", encoding="utf-8")
    paths.append(out / "summary.json")
    if cfg.outputs["logs"]:
        for r, lg in enumerate(logs):
            paths += write_log(lg, out / "logs", prefix=f"run{r:03d}_")
    if cfg.outputs["venue_distribution"] and cfg.model["mode"] == "venue":
        _, dist = metrics.infections_per_venue(logs[0])
        metrics.write_venue_distribution(out / "venue_infections.csv", dist)
        paths.append(out / "venue_infections.csv")
    if cfg.outputs["gnuplot"]:
        (out / "plot.gp").write_text(GNUPLOT, encoding="utf-8")
        paths.append(out / "plot.gp")
    return paths


GNUPLOT = """set datafile separator ','
set key autotitle columnhead
set xlabel 'day'
set ylabel 'agents'
plot 'active.csv' using 1:3:4 with filledcurves title 'active p25-p75', \\
     'active.csv' using 1:2 with lines lw 2 title 'active (median)', \\
     'total.csv' using 1:2 with lines lw 2 title 'total (median)'
"""


def run_experiment(cfg: ExperimentConfig, out: Path | None = None, workers: int = 1,
                   stream=None) -> RunSummary:
    """Run the configured ensemble (plus a no-intervention baseline when needed)."""
    start = time.perf_counter()
    if stream is None:
        stream, _ = load_dataset(cfg)
    beta = resolve_beta(cfg, stream)
    logs = run_configs(stream, sim_configs(cfg, beta), workers)
    baseline = None
    if not isinstance(cfg.intervention, NoIntervention):
        baseline = run_configs(stream, sim_configs(cfg, beta, NoIntervention()), workers)
    summary, tables = summarize(cfg, logs, beta, baseline)
    if out is not None:
        write_outputs(Path(out), summary, tables, cfg, logs)
    summary.wall_clock_seconds = time.perf_counter() - start
    return summary


def run_sweep(cfg: ExperimentConfig, parameter: str, values: Sequence, out: Path, workers: int = 1) -> list[RunSummary]:
    if parameter not in SWEEP_PARAMETERS and parameter not in SWEEP_PARAMETERS.values():
        raise ConfigError(f"cannot sweep unknown parameter {parameter!r}; choose from {sorted(SWEEP_PARAMETERS)}")
    if not values:
        raise ConfigError("sweep needs at least one value")
    dotted = SWEEP_PARAMETERS.get(parameter, parameter)
    stream = None
    if not dotted.startswith("dataset."):
        stream, _ = load_dataset(cfg)
    out = Path(out)
    summaries = []
    for value in values:
        sub = cfg.with_override(dotted, value)
        summaries.append(run_experiment(sub, out / f"{parameter}={value}", workers, stream=stream))
    out.mkdir(parents=True, exist_ok=True)
    with open(out / "sweep.csv", "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["parameter", "value", "final_total_median", "final_total_p25", "final_total_p75",
                    "final_fraction", "peak_active", "peak_day", "social_value", "health_value"])
        for value, s in zip(values, summaries):
            w.writerow([parameter, value, s.final_total_median, s.final_total_p25, s.final_total_p75,
                        s.final_fraction, s.peak_active, s.peak_day, s.social_value,
                        "" if s.health_value is None else s.health_value])
    return summaries


def run_compare(cfg: ExperimentConfig, out: Path, workers: int = 1) -> dict:
    """Mobility ensemble against contact-graph and/or homogeneous baselines."""
    comp = cfg.comparisons
    if not (comp["contact_graph"] or comp["homogeneous"]):
        raise ConfigError("enable comparisons.contact_graph or comparisons.homogeneous",
                          cfg.lines.get(("comparisons",)))
    stream, _ = load_dataset(cfg)
    beta = resolve_beta(cfg, stream)
    configs = sim_configs(cfg, beta, NoIntervention())
    mobility = run_configs(stream, configs, workers)
    horizon = mobility[0].horizon_days
    params = cfg.disease_params(beta)
    models = {"mobility": mobility}
    if comp["contact_graph"]:
        days = max(stream.horizon_days, 1)
        g = build_bipartite_graph(stream, days) if cfg.model["mode"] == "venue" else build_person_graph(stream, days)
        models["contact_graph"] = [
            run_graph_simulation(g, params, cfg.seeds["n_seeds"], c.rng, horizon, t0=stream.t0) for c in configs
        ]
    if comp["homogeneous"]:
        c_hat = estimate_c(stream, stream.n_agents, max(stream.horizon_days, 1))
        models["homogeneous"] = [
            run_homogeneous(HomogeneousConfig(stream.n_agents, c_hat, params, cfg.seeds["n_seeds"], horizon, c.rng,
                                              roster=stream.agents), t0=stream.t0)
            for c in configs
        ]
    out = Path(out)
    out.mkdir(parents=True, exist_ok=True)
    report = {"config_hash": cfg.hash(), "beta": beta, "models": {}}
    mob_final = float(np.median([lg.n_infected for lg in mobility]))
    for name, logs in models.items():
        series = [metrics.daily_series(lg, horizon) for lg in logs]
        ens = metrics.ensemble_series(series)
        metrics.write_summary_csv(out / f"{name}_active.csv", ens["active_infected"])
        metrics.write_summary_csv(out / f"{name}_total.csv", ens["total_infected"])
        final = float(np.median([lg.n_infected for lg in logs]))
        peak_day = int(np.argmax(ens["active_infected"].median)) if horizon else 0
        entry = {
            "final_total_median": final,
            "peak_active": float(ens["active_infected"].median[peak_day]) if horizon else 0.0,
            "peak_day": peak_day,
            "max_secondary": int(max(int(lg.secondary_counts().max(initial=0)) for lg in logs)),
        }
        if name != "mobility":
            pairs = [compare_with_mobility(lg, m) for lg, m in zip(logs, mobility)]
            entry["final_difference"] = 0.0 if max(final, mob_final) == 0 else abs(final - mob_final) / max(final, mob_final)
            entry["jaccard_median"] = float(np.median([p[1] for p in pairs]))
        report["models"][name] = entry
    (out / "compare.json").write_text(json.dumps(report, indent=2, sort_keys=True) + "\n", encoding="utf-8")
    return report


def run_ingest(cfg: ExperimentConfig, out: Path) -> list[Path]:
    """Preprocess the dataset into event files that load back as datasets."""
    stream, stays = load_dataset(cfg)
    out = Path(out)
    out.mkdir(parents=True, exist_ok=True)
    paths = []
    if stream.n_checkins:
        write_checkins(stream, out / "checkins.tsv")
        paths.append(out / "checkins.tsv")
    if stays is not None:
        write_stays(stays, out / "stays.tsv")
        paths.append(out / "stays.tsv")
    if stream.n_meetings or cfg.dataset["format"] != "checkins":
        write_meetings(stream, out / "meetings.tsv")
        paths.append(out / "meetings.tsv")
    return paths
