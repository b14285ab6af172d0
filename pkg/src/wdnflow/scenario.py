"""Scenario configuration and end-to-end dataset generation.

A scenario bundles a network, a simulation horizon, sensor placement, event
lists, uncertainty models and a seed. Running it produces the true hydraulic
series, optional quality series, corrupted SCADA readings and ground-truth
event records. The JSON form is canonical: parsing and re-emitting a config
is a fixed point, and its digest is stamped onto the result series.
"""

from __future__ import annotations

import hashlib
import json
import os
import time
from collections import Counter
from dataclasses import dataclass, replace, field

import numpy as np

from .errors import ConfigError
from .inp import load_network
from .network import Network
from .hydraulics import (
    EpsEngine, SolverSettings, StateSeries, HydraulicState, baseline_controls,
)
from .events import (
    ActuatorEvent, CommunicationEvent, EventWindow, LeakageEvent,
    SensorFaultEvent, leak_emitter_coef, resolve_controls,
    split_pipes_for_leaks,
)
from .uncertainty import (
    SeededStream, UncertaintyModel, apply_parameter_uncertainty, perturb_scalar,
)
from .quality import QualitySettings, simulate_quality
from .scada import (
    GroundTruthRecord, RowCorruptor, ScadaData, SensorPlacement, corrupt,
    extract_readings,
)

__all__ = [
    "ScenarioConfig", "QualitySpec", "RunReport", "RunResult", "to_seconds",
    "config_from_json", "config_to_json", "load_config", "save_config",
    "config_digest", "validate_scenario", "build_runtime", "ScenarioRuntime",
    "run_scenario", "write_outputs",
]


def to_seconds(days: float = 0, hours: float = 0, minutes: float = 0,
               seconds: float = 0) -> int:
    total = days * 86400 + hours * 3600 + minutes * 60 + seconds
    if total != int(total):
        raise ConfigError(f"{total} s is not a whole number of seconds")
    return int(total)


@dataclass(frozen=True)
class QualitySpec:
    decay_rate_k: float = 0.0
    source_nodes: tuple[tuple[str, float], ...] = ()


@dataclass(frozen=True)
class ScenarioConfig:
    network_path: str
    duration_s: int
    hydraulic_time_step_s: int = 300
    quality_time_step_s: int | None = None
    sensors: SensorPlacement = field(default_factory=SensorPlacement)
    leakages: tuple[LeakageEvent, ...] = ()
    actuator_events: tuple[ActuatorEvent, ...] = ()
    sensor_faults: tuple[SensorFaultEvent, ...] = ()
    communication_events: tuple[CommunicationEvent, ...] = ()
    uncertainties: tuple[UncertaintyModel, ...] = ()
    seed: int = 0
    scada_csv_path: str | None = None
    truth_csv_path: str | None = None
    quality: QualitySpec | None = None

    def __post_init__(self):
        # accept float durations as long as they are whole seconds, so the
        # canonical JSON form stays integer-valued
        for name in ("duration_s", "hydraulic_time_step_s",
                     "quality_time_step_s"):
            value = getattr(self, name)
            if value is None:
                continue
            if isinstance(value, bool) or not isinstance(value, (int, float)):
                raise ConfigError(f"{name} must be a number of seconds")
            if float(value) != int(value):
                raise ConfigError(f"{name} must be whole seconds, got {value}")
            object.__setattr__(self, name, int(value))


# ---------------------------------------------------------------- JSON I/O

def _require_keys(obj: dict, allowed: set[str], required: set[str], ctx: str):
    if not isinstance(obj, dict):
        raise ConfigError(f"{ctx}: expected an object")
    for key in obj:
        if key not in allowed:
            raise ConfigError(f"{ctx}: unknown key '{key}'")
    for key in required:
        if key not in obj:
            raise ConfigError(f"{ctx}: missing key '{key}'")


def _number(obj: dict, key: str, ctx: str) -> float:
    v = obj[key]
    if isinstance(v, bool) or not isinstance(v, (int, float)):
        raise ConfigError(f"{ctx}: '{key}' must be a number")
    return float(v)


def _int_seconds(value, ctx: str) -> int:
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ConfigError(f"{ctx}: expected a whole number of seconds")
    if float(value) != int(value) or value <= 0:
        raise ConfigError(f"{ctx}: expected a positive whole number of seconds")
    return int(value)


def _parse_window(obj: dict, ctx: str) -> EventWindow:
    peak = None
    if "peak_time_s" in obj:
        peak = _number(obj, "peak_time_s", ctx)
    try:
        return EventWindow(_number(obj, "start_time_s", ctx),
                           _number(obj, "end_time_s", ctx), peak)
    except ConfigError as exc:
        raise ConfigError(f"{ctx}: {exc}") from None


def _parse_leakage(obj: dict, ctx: str) -> LeakageEvent:
    _require_keys(obj, {"kind", "link_id", "diameter", "start_time_s",
                        "end_time_s", "peak_time_s", "discharge_coef",
                        "area_pattern"},
                  {"kind", "link_id", "diameter", "start_time_s", "end_time_s"},
                  ctx)
    window = _parse_window(obj, ctx)
    pattern = obj.get("area_pattern")
    try:
        return LeakageEvent(
            kind=str(obj["kind"]), link_id=str(obj["link_id"]),
            diameter=_number(obj, "diameter", ctx), window=window,
            discharge_coef=_number(obj, "discharge_coef", ctx)
            if "discharge_coef" in obj else 0.75,
            area_pattern=tuple(float(v) for v in pattern)
            if pattern is not None else None)
    except ConfigError as exc:
        raise ConfigError(f"{ctx}: {exc}") from None


def _parse_actuator(obj: dict, ctx: str) -> ActuatorEvent:
    _require_keys(obj, {"kind", "target_id", "value", "start_time_s",
                        "end_time_s"},
                  {"kind", "target_id", "value", "start_time_s", "end_time_s"},
                  ctx)
    value = obj["value"]
    if not isinstance(value, bool):
        value = _number(obj, "value", ctx)
    try:
        return ActuatorEvent(kind=str(obj["kind"]),
                             target_id=str(obj["target_id"]), value=value,
                             window=_parse_window(obj, ctx))
    except ConfigError as exc:
        raise ConfigError(f"{ctx}: {exc}") from None


def _parse_fault(obj: dict, ctx: str) -> SensorFaultEvent:
    _require_keys(obj, {"kind", "sensor_type", "element_id", "param",
                        "start_time_s", "end_time_s"},
                  {"kind", "sensor_type", "element_id", "param",
                   "start_time_s", "end_time_s"}, ctx)
    try:
        return SensorFaultEvent(
            kind=str(obj["kind"]),
            sensor_ref=(str(obj["sensor_type"]), str(obj["element_id"])),
            param=_number(obj, "param", ctx), window=_parse_window(obj, ctx))
    except ConfigError as exc:
        raise ConfigError(f"{ctx}: {exc}") from None


def _parse_comm(obj: dict, ctx: str) -> CommunicationEvent:
    _require_keys(obj, {"kind", "sensor_type", "element_id", "all_sensors",
                        "start_time_s", "end_time_s"},
                  {"kind", "start_time_s", "end_time_s"}, ctx)
    ref = None
    if obj.get("all_sensors"):
        if "sensor_type" in obj or "element_id" in obj:
            raise ConfigError(f"{ctx}: all_sensors excludes a sensor ref")
    else:
        if "sensor_type" not in obj or "element_id" not in obj:
            raise ConfigError(
                f"{ctx}: need sensor_type and element_id, or all_sensors")
        ref = (str(obj["sensor_type"]), str(obj["element_id"]))
    try:
        return CommunicationEvent(kind=str(obj["kind"]),
                                  window=_parse_window(obj, ctx),
                                  sensor_ref=ref)
    except ConfigError as exc:
        raise ConfigError(f"{ctx}: {exc}") from None


def _parse_uncertainty(obj: dict, ctx: str) -> UncertaintyModel:
    _require_keys(obj, {"kind", "target", "params", "submodels"},
                  {"kind", "target"}, ctx)
    subs = None
    if obj.get("submodels"):
        subs = tuple(_parse_uncertainty(s, f"{ctx}.submodels[{i}]")
                     for i, s in enumerate(obj["submodels"]))
    params = None
    if obj.get("params"):
        params = {}
        for name, v in obj["params"].items():
            if isinstance(v, bool) or not isinstance(v, (int, float)):
                raise ConfigError(f"{ctx}: param '{name}' must be a number")
            params[str(name)] = float(v)
    try:
        return UncertaintyModel(kind=str(obj["kind"]), target=str(obj["target"]),
                                params=params, submodels=subs)
    except ConfigError as exc:
        raise ConfigError(f"{ctx}: {exc}") from None


def _parse_sensors(obj: dict, ctx: str) -> SensorPlacement:
    _require_keys(obj, {"pressure_nodes", "flow_links", "quality_nodes",
                        "tank_level_tanks"}, set(), ctx)
    def ids(key):
        vals = obj.get(key, [])
        if not isinstance(vals, list) or \
                any(not isinstance(v, str) for v in vals):
            raise ConfigError(f"{ctx}: '{key}' must be a list of ids")
        return tuple(sorted(vals))
    try:
        return SensorPlacement(pressure_nodes=ids("pressure_nodes"),
                               flow_links=ids("flow_links"),
                               quality_nodes=ids("quality_nodes"),
                               tank_level_tanks=ids("tank_level_tanks"))
    except ConfigError as exc:
        raise ConfigError(f"{ctx}: {exc}") from None


def _parse_quality(obj: dict, ctx: str) -> QualitySpec:
    _require_keys(obj, {"decay_rate_k", "source_nodes"}, set(), ctx)
    k = _number(obj, "decay_rate_k", ctx) if "decay_rate_k" in obj else 0.0
    if k < 0:
        raise ConfigError(f"{ctx}: decay_rate_k must be >= 0")
    sources = obj.get("source_nodes", {})
    if not isinstance(sources, dict):
        raise ConfigError(f"{ctx}: source_nodes must map node id to mg/L")
    pairs = []
    for nid in sorted(sources):
        v = sources[nid]
        if isinstance(v, bool) or not isinstance(v, (int, float)) or v < 0:
            raise ConfigError(f"{ctx}: source concentration at '{nid}'"
                              " must be a number >= 0")
        pairs.append((str(nid), float(v)))
    return QualitySpec(decay_rate_k=k, source_nodes=tuple(pairs))


_TOP_KEYS = {"network_path", "simulation", "sensors", "leakages",
             "actuator_events", "sensor_faults", "communication_events",
             "uncertainties", "seed", "outputs", "quality"}


def config_from_json(text: str) -> ScenarioConfig:
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"invalid JSON: {exc}") from None
    _require_keys(doc, _TOP_KEYS, {"network_path", "simulation", "seed"},
                  "config")
    sim = doc["simulation"]
    _require_keys(sim, {"duration_s", "hydraulic_time_step_s",
                        "quality_time_step_s"}, {"duration_s"}, "simulation")
    duration = _int_seconds(sim["duration_s"], "simulation.duration_s")
    step = _int_seconds(sim.get("hydraulic_time_step_s", 300),
                        "simulation.hydraulic_time_step_s")
    qstep = None
    if "quality_time_step_s" in sim:
        qstep = _int_seconds(sim["quality_time_step_s"],
                             "simulation.quality_time_step_s")
    seed = doc["seed"]
    if isinstance(seed, bool) or not isinstance(seed, int):
        raise ConfigError("seed must be an integer")

    sensors = _parse_sensors(doc.get("sensors", {}), "sensors")
    leakages = tuple(_parse_leakage(o, f"leakages[{i}]")
                     for i, o in enumerate(doc.get("leakages", [])))
    actuators = tuple(_parse_actuator(o, f"actuator_events[{i}]")
                      for i, o in enumerate(doc.get("actuator_events", [])))
    faults = tuple(_parse_fault(o, f"sensor_faults[{i}]")
                   for i, o in enumerate(doc.get("sensor_faults", [])))
    comms = tuple(_parse_comm(o, f"communication_events[{i}]")
                  for i, o in enumerate(doc.get("communication_events", [])))
    unc = tuple(_parse_uncertainty(o, f"uncertainties[{i}]")
                for i, o in enumerate(doc.get("uncertainties", [])))
    scada_path = truth_path = None
    if "outputs" in doc:
        _require_keys(doc["outputs"], {"scada_csv_path", "truth_csv_path"},
                      set(), "outputs")
        scada_path = doc["outputs"].get("scada_csv_path")
        truth_path = doc["outputs"].get("truth_csv_path")
    quality = _parse_quality(doc["quality"], "quality") \
        if "quality" in doc else None

    return ScenarioConfig(
        network_path=str(doc["network_path"]), duration_s=duration,
        hydraulic_time_step_s=step, quality_time_step_s=qstep,
        sensors=sensors, leakages=leakages, actuator_events=actuators,
        sensor_faults=faults, communication_events=comms, uncertainties=unc,
        seed=seed, scada_csv_path=scada_path, truth_csv_path=truth_path,
        quality=quality)


def _window_json(w: EventWindow) -> dict:
    out = {"start_time_s": w.start_time, "end_time_s": w.end_time}
    if w.peak_time is not None:
        out["peak_time_s"] = w.peak_time
    return out


def _uncertainty_json(m: UncertaintyModel) -> dict:
    out = {"kind": m.kind, "target": m.target}
    if m.params:
        out["params"] = {k: m.params[k] for k in sorted(m.params)}
    if m.submodels:
        out["submodels"] = [_uncertainty_json(s) for s in m.submodels]
    return out


def config_to_json(cfg: ScenarioConfig) -> str:
    sim = {"duration_s": cfg.duration_s,
           "hydraulic_time_step_s": cfg.hydraulic_time_step_s}
    if cfg.quality_time_step_s is not None:
        sim["quality_time_step_s"] = cfg.quality_time_step_s
    doc = {
        "network_path": cfg.network_path,
        "simulation": sim,
        "sensors": {
            "pressure_nodes": sorted(cfg.sensors.pressure_nodes),
            "flow_links": sorted(cfg.sensors.flow_links),
            "quality_nodes": sorted(cfg.sensors.quality_nodes),
            "tank_level_tanks": sorted(cfg.sensors.tank_level_tanks),
        },
        "leakages": [],
        "actuator_events": [],
        "sensor_faults": [],
        "communication_events": [],
        "uncertainties": [_uncertainty_json(m) for m in cfg.uncertainties],
        "seed": cfg.seed,
    }
    for e in cfg.leakages:
        obj = {"kind": e.kind, "link_id": e.link_id, "diameter": e.diameter,
               **_window_json(e.window), "discharge_coef": e.discharge_coef}
        if e.area_pattern is not None:
            obj["area_pattern"] = list(e.area_pattern)
        doc["leakages"].append(obj)
    for e in cfg.actuator_events:
        doc["actuator_events"].append(
            {"kind": e.kind, "target_id": e.target_id, "value": e.value,
             **_window_json(e.window)})
    for e in cfg.sensor_faults:
        doc["sensor_faults"].append(
            {"kind": e.kind, "sensor_type": e.sensor_ref[0],
             "element_id": e.sensor_ref[1], "param": e.param,
             **_window_json(e.window)})
    for e in cfg.communication_events:
        obj = {"kind": e.kind, **_window_json(e.window)}
        if e.sensor_ref is None:
            obj["all_sensors"] = True
        else:
            obj["sensor_type"], obj["element_id"] = e.sensor_ref
        doc["communication_events"].append(obj)
    if cfg.scada_csv_path is not None or cfg.truth_csv_path is not None:
        outputs = {}
        if cfg.scada_csv_path is not None:
            outputs["scada_csv_path"] = cfg.scada_csv_path
        if cfg.truth_csv_path is not None:
            outputs["truth_csv_path"] = cfg.truth_csv_path
        doc["outputs"] = outputs
    if cfg.quality is not None:
        doc["quality"] = {"decay_rate_k": cfg.quality.decay_rate_k,
                          "source_nodes": dict(cfg.quality.source_nodes)}
    return json.dumps(doc, indent=2) + "\n"


def load_config(path: str) -> ScenarioConfig:
    try:
        with open(path, encoding="utf-8") as fh:
            text = fh.read()
    except OSError as exc:
        raise ConfigError(f"cannot read config '{path}': {exc}") from None
    cfg = config_from_json(text)
    base = os.path.dirname(os.path.abspath(path))
    if not os.path.isabs(cfg.network_path):
        cfg = replace(cfg, network_path=os.path.join(base, cfg.network_path))
    return cfg


def save_config(cfg: ScenarioConfig, path: str) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(config_to_json(cfg))


def config_digest(cfg: ScenarioConfig) -> str:
    return hashlib.sha256(config_to_json(cfg).encode()).hexdigest()


# ------------------------------------------------------------- validation

def validate_scenario(cfg: ScenarioConfig, network: Network) -> None:
    problems: list[str] = []
    if cfg.duration_s % cfg.hydraulic_time_step_s != 0:
        problems.append("duration_s must be a multiple of hydraulic_time_step_s")
    qstep = cfg.quality_time_step_s
    if qstep is not None and cfg.hydraulic_time_step_s % qstep != 0:
        problems.append("quality_time_step_s must divide hydraulic_time_step_s")

    for name, events in (("leakages", cfg.leakages),
                         ("actuator_events", cfg.actuator_events),
                         ("sensor_faults", cfg.sensor_faults),
                         ("communication_events", cfg.communication_events)):
        for i, e in enumerate(events):
            if e.window.end_time > cfg.duration_s:
                problems.append(f"{name}[{i}]: window ends after duration_s")

    for i, e in enumerate(cfg.leakages):
        if e.link_id not in network.pipes:
            problems.append(f"leakages[{i}]: '{e.link_id}' is not a pipe")
    for i, e in enumerate(cfg.actuator_events):
        if e.kind in ("pump_state", "pump_speed"):
            if e.target_id not in network.pumps:
                problems.append(f"actuator_events[{i}]: no pump"
                                f" '{e.target_id}'")
        elif e.target_id not in network.valves:
            problems.append(f"actuator_events[{i}]: no valve '{e.target_id}'")

    links = set(network.link_ids())
    nodes = set(network.node_ids())
    for nid in cfg.sensors.pressure_nodes:
        if nid not in network.junctions:
            problems.append(f"sensors: pressure node '{nid}' is not a junction")
    for lid in cfg.sensors.flow_links:
        if lid not in links:
            problems.append(f"sensors: flow link '{lid}' does not exist")
    for nid in cfg.sensors.quality_nodes:
        if nid not in nodes:
            problems.append(f"sensors: quality node '{nid}' does not exist")
    for tid in cfg.sensors.tank_level_tanks:
        if tid not in network.tanks:
            problems.append(f"sensors: level tank '{tid}' does not exist")

    labels = {c.label for c in cfg.sensors.columns()}
    for i, e in enumerate(cfg.sensor_faults):
        ref = f"{e.sensor_ref[0]}:{e.sensor_ref[1]}"
        if ref not in labels:
            problems.append(f"sensor_faults[{i}]: no sensor '{ref}'"
                            " in the placement")
    for i, e in enumerate(cfg.communication_events):
        if e.sensor_ref is not None:
            ref = f"{e.sensor_ref[0]}:{e.sensor_ref[1]}"
            if ref not in labels:
                problems.append(f"communication_events[{i}]: no sensor"
                                f" '{ref}' in the placement")

    if cfg.quality is not None:
        for nid, _ in cfg.quality.source_nodes:
            if nid not in nodes:
                problems.append(f"quality: source node '{nid}' does not exist")

    if problems:
        raise ConfigError("; ".join(problems))


# -------------------------------------------------------------- execution

@dataclass(frozen=True)
class RunReport:
    steps: int
    iterations: dict[int, int]
    wall_time_s: float
    warnings: tuple[str, ...]


@dataclass(frozen=True, eq=False)
class RunResult:
    config: ScenarioConfig
    scada: ScadaData
    scada_true: ScadaData
    series: StateSeries
    quality_states: list | None
    report: RunReport


class ScenarioRuntime:
    """Prepared pieces of a scenario, shared by the batch runner and the
    control environment so both execute identical arithmetic."""

    def __init__(self, config: ScenarioConfig,
                 settings: SolverSettings | None = None):
        self.config = config
        self.settings = settings or SolverSettings()
        warnings: list[str] = []
        network = load_network(config.network_path, warnings=warnings)
        validate_scenario(config, network)
        self.stream = SeededStream(config.seed)
        self.report_network = apply_parameter_uncertainty(
            network, config.uncertainties, self.stream)
        leak_pipe_ids = sorted({e.link_id for e in config.leakages})
        if leak_pipe_ids:
            self.solve_network, self.leak_junctions = split_pipes_for_leaks(
                self.report_network, leak_pipe_ids)
            warnings.append("leak pipes were split at their midpoint;"
                            " flow sensors on them read the upstream half")
        else:
            self.solve_network, self.leak_junctions = self.report_network, {}
        self._junction_to_pipe = {j: p for p, j in self.leak_junctions.items()}
        self._baseline = baseline_controls(self.solve_network)
        self.digest = config_digest(config)
        self.warnings = warnings

    def control_hook(self, t: float):
        return resolve_controls(self._baseline,
                                list(self.config.actuator_events), t)

    def emitter_hook(self, t: float):
        coefs: dict[str, float] = {}
        for e in self.config.leakages:
            k = leak_emitter_coef(e, t)
            if k > 0.0:
                jid = self.leak_junctions[e.link_id]
                coefs[jid] = coefs.get(jid, 0.0) + k
        return coefs or None

    def make_engine(self) -> EpsEngine:
        return EpsEngine(self.solve_network, self.settings,
                         self.config.duration_s,
                         self.config.hydraulic_time_step_s,
                         self.control_hook, self.emitter_hook)

    def quality_settings(self) -> QualitySettings | None:
        cfg = self.config
        if cfg.quality is None and not cfg.sensors.quality_nodes:
            return None
        spec = cfg.quality or QualitySpec()
        k = spec.decay_rate_k
        for m_idx, m in enumerate(cfg.uncertainties):
            if m.target == "decay_rate":
                k = perturb_scalar(m, k,
                                   self.stream.child("param", m_idx,
                                                     "decay_rate"))
        return QualitySettings(
            quality_time_step=cfg.quality_time_step_s or 60,
            decay_rate_k=k, source_nodes=dict(spec.source_nodes))

    def truth_records(self) -> tuple[GroundTruthRecord, ...]:
        records = []
        for name, events in (("leakage", self.config.leakages),
                             ("actuator", self.config.actuator_events),
                             ("sensor_fault", self.config.sensor_faults),
                             ("communication", self.config.communication_events)):
            for i, e in enumerate(events):
                records.append(GroundTruthRecord(
                    f"{name}_{i}", e.kind, e.window.start_time,
                    e.window.end_time))
        return tuple(records)

    def make_corruptor(self, columns) -> RowCorruptor:
        noise = [m for m in self.config.uncertainties
                 if m.target == "sensor_noise"]
        return RowCorruptor(columns, list(self.config.sensor_faults),
                            list(self.config.communication_events),
                            noise, self.stream)

    def project_state(self, state: HydraulicState) -> HydraulicState:
        """Restrict a solved state to the pre-split network's elements."""
        if not self.leak_junctions:
            return state
        sel = self._selections()
        leak = {self._junction_to_pipe.get(j, j): q
                for j, q in state.leak_flow.items()}
        return HydraulicState(
            t=state.t, flow=state.flow[sel["link"]],
            head=state.head[sel["node"]],
            pressure_head=state.pressure_head[sel["junction"]],
            tank_level=state.tank_level,
            actual_demand=state.actual_demand[sel["junction"]],
            tank_net_inflow=state.tank_net_inflow, leak_flow=leak,
            iterations=state.iterations, converged=state.converged)

    def _selections(self):
        if not hasattr(self, "_sel"):
            solve, report = self.solve_network, self.report_network
            node_index = {n: i for i, n in enumerate(solve.node_ids())}
            link_index = {l: i for i, l in enumerate(solve.link_ids())}
            junc_index = {j: i for i, j in enumerate(sorted(solve.junctions))}
            self._sel = {
                "node": np.array([node_index[n] for n in report.node_ids()]),
                "link": np.array([link_index[l] for l in report.link_ids()]),
                "junction": np.array([junc_index[j]
                                      for j in sorted(report.junctions)]),
            }
        return self._sel

    def project_series(self, series: StateSeries) -> StateSeries:
        if not self.leak_junctions:
            return series
        report = self.report_network
        return StateSeries(
            node_ids=tuple(report.node_ids()),
            link_ids=tuple(report.link_ids()),
            junction_ids=tuple(sorted(report.junctions)),
            tank_ids=tuple(sorted(report.tanks)),
            states=tuple(self.project_state(s) for s in series.states),
            config_digest=series.config_digest)


def build_runtime(config: ScenarioConfig,
                  settings: SolverSettings | None = None) -> ScenarioRuntime:
    return ScenarioRuntime(config, settings)


def run_scenario(config: ScenarioConfig,
                 settings: SolverSettings | None = None) -> RunResult:
    """Simulate, extract sensor readings, corrupt them, return everything."""
    t0 = time.perf_counter()
    runtime = build_runtime(config, settings)
    warnings = list(runtime.warnings)
    engine = runtime.make_engine()
    solved = engine.run(config_digest=runtime.digest)
    series = runtime.project_series(solved)

    quality_states = None
    qsettings = runtime.quality_settings()
    if qsettings is not None:
        if runtime.leak_junctions:
            warnings.append("quality transport ignores leak withdrawals;"
                            " its mass ledger will not close during leaks")
        quality_states = simulate_quality(series, runtime.report_network,
                                          qsettings)

    scada_true = extract_readings(series, config.sensors, quality_states,
                                  ground_truth=runtime.truth_records())
    noise = [m for m in config.uncertainties if m.target == "sensor_noise"]
    scada = corrupt(scada_true, list(config.sensor_faults),
                    list(config.communication_events), noise, runtime.stream)

    hist = Counter(s.iterations for s in solved.states)
    report = RunReport(steps=len(solved.states),
                       iterations=dict(sorted(hist.items())),
                       wall_time_s=time.perf_counter() - t0,
                       warnings=tuple(warnings))
    return RunResult(config=config, scada=scada, scada_true=scada_true,
                     series=series, quality_states=quality_states,
                     report=report)


def write_outputs(result: RunResult, out_dir: str | None = None) -> dict[str, str]:
    """Write the configured CSV outputs; returns {kind: path written}."""
    from .scada import to_csv, truth_to_csv

    def resolve(p: str) -> str:
        if out_dir is not None and not os.path.isabs(p):
            p = os.path.join(out_dir, p)
        parent = os.path.dirname(p)
        if parent:
            os.makedirs(parent, exist_ok=True)
        return p

    written = {}
    cfg = result.config
    if cfg.scada_csv_path:
        path = resolve(cfg.scada_csv_path)
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(to_csv(result.scada))
        written["scada"] = path
    if cfg.truth_csv_path:
        path = resolve(cfg.truth_csv_path)
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(truth_to_csv(result.scada.ground_truth))
        written["truth"] = path
    return written
