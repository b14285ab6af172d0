"""Sensor placement, reading extraction, and measurement corruption.

Column order is a total contract: pressure sensors first, then flow, quality,
tank level, each group sorted lexicographically by element id. Missing data
is NaN in memory and an empty field in CSV, never the text "NaN".

Corruption applies per cell in a fixed order: sensor-noise uncertainty, then
sensor faults, then communication events. The incremental RowCorruptor is the
single implementation; batch corruption just sweeps it over the rows, so the
control environment sees byte-identical draws.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import ConfigError, UnknownSensorRefError
from .events import (
    CommunicationEvent,
    SensorFaultEvent,
    apply_sensor_fault,
    winning_event,
)
from .hydraulics import StateSeries
from .uncertainty import SeededStream, SeriesPerturber

__all__ = [
    "SensorColumn", "SensorPlacement", "GroundTruthRecord", "ScadaData",
    "extract_readings", "RowCorruptor", "corrupt", "to_csv", "from_csv",
    "truth_to_csv", "truth_from_csv",
]

_UNITS = {"pressure": "m", "flow": "m3/s", "quality": "mg/L", "level": "m"}


@dataclass(frozen=True)
class SensorColumn:
    sensor_type: str
    element_id: str
    unit: str

    @property
    def label(self) -> str:
        return f"{self.sensor_type}:{self.element_id}"


@dataclass(frozen=True)
class SensorPlacement:
    pressure_nodes: tuple[str, ...] = ()
    flow_links: tuple[str, ...] = ()
    quality_nodes: tuple[str, ...] = ()
    tank_level_tanks: tuple[str, ...] = ()

    def __post_init__(self):
        for name in ("pressure_nodes", "flow_links", "quality_nodes",
                     "tank_level_tanks"):
            ids = getattr(self, name)
            object.__setattr__(self, name, tuple(ids))
            if len(set(ids)) != len(ids):
                raise ConfigError(f"duplicate ids in {name}")

    def columns(self) -> tuple[SensorColumn, ...]:
        cols = []
        for stype, ids in (("pressure", self.pressure_nodes),
                           ("flow", self.flow_links),
                           ("quality", self.quality_nodes),
                           ("level", self.tank_level_tanks)):
            for eid in sorted(ids):
                cols.append(SensorColumn(stype, eid, _UNITS[stype]))
        return tuple(cols)


@dataclass(frozen=True)
class GroundTruthRecord:
    event_id: str
    kind: str
    start_s: float
    end_s: float


@dataclass(frozen=True, eq=False)
class ScadaData:
    times: tuple[float, ...]
    columns: tuple[SensorColumn, ...]
    values: np.ndarray           # shape (len(times), len(columns)), NaN = missing
    ground_truth: tuple[GroundTruthRecord, ...] = ()

    def __post_init__(self):
        if self.values.shape != (len(self.times), len(self.columns)):
            raise ConfigError("scada matrix shape does not match times x columns")
        self.values.flags.writeable = False

    def get_data(self) -> np.ndarray:
        return self.values.copy()

    def column_labels(self) -> tuple[str, ...]:
        return tuple(c.label for c in self.columns)


def extract_readings(series: StateSeries, placement: SensorPlacement,
                     quality_states=None,
                     ground_truth: tuple[GroundTruthRecord, ...] = ()) -> ScadaData:
    """True sensor values from simulation results, in contract column order.

    Pressure sensors must sit on junctions, flow sensors on links, level
    sensors on tanks; quality sensors on any node (requires quality states).
    """
    junction_index = {j: i for i, j in enumerate(series.junction_ids)}
    link_index = {l: i for i, l in enumerate(series.link_ids)}
    node_index = {n: i for i, n in enumerate(series.node_ids)}
    tank_index = {t: i for i, t in enumerate(series.tank_ids)}

    columns = placement.columns()
    times = tuple(s.t for s in series.states)
    values = np.empty((len(times), len(columns)))

    for c, col in enumerate(columns):
        if col.sensor_type == "pressure":
            if col.element_id not in junction_index:
                raise UnknownSensorRefError(
                    f"pressure sensor '{col.element_id}' is not a junction")
            i = junction_index[col.element_id]
            values[:, c] = [s.pressure_head[i] for s in series.states]
        elif col.sensor_type == "flow":
            if col.element_id not in link_index:
                raise UnknownSensorRefError(
                    f"flow sensor '{col.element_id}' is not a link")
            i = link_index[col.element_id]
            values[:, c] = [s.flow[i] for s in series.states]
        elif col.sensor_type == "quality":
            if quality_states is None:
                raise UnknownSensorRefError(
                    "quality sensors need a quality simulation")
            if col.element_id not in node_index:
                raise UnknownSensorRefError(
                    f"quality sensor '{col.element_id}' is not a node")
            i = node_index[col.element_id]
            values[:, c] = [q.node_concentration[i] for q in quality_states]
        else:
            if col.element_id not in tank_index:
                raise UnknownSensorRefError(
                    f"level sensor '{col.element_id}' is not a tank")
            i = tank_index[col.element_id]
            values[:, c] = [s.tank_level[i] for s in series.states]

    return ScadaData(times=times, columns=columns, values=values,
                     ground_truth=tuple(ground_truth))


class RowCorruptor:
    """Applies noise, faults and communication events one row at a time.

    Draw sequences are value-independent, so rows corrupted incrementally
    match a batch sweep bit for bit. For freeze events the held value is the
    post-fault value seen at the last step before the freeze window opens;
    a freeze with no prior step yields missing values.
    """

    def __init__(self, columns: tuple[SensorColumn, ...],
                 faults: list[SensorFaultEvent],
                 comms: list[CommunicationEvent],
                 noise_models: list, stream: SeededStream):
        self.columns = columns
        label_to_col = {c.label: i for i, c in enumerate(columns)}
        for e in faults:
            ref = f"{e.sensor_ref[0]}:{e.sensor_ref[1]}"
            if ref not in label_to_col:
                raise UnknownSensorRefError(
                    f"sensor fault targets unknown sensor '{ref}'")
        for e in comms:
            if e.sensor_ref is not None:
                ref = f"{e.sensor_ref[0]}:{e.sensor_ref[1]}"
                if ref not in label_to_col:
                    raise UnknownSensorRefError(
                        f"communication event targets unknown sensor '{ref}'")
        self.faults_by_col: list[list[tuple[int, SensorFaultEvent]]] = \
            [[] for _ in columns]
        for idx, e in enumerate(faults):
            col = label_to_col[f"{e.sensor_ref[0]}:{e.sensor_ref[1]}"]
            self.faults_by_col[col].append((idx, e))
        self.comms_by_col: list[list[tuple[int, CommunicationEvent]]] = \
            [[] for _ in columns]
        for idx, e in enumerate(comms):
            if e.sensor_ref is None:
                for col in range(len(columns)):
                    self.comms_by_col[col].append((idx, e))
            else:
                col = label_to_col[f"{e.sensor_ref[0]}:{e.sensor_ref[1]}"]
                self.comms_by_col[col].append((idx, e))
        noise = [m for m in noise_models if m.target == "sensor_noise"]
        self.perturbers = [
            [SeriesPerturber(m, stream.child("noise", mi, col.label))
             for mi, m in enumerate(noise)]
            for col in columns]
        self.fault_gens = {idx: stream.generator("fault", idx)
                           for idx, _ in enumerate(faults)}
        self.last_post_fault = [math.nan] * len(columns)
        self.frozen_value: dict[tuple[int, int], float] = {}

    def corrupt_row(self, t: float, row: np.ndarray) -> np.ndarray:
        out = np.array(row, dtype=float)
        for c in range(len(self.columns)):
            v = float(out[c])
            for p in self.perturbers[c]:
                v = p.step(v)
            faults = [e for _, e in self.faults_by_col[c]]
            winner = winning_event(faults, t)
            if winner is not None:
                idx = next(i for i, e in self.faults_by_col[c] if e is winner)
                v = apply_sensor_fault(v, winner, t, rng=self.fault_gens[idx])
            post_fault = v
            comms = [e for _, e in self.comms_by_col[c]]
            comm = winning_event(comms, t)
            if comm is not None:
                idx = next(i for i, e in self.comms_by_col[c] if e is comm)
                if comm.kind == "data_loss":
                    v = math.nan
                else:
                    key = (idx, c)
                    if key not in self.frozen_value:
                        self.frozen_value[key] = self.last_post_fault[c]
                    v = self.frozen_value[key]
            self.last_post_fault[c] = post_fault
            out[c] = v
        return out


def corrupt(scada: ScadaData, faults, comms, noise, stream: SeededStream) -> ScadaData:
    """New ScadaData with measurement corruption applied; truth is untouched."""
    corruptor = RowCorruptor(scada.columns, list(faults), list(comms),
                             list(noise), stream)
    rows = [corruptor.corrupt_row(t, scada.values[i])
            for i, t in enumerate(scada.times)]
    values = np.array(rows) if rows else scada.values.copy()
    return ScadaData(times=scada.times, columns=scada.columns, values=values,
                     ground_truth=scada.ground_truth)


def _fmt(x: float) -> str:
    return "" if math.isnan(x) else repr(float(x))


def to_csv(scada: ScadaData) -> str:
    header = "time_s," + ",".join(scada.column_labels()) if scada.columns \
        else "time_s"
    lines = [header]
    for i, t in enumerate(scada.times):
        cells = [repr(float(t))] + [_fmt(v) for v in scada.values[i]]
        lines.append(",".join(cells))
    return "\n".join(lines) + "\n"


def from_csv(text: str) -> ScadaData:
    lines = [ln for ln in text.splitlines() if ln.strip()]
    if not lines:
        raise ConfigError("empty SCADA CSV")
    header = lines[0].split(",")
    if header[0] != "time_s":
        raise ConfigError("SCADA CSV must start with a time_s column")
    columns = []
    for label in header[1:]:
        if ":" not in label:
            raise ConfigError(f"malformed column label '{label}'")
        stype, eid = label.split(":", 1)
        if stype not in _UNITS:
            raise ConfigError(f"unknown sensor type in column '{label}'")
        columns.append(SensorColumn(stype, eid, _UNITS[stype]))
    times = []
    rows = []
    for ln_no, line in enumerate(lines[1:], start=2):
        cells = line.split(",")
        if len(cells) != len(header):
            raise ConfigError(
                f"line {ln_no}: expected {len(header)} fields, got {len(cells)}")
        try:
            times.append(float(cells[0]))
            rows.append([math.nan if c == "" else float(c) for c in cells[1:]])
        except ValueError:
            raise ConfigError(f"line {ln_no}: non-numeric value") from None
    values = np.array(rows) if rows else np.empty((0, len(columns)))
    return ScadaData(times=tuple(times), columns=tuple(columns), values=values)


def truth_to_csv(records) -> str:
    lines = ["event_id,kind,start_s,end_s"]
    for r in records:
        lines.append(f"{r.event_id},{r.kind},{repr(float(r.start_s))},"
                     f"{repr(float(r.end_s))}")
    return "\n".join(lines) + "\n"


def truth_from_csv(text: str) -> tuple[GroundTruthRecord, ...]:
    lines = [ln for ln in text.splitlines() if ln.strip()]
    if not lines or lines[0] != "event_id,kind,start_s,end_s":
        raise ConfigError("malformed ground-truth CSV header")
    out = []
    for ln_no, line in enumerate(lines[1:], start=2):
        cells = line.split(",")
        if len(cells) != 4:
            raise ConfigError(f"line {ln_no}: expected 4 fields")
        try:
            out.append(GroundTruthRecord(cells[0], cells[1],
                                         float(cells[2]), float(cells[3])))
        except ValueError:
            raise ConfigError(f"line {ln_no}: bad time value") from None
    return tuple(out)
