"""Single-species quality transport over a solved hydraulic series.

Pipes carry ordered plug-flow segments (index 0 at the from-node end); nodes
mix completely; decay is first order. Pumps and valves hold no volume, so
water crossing them arrives with the donor node's concentration from the
previous quality step. Within one hydraulic step the flows are frozen and the
quality step subdivides it.

The run keeps an exact mass ledger (injected at sources, withdrawn at demands
and reservoirs, lost to decay) so conservation is checkable from the outside.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import ConfigError, NegativeConcentrationError
from .hydraulics import StateSeries
from .network import Network

__all__ = ["QualitySettings", "QualityState", "decay", "simulate_quality",
           "SEGMENT_MERGE_DC"]

SEGMENT_MERGE_DC = 1e-4   # mg/L; adjacent segments closer than this merge


@dataclass(frozen=True)
class QualitySettings:
    quality_time_step: int = 60           # s
    decay_rate_k: float = 0.0             # 1/s
    source_nodes: dict[str, float] = field(default_factory=dict)

    def __post_init__(self):
        if self.quality_time_step <= 0:
            raise ConfigError("quality_time_step must be > 0")
        if self.decay_rate_k < 0:
            raise ConfigError("decay_rate_k must be >= 0")
        for node, conc in self.source_nodes.items():
            if conc < 0:
                raise ConfigError(f"source concentration at '{node}' must be >= 0")


@dataclass(frozen=True, eq=False)
class QualityState:
    """Concentrations at one hydraulic step, plus the cumulative mass ledger."""

    t: float
    node_concentration: np.ndarray                 # per node, canonical order
    pipe_segments: dict[str, tuple[tuple[float, float], ...]]  # (volume m3, mg/L)
    stored_mass: float       # in pipes and tanks, m3 * mg/L
    injected_mass: float     # cumulative source injection
    withdrawn_mass: float    # cumulative demand + reservoir absorption
    decayed_mass: float      # cumulative first-order loss


def decay(concentration: float, k: float, dt: float) -> float:
    """First-order decay c' = c exp(-k dt)."""
    return concentration * math.exp(-k * dt)


def _pipe_volume(network: Network, pid: str) -> float:
    p = network.pipes[pid]
    return math.pi * (p.diameter / 2.0) ** 2 * p.length


def _merge(segments: list[list[float]]) -> None:
    i = 0
    while i + 1 < len(segments):
        if abs(segments[i][1] - segments[i + 1][1]) < SEGMENT_MERGE_DC:
            v0, c0 = segments[i]
            v1, c1 = segments[i + 1]
            vol = v0 + v1
            segments[i] = [vol, (v0 * c0 + v1 * c1) / vol if vol > 0 else c0]
            del segments[i + 1]
        else:
            i += 1


def _peel(segments: list[list[float]], volume: float,
          downstream_last: bool) -> tuple[float, float]:
    """Remove `volume` from the downstream end; returns (mass, volume removed)."""
    mass = 0.0
    removed = 0.0
    while volume > 1e-15 and segments:
        seg = segments[-1] if downstream_last else segments[0]
        if seg[0] <= volume + 1e-15:
            mass += seg[0] * seg[1]
            removed += seg[0]
            volume -= seg[0]
            segments.pop() if downstream_last else segments.pop(0)
        else:
            mass += volume * seg[1]
            removed += volume
            seg[0] -= volume
            volume = 0.0
    return mass, removed


def simulate_quality(series: StateSeries, network: Network,
                     settings: QualitySettings) -> list[QualityState]:
    """Advect, mix and decay over the series; one QualityState per step."""
    if not series.states:
        return []
    step_s = int(series.step_s) if len(series.states) > 1 \
        else network.options.hydraulic_step_s
    qdt = settings.quality_time_step
    if step_s % qdt != 0:
        raise ConfigError("quality_time_step must divide the hydraulic step")
    n_sub = step_s // qdt
    k_decay = settings.decay_rate_k

    node_ids = list(series.node_ids)
    node_index = {n: i for i, n in enumerate(node_ids)}
    junctions = [n for n in node_ids if n in network.junctions]
    reservoirs = set(network.reservoirs)
    tanks = {tid: network.tanks[tid] for tid in network.tanks}
    link_index = {l: i for i, l in enumerate(series.link_ids)}
    pipe_ids = [l for l in series.link_ids if l in network.pipes]
    thin_links = [l for l in series.link_ids if l not in network.pipes]

    for nid in settings.source_nodes:
        if nid not in node_index:
            raise ConfigError(f"quality source '{nid}' is not a network node")

    segments: dict[str, list[list[float]]] = {
        pid: [[_pipe_volume(network, pid), 0.0]] for pid in pipe_ids}
    conc = np.zeros(len(node_ids))
    for nid, c in settings.source_nodes.items():
        conc[node_index[nid]] = c
    tank_mass = {tid: 0.0 for tid in tanks}
    tank_vol = {tid: tanks[tid].area * tanks[tid].init_level for tid in tanks}

    injected = 0.0
    withdrawn = 0.0
    decayed = 0.0
    out: list[QualityState] = []

    def node_source(nid: str) -> float | None:
        return settings.source_nodes.get(nid)

    def guard(c: float) -> float:
        if c < -1e-9:
            raise NegativeConcentrationError(
                f"negative concentration {c} encountered")
        return max(c, 0.0)

    for step_idx, state in enumerate(series.states):
        flows = state.flow
        junction_demand = {jid: state.actual_demand[i]
                           for i, jid in enumerate(series.junction_ids)}
        tank_inflow = {tid: state.tank_net_inflow[i]
                       for i, tid in enumerate(series.tank_ids)}

        for _ in range(n_sub):
            # 1. first-order reaction on all stored water
            if k_decay > 0.0:
                factor = math.exp(-k_decay * qdt)
                for segs in segments.values():
                    for seg in segs:
                        lost = seg[0] * seg[1] * (1.0 - factor)
                        decayed += lost
                        seg[1] *= factor
                for tid in tanks:
                    lost = tank_mass[tid] * (1.0 - factor)
                    decayed += lost
                    tank_mass[tid] *= factor

            # 2. collect arrivals at every node
            inflow_mass = np.zeros(len(node_ids))
            inflow_vol = np.zeros(len(node_ids))
            for pid in pipe_ids:
                q = flows[link_index[pid]]
                if q == 0.0:
                    continue
                pipe = network.pipes[pid]
                vol = abs(q) * qdt
                downstream = pipe.to_node if q > 0 else pipe.from_node
                upstream = pipe.from_node if q > 0 else pipe.to_node
                mass, removed = _peel(segments[pid], vol, downstream_last=q > 0)
                short = vol - removed
                if short > 1e-15:
                    # parcel passed the whole pipe within one step: the excess
                    # carries the donor node's previous concentration
                    mass += short * conc[node_index[upstream]]
                di = node_index[downstream]
                inflow_mass[di] += mass
                inflow_vol[di] += vol
            for lid in thin_links:
                q = flows[link_index[lid]]
                if q == 0.0:
                    continue
                elem = network.link(lid)
                vol = abs(q) * qdt
                downstream = elem.to_node if q > 0 else elem.from_node
                upstream = elem.from_node if q > 0 else elem.to_node
                ui = node_index[upstream]
                if upstream in tanks:
                    c_up = tank_mass[upstream] / tank_vol[upstream] \
                        if tank_vol[upstream] > 1e-12 else 0.0
                else:
                    c_up = conc[ui]
                di = node_index[downstream]
                inflow_mass[di] += vol * c_up
                inflow_vol[di] += vol
                if upstream in tanks:
                    tank_mass[upstream] -= vol * c_up
                elif upstream in reservoirs:
                    injected += vol * c_up
                else:
                    # junction donors of thin links are budgeted below via
                    # their outflow volume; tally the export here
                    pass

            # 3. junction mixing, sources, withdrawals
            new_conc = conc.copy()
            for jid in junctions:
                i = node_index[jid]
                if inflow_vol[i] > 1e-15:
                    new_conc[i] = guard(inflow_mass[i] / inflow_vol[i])
                src = node_source(jid)
                if src is not None:
                    new_conc[i] = src
                demand_vol = junction_demand.get(jid, 0.0) * qdt
                if demand_vol > 0.0:
                    withdrawn += demand_vol * new_conc[i]
            for rid in reservoirs:
                i = node_index[rid]
                withdrawn += inflow_mass[i]    # absorbed by the boundary
                new_conc[i] = node_source(rid) or 0.0

            # 4. tanks: outflow already removed; add arrivals, track volume
            for tid, tank in tanks.items():
                i = node_index[tid]
                tank_mass[tid] += inflow_mass[i]
                tank_vol[tid] += tank_inflow.get(tid, 0.0) * qdt
                tank_vol[tid] = max(tank_vol[tid], 0.0)
                src = node_source(tid)
                if src is not None:
                    target = src * tank_vol[tid]
                    injected += target - tank_mass[tid]
                    tank_mass[tid] = target
                new_conc[i] = guard(tank_mass[tid] / tank_vol[tid]) \
                    if tank_vol[tid] > 1e-12 else 0.0

            # 5. inject new parcels at upstream ends
            for pid in pipe_ids:
                q = flows[link_index[pid]]
                if q == 0.0:
                    continue
                pipe = network.pipes[pid]
                vol = abs(q) * qdt
                upstream = pipe.from_node if q > 0 else pipe.to_node
                ui = node_index[upstream]
                if upstream in tanks:
                    c_in = tank_mass[upstream] / tank_vol[upstream] \
                        if tank_vol[upstream] > 1e-12 else 0.0
                    tank_mass[upstream] -= vol * c_in
                elif upstream in reservoirs:
                    c_in = new_conc[ui]
                    injected += vol * c_in
                else:
                    c_in = new_conc[ui]
                segs = segments[pid]
                if q > 0:
                    segs.insert(0, [vol, c_in])
                else:
                    segs.append([vol, c_in])
                _merge(segs)

            # junction outflow budget: mass leaves junctions through parcel
            # injection at their concentration; hydraulic balance makes the
            # node massless, so nothing further to tally here
            conc = new_conc

        stored = sum(seg[0] * seg[1] for segs in segments.values() for seg in segs)
        stored += sum(tank_mass.values())
        snapshot = {pid: tuple((s[0], s[1]) for s in segments[pid])
                    for pid in pipe_ids}
        conc_out = conc.copy()
        conc_out.flags.writeable = False
        out.append(QualityState(
            t=state.t, node_concentration=conc_out, pipe_segments=snapshot,
            stored_mass=stored, injected_mass=injected,
            withdrawn_mass=withdrawn, decayed_mass=decayed))
    return out
