"""Demand-driven extended-period hydraulic simulation.

Each timestep is a quasi-steady snapshot solved with a Newton scheme on the
nodal head equations (global gradient style): link relations are linearized
around the current flow iterate, the resulting Laplacian system is solved for
unknown heads, and flows are updated from the new head differences. Tanks are
fixed-head nodes within a snapshot; their levels are integrated with explicit
Euler between snapshots.
"""

from __future__ import annotations

import hashlib
import math
from collections import deque
from dataclasses import dataclass, field

import numpy as np

from .errors import (
    CurveFitError,
    DisconnectedDemandError,
    NonConvergenceError,
)
from .network import Curve, Network, Tank, expand_pump_curve, pattern_value

__all__ = [
    "G", "HW_EXP", "HW_COEF", "Q_LAMINAR", "MASS_TOL", "ENERGY_TOL",
    "EMITTER_HMIN", "SolverSettings", "Controls", "baseline_controls",
    "HydraulicState", "StateSeries", "hazen_williams_headloss",
    "fit_pump_curve", "pump_head_gain", "solve_snapshot", "tank_step",
    "EpsEngine", "simulate_hydraulics",
]

G = 9.80665                 # m/s^2
HW_EXP = 1.852
HW_COEF = 10.667            # SI Hazen-Williams prefactor
Q_LAMINAR = 1e-8            # m3/s; below this the headloss law is linearized
MASS_TOL = 1e-6             # m3/s
ENERGY_TOL = 1e-6           # m
EMITTER_HMIN = 1e-6         # m; emitter law linearized below this head
GRAD_MIN = 1e-6             # floor on link gradients (caps conductance at 1e6)
GRAD_REVERSE = 1e8          # penalty gradient blocking reverse pump flow
VALVE_Q_LINEAR = 1e-4       # m3/s; valve quadratic loss linearized below this
COLD_START_FLOW = 1e-3      # m3/s
STAGNATION_REL = 1e-13      # extra Newton polish target after convergence
POLISH_LIMIT = 10


@dataclass(frozen=True)
class SolverSettings:
    accuracy: float = 1e-3
    max_iterations: int = 100
    damping: float = 1.0


@dataclass(frozen=True)
class Controls:
    """Runtime link statuses; ids absent from the maps keep network defaults."""

    pipe_open: dict[str, bool] = field(default_factory=dict)
    pump_running: dict[str, bool] = field(default_factory=dict)
    pump_speed: dict[str, float] = field(default_factory=dict)
    valve_open: dict[str, bool] = field(default_factory=dict)


def baseline_controls(network: Network) -> Controls:
    return Controls(
        pipe_open={p.id: p.open for p in network.pipes.values()},
        pump_running={p.id: p.running for p in network.pumps.values()},
        pump_speed={p.id: p.speed for p in network.pumps.values()},
        valve_open={v.id: v.open for v in network.valves.values()},
    )


@dataclass(frozen=True, eq=False)
class HydraulicState:
    """One converged snapshot; array layouts follow the canonical id orders."""

    t: float
    flow: np.ndarray            # per link, signed by from->to orientation
    head: np.ndarray            # per node
    pressure_head: np.ndarray   # per junction: head - elevation
    tank_level: np.ndarray      # per tank, level at t (before integration)
    actual_demand: np.ndarray   # per junction
    tank_net_inflow: np.ndarray  # per tank, m3/s
    leak_flow: dict[str, float]  # emitter junction id -> discharge
    iterations: int
    converged: bool


@dataclass(frozen=True, eq=False)
class StateSeries:
    node_ids: tuple[str, ...]
    link_ids: tuple[str, ...]
    junction_ids: tuple[str, ...]
    tank_ids: tuple[str, ...]
    states: tuple[HydraulicState, ...]
    config_digest: str = ""

    @property
    def step_s(self) -> float:
        if len(self.states) > 1:
            return self.states[1].t - self.states[0].t
        return 0.0

    def digest(self) -> str:
        """Bitwise fingerprint of every state array, for determinism checks."""
        h = hashlib.sha256()
        for s in self.states:
            h.update(np.float64(s.t).tobytes())
            for arr in (s.flow, s.head, s.pressure_head, s.tank_level,
                        s.actual_demand):
                h.update(arr.tobytes())
        return h.hexdigest()


def hazen_williams_headloss(flow: float, length: float, diameter: float,
                            roughness: float) -> float:
    """Signed Hazen-Williams loss h = sign(Q) 10.667 L |Q|^1.852 / (C^1.852 D^4.871)."""
    r = HW_COEF * length / (roughness ** HW_EXP * diameter ** 4.871)
    return math.copysign(r * abs(flow) ** HW_EXP, flow) if flow else 0.0


def fit_pump_curve(curve: Curve) -> tuple[float, float, float]:
    """Fit H = h0 - r Q^n through a 1- or 3-point head curve.

    Single points are first expanded to the conventional three-point form.
    """
    pts = expand_pump_curve(curve).points
    if len(pts) != 3:
        raise CurveFitError(
            f"pump curve '{curve.id}' needs 1 or 3 points, has {len(pts)}")
    (q1, h1), (q2, h2), (q3, h3) = pts
    if q1 != 0.0:
        raise CurveFitError(f"pump curve '{curve.id}' must start at zero flow")
    h0 = h1
    if not (h0 > h2 > h3 and 0 < q2 < q3):
        raise CurveFitError(
            f"pump curve '{curve.id}' must have strictly decreasing head")
    n = math.log((h0 - h3) / (h0 - h2)) / math.log(q3 / q2)
    r = (h0 - h2) / q2 ** n
    if not (n > 0 and r > 0 and h0 > 0):
        raise CurveFitError(f"pump curve '{curve.id}' fit degenerate")
    return h0, r, n


def pump_head_gain(curve: Curve, flow: float, speed: float) -> float:
    """Head added by a pump at the given flow and relative speed (>= 0 m)."""
    if speed == 0.0:
        return 0.0
    h0, r, n = fit_pump_curve(curve)
    gain = speed ** 2 * (h0 - r * (flow / speed) ** n)
    return max(gain, 0.0)


def tank_step(tank: Tank, level: float, net_inflow: float, dt: float) -> float:
    """Explicit Euler level update, clamped to the tank's level bounds."""
    level2 = level + net_inflow * dt / tank.area
    return min(max(level2, tank.min_level), tank.max_level)


# --- snapshot solver ---------------------------------------------------------

class _Layout:
    """Canonical index maps for one network, shared across snapshots."""

    def __init__(self, network: Network):
        self.network = network
        self.node_ids = tuple(network.node_ids())
        self.link_ids = tuple(network.link_ids())
        self.junction_ids = tuple(sorted(network.junctions))
        self.tank_ids = tuple(sorted(network.tanks))
        self.reservoir_ids = tuple(sorted(network.reservoirs))
        self.node_index = {n: i for i, n in enumerate(self.node_ids)}
        self.n_junctions = len(self.junction_ids)

        self.link_from = np.array(
            [self.node_index[network.link(l).from_node] for l in self.link_ids],
            dtype=np.intp)
        self.link_to = np.array(
            [self.node_index[network.link(l).to_node] for l in self.link_ids],
            dtype=np.intp)
        # kind codes: 0 pipe, 1 pump, 2 valve
        kinds = []
        r_coef = []
        for lid in self.link_ids:
            elem = network.link(lid)
            if lid in network.pipes:
                kinds.append(0)
                r_coef.append(HW_COEF * elem.length
                              / (elem.roughness ** HW_EXP * elem.diameter ** 4.871))
            elif lid in network.pumps:
                kinds.append(1)
                r_coef.append(0.0)
            else:
                kinds.append(2)
                area = math.pi * (elem.diameter / 2.0) ** 2
                r_coef.append(max(elem.minor_loss_coef / (2.0 * G * area * area),
                                  GRAD_MIN))
        self.kind = np.array(kinds, dtype=np.intp)
        self.r_coef = np.array(r_coef)
        self.pump_fit = {lid: fit_pump_curve(network.curves[network.pumps[lid].curve_id])
                         for lid in network.pumps}
        # elevation-like height per node, used for island head assignment
        elev = []
        for nid in self.node_ids:
            node = network.node(nid)
            elev.append(node.head if nid in network.reservoirs else node.elevation)
        self.node_elev = np.array(elev)


def _active_mask(layout: _Layout, controls: Controls,
                 closed_tanks: frozenset[str]) -> tuple[np.ndarray, np.ndarray]:
    """Per-link open mask and per-pump effective speed under the controls."""
    net = layout.network
    active = np.ones(len(layout.link_ids), dtype=bool)
    speed = np.zeros(len(layout.link_ids))
    for j, lid in enumerate(layout.link_ids):
        k = layout.kind[j]
        if k == 0:
            active[j] = controls.pipe_open.get(lid, net.pipes[lid].open)
        elif k == 1:
            pump = net.pumps[lid]
            running = controls.pump_running.get(lid, pump.running)
            w = controls.pump_speed.get(lid, pump.speed)
            speed[j] = w if running else 0.0
            active[j] = running and w > 0.0
        else:
            active[j] = controls.valve_open.get(lid, net.valves[lid].open)
    if closed_tanks:
        for j in range(len(layout.link_ids)):
            if layout.node_ids[layout.link_from[j]] in closed_tanks \
                    or layout.node_ids[layout.link_to[j]] in closed_tanks:
                active[j] = False
    return active, speed


def _reachable(layout: _Layout, active: np.ndarray,
               source_idx: list[int]) -> np.ndarray:
    n = len(layout.node_ids)
    adj: list[list[int]] = [[] for _ in range(n)]
    for j in np.flatnonzero(active):
        a, b = layout.link_from[j], layout.link_to[j]
        adj[a].append(b)
        adj[b].append(a)
    seen = np.zeros(n, dtype=bool)
    queue = deque(sorted(source_idx))
    seen[list(source_idx)] = True
    while queue:
        u = queue.popleft()
        for v in adj[u]:
            if not seen[v]:
                seen[v] = True
                queue.append(v)
    return seen


def _cold_start(layout: _Layout, active: np.ndarray, source_idx: list[int],
                source_head: dict[int, float]) -> tuple[np.ndarray, np.ndarray]:
    """BFS initial guess: heads from the nearest source, flows toward demand."""
    n = len(layout.node_ids)
    dist = np.full(n, np.inf)
    head0 = np.zeros(n)
    queue = deque()
    for s in sorted(source_idx):
        dist[s] = 0.0
        head0[s] = source_head[s]
        queue.append(s)
    adj: list[list[int]] = [[] for _ in range(n)]
    for j in np.flatnonzero(active):
        a, b = layout.link_from[j], layout.link_to[j]
        adj[a].append(b)
        adj[b].append(a)
    for lst in adj:
        lst.sort()
    while queue:
        u = queue.popleft()
        for v in adj[u]:
            if not np.isfinite(dist[v]):
                dist[v] = dist[u] + 1
                head0[v] = head0[u]
                queue.append(v)
    q0 = np.zeros(len(layout.link_ids))
    for j in np.flatnonzero(active):
        a, b = layout.link_from[j], layout.link_to[j]
        if layout.kind[j] == 1:
            q0[j] = COLD_START_FLOW
        else:
            q0[j] = COLD_START_FLOW if dist[a] <= dist[b] else -COLD_START_FLOW
    return q0, head0


def _link_linearization(layout: _Layout, act_idx: np.ndarray, q: np.ndarray,
                        speed: np.ndarray):
    """Headloss h(q) and gradient dh/dq per active link, with safe floors."""
    h = np.zeros(len(act_idx))
    g = np.zeros(len(act_idx))
    kind = layout.kind[act_idx]
    r = layout.r_coef[act_idx]
    absq = np.abs(q)

    pipe = kind == 0
    if pipe.any():
        rp, qp = r[pipe], absq[pipe]
        grad = HW_EXP * rp * np.maximum(qp, Q_LAMINAR) ** (HW_EXP - 1.0)
        lam = qp < Q_LAMINAR
        hp = np.sign(q[pipe]) * rp * qp ** HW_EXP
        hp[lam] = (grad * q[pipe])[lam]
        h[pipe], g[pipe] = hp, grad

    valve = kind == 2
    if valve.any():
        rv, qv = r[valve], absq[valve]
        grad = 2.0 * rv * np.maximum(qv, VALVE_Q_LINEAR)
        lin = qv < VALVE_Q_LINEAR
        hv = rv * q[valve] * qv
        hv[lin] = (grad * q[valve])[lin]
        h[valve], g[valve] = hv, grad

    for i in np.flatnonzero(kind == 1):
        lid = layout.link_ids[act_idx[i]]
        h0, rr, n = layout.pump_fit[lid]
        w = speed[act_idx[i]]
        a = w * w * h0
        b = rr * w ** (2.0 - n)
        qi = q[i]
        if qi <= 0.0:
            h[i] = -a + GRAD_REVERSE * qi
            g[i] = GRAD_REVERSE
        else:
            h[i] = -a + b * qi ** n
            g[i] = n * b * max(qi, 1e-6) ** (n - 1.0)

    np.maximum(g, GRAD_MIN, out=g)
    return h, g


def solve_snapshot(network: Network, demands: dict[str, float],
                   controls: Controls | None = None,
                   settings: SolverSettings | None = None, *,
                   emitters: dict[str, float] | None = None,
                   tank_levels: dict[str, float] | None = None,
                   t: float = 0.0,
                   _layout: _Layout | None = None) -> HydraulicState:
    """Solve one quasi-steady snapshot.

    demands: junction id -> m3/s (already pattern-scaled). emitters: junction
    id -> orifice coefficient k with discharge q = k sqrt(max(pressure head, 0)).
    Tanks at a level bound that the solution keeps pushing against are closed
    and the snapshot re-solved.
    """
    layout = _layout if _layout is not None else _Layout(network)
    controls = controls if controls is not None else baseline_controls(network)
    settings = settings or SolverSettings()
    emitters = emitters or {}
    levels = {tid: network.tanks[tid].init_level for tid in layout.tank_ids}
    if tank_levels:
        levels.update(tank_levels)

    closed_tanks: frozenset[str] = frozenset()
    for _ in range(len(layout.tank_ids) + 1):
        state = _solve_once(layout, demands, controls, settings, emitters,
                            levels, t, closed_tanks)
        violators = set()
        for i, tid in enumerate(layout.tank_ids):
            if tid in closed_tanks:
                continue
            tank = network.tanks[tid]
            level = levels[tid]
            inflow = state.tank_net_inflow[i]
            if (level >= tank.max_level and inflow > MASS_TOL) or \
                    (level <= tank.min_level and inflow < -MASS_TOL):
                violators.add(tid)
        if not violators:
            return state
        closed_tanks = closed_tanks | violators
    return state


def _solve_once(layout: _Layout, demands: dict[str, float], controls: Controls,
                settings: SolverSettings, emitters: dict[str, float],
                levels: dict[str, float], t: float,
                closed_tanks: frozenset[str]) -> HydraulicState:
    net = layout.network
    n_nodes = len(layout.node_ids)
    n_junc = layout.n_junctions

    active, speed = _active_mask(layout, controls, closed_tanks)

    # fixed-head nodes: reservoirs (pattern-scaled) and open tanks
    fixed_head: dict[int, float] = {}
    for rid in layout.reservoir_ids:
        res = net.reservoirs[rid]
        mult = pattern_value(net.patterns.get(res.head_pattern_id), t) \
            if res.head_pattern_id else 1.0
        fixed_head[layout.node_index[rid]] = res.head * mult
    for tid in layout.tank_ids:
        idx = layout.node_index[tid]
        if tid not in closed_tanks:
            fixed_head[idx] = net.tanks[tid].elevation + levels[tid]

    demand_arr = np.zeros(n_nodes)
    for i, jid in enumerate(layout.junction_ids):
        demand_arr[i] = demands.get(jid, 0.0)
    emit_k = np.zeros(n_nodes)
    for jid, k in emitters.items():
        emit_k[layout.node_index[jid]] = k

    source_idx = sorted(fixed_head)
    reach = _reachable(layout, active, source_idx)

    for i in range(n_junc):
        if not reach[i]:
            if demand_arr[i] > 0.0:
                raise DisconnectedDemandError(
                    f"junction '{layout.junction_ids[i]}' has demand but no open"
                    " path to a reservoir or tank")
            if emit_k[i] > 0.0:
                raise DisconnectedDemandError(
                    f"leak at '{layout.junction_ids[i]}' has no open path to a"
                    " reservoir or tank")

    act_idx = np.flatnonzero(active & reach[layout.link_from])
    a_from = layout.link_from[act_idx]
    a_to = layout.link_to[act_idx]

    # unknown-head nodes: reachable and not fixed
    is_fixed = np.zeros(n_nodes, dtype=bool)
    is_fixed[source_idx] = True
    unknown = np.flatnonzero(reach & ~is_fixed)
    u_of_node = np.full(n_nodes, -1, dtype=np.intp)
    u_of_node[unknown] = np.arange(len(unknown))
    n_u = len(unknown)

    head = np.zeros(n_nodes)
    # unreachable islands: one shared head per component (max height), so
    # zero-flow links stay energy-consistent
    if not reach.all():
        unseen = ~reach
        adj: list[list[int]] = [[] for _ in range(n_nodes)]
        for j in np.flatnonzero(active):
            a, b = layout.link_from[j], layout.link_to[j]
            adj[a].append(b)
            adj[b].append(a)
        visited = np.zeros(n_nodes, dtype=bool)
        for start in np.flatnonzero(unseen):
            if visited[start]:
                continue
            comp = [start]
            visited[start] = True
            queue = deque([start])
            while queue:
                u = queue.popleft()
                for v in adj[u]:
                    if unseen[v] and not visited[v]:
                        visited[v] = True
                        comp.append(v)
                        queue.append(v)
            comp_head = max(layout.node_elev[c] for c in comp)
            for c in comp:
                head[c] = comp_head
    for tid in closed_tanks:
        head[layout.node_index[tid]] = net.tanks[tid].elevation + levels[tid]

    q_act, head0 = _cold_start(layout, active & reach[layout.link_from],
                               source_idx, fixed_head)
    q = q_act[act_idx]
    head[list(fixed_head)] = [fixed_head[i] for i in fixed_head]
    head[unknown] = head0[unknown]

    uf = u_of_node[a_from]
    ut = u_of_node[a_to]
    pipes_mask = layout.kind[act_idx] == 0
    r_pipes = layout.r_coef[act_idx][pipes_mask]

    lam = settings.damping
    prev_change = math.inf
    rises = 0
    converged_at = -1
    iterations = 0
    mass_res = math.inf
    energy_res = math.inf

    while iterations < settings.max_iterations:
        iterations += 1
        h, g = _link_linearization(layout, act_idx, q, speed)
        c = 1.0 / g
        y = q - h * c

        big_m = np.zeros((n_u, n_u))
        rhs = -demand_arr[unknown].copy() if n_u else np.zeros(0)
        diag = np.zeros(n_u)

        mu = uf >= 0
        mv = ut >= 0
        np.add.at(diag, uf[mu], c[mu])
        np.add.at(diag, ut[mv], c[mv])
        both = mu & mv
        np.add.at(big_m, (uf[both], ut[both]), -c[both])
        np.add.at(big_m, (ut[both], uf[both]), -c[both])
        np.add.at(rhs, uf[mu], -y[mu])
        np.add.at(rhs, ut[mv], y[mv])
        fb = mu & ~mv   # from unknown, to fixed
        np.add.at(rhs, uf[fb], c[fb] * head[a_to[fb]])
        bf = ~mu & mv
        np.add.at(rhs, ut[bf], c[bf] * head[a_from[bf]])

        # emitters: q_e = k sqrt(max(h_press, 0)), linearized on the diagonal
        if emit_k.any():
            for node in np.flatnonzero(emit_k):
                u = u_of_node[node]
                if u < 0:
                    continue
                k = emit_k[node]
                press = head[node] - layout.node_elev[node]
                if press > EMITTER_HMIN:
                    q0 = k * math.sqrt(press)
                    ge = k / (2.0 * math.sqrt(press))
                elif press > 0.0:
                    ge = k / math.sqrt(EMITTER_HMIN)
                    q0 = ge * press
                else:
                    q0 = 0.0
                    ge = 0.0
                diag[u] += ge
                rhs[u] += ge * head[node] - q0

        if n_u:
            big_m[np.diag_indices(n_u)] = diag
            if n_u > 400:
                from scipy.sparse import csr_matrix
                from scipy.sparse.linalg import spsolve
                h_u = spsolve(csr_matrix(big_m), rhs)
            else:
                h_u = np.linalg.solve(big_m, rhs)
            head[unknown] = h_u

        dh = head[a_from] - head[a_to]
        q_new = y + c * dh
        if lam < 1.0:
            q_new = q + lam * (q_new - q)

        change = np.abs(q_new - q).sum()
        total = max(np.abs(q_new).sum(), 1e-12)
        rel = change / total
        q = q_new

        # oscillation guard: two consecutive rises in the change norm
        if change > prev_change:
            rises += 1
            if rises >= 2 and converged_at < 0:
                lam = max(lam * 0.5, 0.125)
                rises = 0
        else:
            rises = 0
        prev_change = change

        # residuals with the updated flows and heads
        balance = np.zeros(n_nodes)
        np.add.at(balance, a_from, -q)
        np.add.at(balance, a_to, q)
        press_u = head[unknown] - layout.node_elev[unknown]
        exact_emit = emit_k[unknown] * np.sqrt(np.maximum(press_u, 0.0))
        mass = balance[unknown] - demand_arr[unknown] - exact_emit
        mass_res = np.abs(mass).max() if n_u else 0.0
        if pipes_mask.any():
            qp = q[pipes_mask]
            hp_true = np.sign(qp) * r_pipes * np.abs(qp) ** HW_EXP
            energy_res = np.abs(dh[pipes_mask] - hp_true).max()
        else:
            energy_res = 0.0

        if converged_at < 0:
            if rel <= settings.accuracy and mass_res <= MASS_TOL \
                    and energy_res <= ENERGY_TOL:
                converged_at = iterations
                lam = 1.0
        else:
            if rel <= STAGNATION_REL or iterations - converged_at >= POLISH_LIMIT:
                break

    if converged_at < 0:
        raise NonConvergenceError(iterations, max(mass_res, energy_res), t)

    flow_full = np.zeros(len(layout.link_ids))
    flow_full[act_idx] = q

    tank_inflow = np.zeros(len(layout.tank_ids))
    balance = np.zeros(n_nodes)
    np.add.at(balance, a_from, -q)
    np.add.at(balance, a_to, q)
    for i, tid in enumerate(layout.tank_ids):
        tank_inflow[i] = balance[layout.node_index[tid]]

    leak_flow = {}
    for node in np.flatnonzero(emit_k):
        press = head[node] - layout.node_elev[node]
        leak_flow[layout.node_ids[node]] = \
            emit_k[node] * math.sqrt(press) if press > 0.0 else 0.0

    pressure = head[:n_junc] - layout.node_elev[:n_junc]
    level_arr = np.array([levels[tid] for tid in layout.tank_ids])

    for arr in (flow_full, head, pressure, level_arr, tank_inflow):
        arr.flags.writeable = False
    demand_out = demand_arr[:n_junc].copy()
    demand_out.flags.writeable = False

    return HydraulicState(
        t=t, flow=flow_full, head=head, pressure_head=pressure,
        tank_level=level_arr, actual_demand=demand_out,
        tank_net_inflow=tank_inflow, leak_flow=leak_flow,
        iterations=iterations, converged=True)


# --- extended-period engine --------------------------------------------------

class EpsEngine:
    """Stepwise extended-period runner shared by batch simulation and the
    control environment, so both produce identical arithmetic.

    control_hook(t) -> Controls or None; emitter_hook(t) -> {junction: k} or None.
    """

    def __init__(self, network: Network, settings: SolverSettings | None = None,
                 duration_s: int | None = None, step_s: int | None = None,
                 control_hook=None, emitter_hook=None):
        self.network = network
        self.settings = settings or SolverSettings()
        opt = network.options
        self.duration_s = opt.duration_s if duration_s is None else duration_s
        self.step_s = opt.hydraulic_step_s if step_s is None else step_s
        if self.step_s <= 0 or self.duration_s % self.step_s != 0:
            raise ValueError("duration must be a positive multiple of the"
                             " hydraulic time step")
        self.total_steps = self.duration_s // self.step_s
        self.control_hook = control_hook
        self.emitter_hook = emitter_hook
        self.layout = _Layout(network)
        self._baseline = baseline_controls(network)
        self.step_index = 0
        self.tank_levels = {tid: network.tanks[tid].init_level
                            for tid in self.layout.tank_ids}

    def demands_at(self, t: float) -> dict[str, float]:
        out = {}
        for jid in self.layout.junction_ids:
            j = self.network.junctions[jid]
            mult = pattern_value(self.network.patterns.get(j.demand_pattern_id), t) \
                if j.demand_pattern_id else 1.0
            out[jid] = j.base_demand * mult
        return out

    def step_once(self, controls: Controls | None = None) -> HydraulicState:
        """Solve the snapshot at the current time, then integrate tank levels."""
        if self.step_index >= self.total_steps:
            raise IndexError("simulation horizon already reached")
        t = float(self.step_index * self.step_s)
        if controls is None:
            controls = self.control_hook(t) if self.control_hook else None
        if controls is None:
            controls = self._baseline
        emitters = self.emitter_hook(t) if self.emitter_hook else None
        try:
            state = solve_snapshot(
                self.network, self.demands_at(t), controls, self.settings,
                emitters=emitters, tank_levels=self.tank_levels, t=t,
                _layout=self.layout)
        except NonConvergenceError as exc:
            raise NonConvergenceError(exc.iterations, exc.residual, t) from None
        for i, tid in enumerate(self.layout.tank_ids):
            self.tank_levels[tid] = tank_step(
                self.network.tanks[tid], self.tank_levels[tid],
                float(state.tank_net_inflow[i]), float(self.step_s))
        self.step_index += 1
        return state

    def run(self, config_digest: str = "") -> StateSeries:
        states = [self.step_once() for _ in range(self.total_steps)]
        return StateSeries(
            node_ids=self.layout.node_ids, link_ids=self.layout.link_ids,
            junction_ids=self.layout.junction_ids, tank_ids=self.layout.tank_ids,
            states=tuple(states), config_digest=config_digest)


def simulate_hydraulics(network: Network, *, duration_s: int | None = None,
                        hydraulic_step_s: int | None = None,
                        settings: SolverSettings | None = None,
                        control_hook=None, emitter_hook=None,
                        config_digest: str = "") -> StateSeries:
    """Run a full extended-period simulation over the network's horizon."""
    engine = EpsEngine(network, settings, duration_s, hydraulic_step_s,
                       control_hook, emitter_hook)
    return engine.run(config_digest)
