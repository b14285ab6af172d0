"""Immutable data model of a water distribution network.

All quantities are strict SI: lengths and heads in m, flows in m3/s,
times in s. Roughness is the dimensionless Hazen-Williams C.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace

__all__ = [
    "Junction", "Reservoir", "Tank", "Pipe", "Pump", "Valve",
    "Pattern", "Curve", "SimOptions", "Network", "Violation",
    "Incidence", "validate", "incidence", "pattern_value",
    "expand_pump_curve", "networks_close",
]


@dataclass(frozen=True)
class Junction:
    id: str
    elevation: float
    base_demand: float = 0.0
    demand_pattern_id: str | None = None


@dataclass(frozen=True)
class Reservoir:
    id: str
    head: float
    head_pattern_id: str | None = None


@dataclass(frozen=True)
class Tank:
    id: str
    elevation: float
    diameter: float
    init_level: float
    min_level: float
    max_level: float

    @property
    def area(self) -> float:
        return math.pi * (self.diameter / 2.0) ** 2


@dataclass(frozen=True)
class Pipe:
    id: str
    from_node: str
    to_node: str
    length: float
    diameter: float
    roughness: float
    open: bool = True


@dataclass(frozen=True)
class Pump:
    id: str
    from_node: str
    to_node: str
    curve_id: str
    speed: float = 1.0
    running: bool = True


@dataclass(frozen=True)
class Valve:
    id: str
    from_node: str
    to_node: str
    diameter: float
    minor_loss_coef: float = 0.0
    open: bool = True


@dataclass(frozen=True)
class Pattern:
    """Periodic multiplier series; repeats cyclically past its end."""

    id: str
    multipliers: tuple[float, ...]
    step: float = 3600.0


@dataclass(frozen=True)
class Curve:
    """Head curve: points (flow m3/s, head m), strictly increasing in flow."""

    id: str
    points: tuple[tuple[float, float], ...]


@dataclass(frozen=True)
class SimOptions:
    duration_s: int = 86400
    hydraulic_step_s: int = 300
    quality_step_s: int = 60
    pattern_step_s: int = 3600


@dataclass(frozen=True)
class Network:
    """Whole-network container. Modify via dataclasses.replace (copy-on-modify)."""

    junctions: dict[str, Junction] = field(default_factory=dict)
    reservoirs: dict[str, Reservoir] = field(default_factory=dict)
    tanks: dict[str, Tank] = field(default_factory=dict)
    pipes: dict[str, Pipe] = field(default_factory=dict)
    pumps: dict[str, Pump] = field(default_factory=dict)
    valves: dict[str, Valve] = field(default_factory=dict)
    patterns: dict[str, Pattern] = field(default_factory=dict)
    curves: dict[str, Curve] = field(default_factory=dict)
    options: SimOptions = field(default_factory=SimOptions)
    title: str = ""

    def node_ids(self) -> list[str]:
        """Canonical node order: junctions, reservoirs, tanks, each sorted."""
        return (sorted(self.junctions) + sorted(self.reservoirs) + sorted(self.tanks))

    def link_ids(self) -> list[str]:
        """Canonical link order: pipes, pumps, valves, each sorted."""
        return sorted(self.pipes) + sorted(self.pumps) + sorted(self.valves)

    def node(self, node_id: str):
        for group in (self.junctions, self.reservoirs, self.tanks):
            if node_id in group:
                return group[node_id]
        raise KeyError(node_id)

    def link(self, link_id: str):
        for group in (self.pipes, self.pumps, self.valves):
            if link_id in group:
                return group[link_id]
        raise KeyError(link_id)

    def links(self):
        for lid in self.link_ids():
            yield self.link(lid)

    def total_base_demand(self) -> float:
        return sum(j.base_demand for j in self.junctions.values())

    def with_pipe(self, pipe: Pipe) -> "Network":
        pipes = dict(self.pipes)
        pipes[pipe.id] = pipe
        return replace(self, pipes=pipes)


@dataclass(frozen=True)
class Violation:
    element_kind: str
    element_id: str
    message: str

    def __str__(self) -> str:
        return f"{self.element_kind} '{self.element_id}': {self.message}"


def pattern_value(pattern: Pattern | None, t: float) -> float:
    """Multiplier at time t; the pattern repeats cyclically. None means 1.0."""
    if pattern is None:
        return 1.0
    idx = int(t // pattern.step) % len(pattern.multipliers)
    return pattern.multipliers[idx]


def expand_pump_curve(curve: Curve) -> Curve:
    """Expand a single-point curve (Q0, H0) to the standard three-point form.

    Shutoff head 1.33*H0 at zero flow, maximum flow 2*Q0 at zero head.
    Curves with three or more points pass through unchanged.
    """
    if len(curve.points) != 1:
        return curve
    q0, h0 = curve.points[0]
    return Curve(curve.id, ((0.0, 1.33 * h0), (q0, h0), (2.0 * q0, 0.0)))


def _check_finite(value: float) -> bool:
    return isinstance(value, (int, float)) and math.isfinite(value)


def validate(network: Network) -> list[Violation]:
    """Check every element invariant plus graph closure and source reachability.

    Violations are returned, never raised; an empty list means the network
    is well formed.
    """
    out: list[Violation] = []
    add = out.append

    node_ids: set[str] = set()
    for kind, group in (("junction", network.junctions),
                        ("reservoir", network.reservoirs),
                        ("tank", network.tanks)):
        for nid, elem in group.items():
            if nid != elem.id:
                add(Violation(kind, nid, f"keyed as '{nid}' but id is '{elem.id}'"))
            if elem.id in node_ids:
                add(Violation(kind, elem.id, "duplicate node id"))
            node_ids.add(elem.id)

    link_ids: set[str] = set()
    for kind, group in (("pipe", network.pipes),
                        ("pump", network.pumps),
                        ("valve", network.valves)):
        for lid, elem in group.items():
            if lid != elem.id:
                add(Violation(kind, lid, f"keyed as '{lid}' but id is '{elem.id}'"))
            if elem.id in link_ids:
                add(Violation(kind, elem.id, "duplicate link id"))
            link_ids.add(elem.id)

    for j in network.junctions.values():
        if not _check_finite(j.elevation):
            add(Violation("junction", j.id, "elevation not finite"))
        if not _check_finite(j.base_demand) or j.base_demand < 0:
            add(Violation("junction", j.id, "base_demand must be >= 0"))
        if j.demand_pattern_id is not None and j.demand_pattern_id not in network.patterns:
            add(Violation("junction", j.id,
                          f"demand pattern '{j.demand_pattern_id}' not defined"))

    for r in network.reservoirs.values():
        if not _check_finite(r.head):
            add(Violation("reservoir", r.id, "head not finite"))
        if r.head_pattern_id is not None and r.head_pattern_id not in network.patterns:
            add(Violation("reservoir", r.id,
                          f"head pattern '{r.head_pattern_id}' not defined"))

    for tk in network.tanks.values():
        if tk.diameter <= 0:
            add(Violation("tank", tk.id, "diameter must be > 0"))
        if not (0 <= tk.min_level <= tk.init_level <= tk.max_level):
            add(Violation("tank", tk.id,
                          "levels must satisfy 0 <= min <= init <= max"))

    def endpoints_ok(kind, elem):
        ok = True
        for attr in ("from_node", "to_node"):
            ref = getattr(elem, attr)
            if ref not in node_ids:
                add(Violation(kind, elem.id, f"{attr} '{ref}' does not exist"))
                ok = False
        return ok

    for p in network.pipes.values():
        endpoints_ok("pipe", p)
        if p.length <= 0:
            add(Violation("pipe", p.id, "length must be > 0"))
        if p.diameter <= 0:
            add(Violation("pipe", p.id, "diameter must be > 0"))
        if p.roughness <= 0:
            add(Violation("pipe", p.id, "roughness must be > 0"))

    for pu in network.pumps.values():
        endpoints_ok("pump", pu)
        if pu.curve_id not in network.curves:
            add(Violation("pump", pu.id, f"curve '{pu.curve_id}' not defined"))
        if pu.speed < 0:
            add(Violation("pump", pu.id, "speed must be >= 0"))

    for v in network.valves.values():
        endpoints_ok("valve", v)
        if v.diameter <= 0:
            add(Violation("valve", v.id, "diameter must be > 0"))
        if v.minor_loss_coef < 0:
            add(Violation("valve", v.id, "minor_loss_coef must be >= 0"))

    for pat in network.patterns.values():
        if not pat.multipliers:
            add(Violation("pattern", pat.id, "must have at least one multiplier"))
        elif any(m < 0 for m in pat.multipliers):
            add(Violation("pattern", pat.id, "multipliers must be >= 0"))
        if pat.step <= 0:
            add(Violation("pattern", pat.id, "step must be > 0"))

    for c in network.curves.values():
        if not c.points:
            add(Violation("curve", c.id, "must have at least one point"))
            continue
        flows = [q for q, _ in c.points]
        heads = [h for _, h in c.points]
        if any(b <= a for a, b in zip(flows, flows[1:])):
            add(Violation("curve", c.id, "flows must be strictly increasing"))
        if any(b > a for a, b in zip(heads, heads[1:])):
            add(Violation("curve", c.id, "heads must be non-increasing"))

    sources = set(network.reservoirs) | set(network.tanks)
    if not sources:
        add(Violation("network", "", "no head source (reservoir or tank)"))
    elif not out:
        # Reachability only meaningful once the graph is closed.
        adjacent: dict[str, list[str]] = {nid: [] for nid in node_ids}
        for elem in network.links():
            adjacent[elem.from_node].append(elem.to_node)
            adjacent[elem.to_node].append(elem.from_node)
        seen = set(sources)
        stack = list(sources)
        while stack:
            for nxt in adjacent[stack.pop()]:
                if nxt not in seen:
                    seen.add(nxt)
                    stack.append(nxt)
        for j in network.junctions.values():
            if j.base_demand > 0 and j.id not in seen:
                add(Violation("junction", j.id, "demand node unreachable from any head source"))

    return out


@dataclass(frozen=True)
class Incidence:
    """Node/link indexing in canonical order plus orientation signs.

    For link j from node a to node b, node a carries (j, -1) and node b
    carries (j, +1); positive flow leaves a and enters b.
    """

    node_ids: tuple[str, ...]
    link_ids: tuple[str, ...]
    node_index: dict[str, int]
    link_index: dict[str, int]
    link_nodes: tuple[tuple[int, int], ...]           # (from_idx, to_idx) per link
    node_links: tuple[tuple[tuple[int, int], ...], ...]  # per node: (link_idx, sign)


def incidence(network: Network) -> Incidence:
    """Build the node-link incidence structure; rejects invalid networks."""
    violations = validate(network)
    if violations:
        dangling = [v for v in violations if "does not exist" in v.message
                    or "not defined" in v.message]
        if dangling:
            from .errors import DanglingReferenceError
            raise DanglingReferenceError("; ".join(str(v) for v in dangling))
        from .errors import InvalidNetworkError
        raise InvalidNetworkError(violations)

    node_ids = tuple(network.node_ids())
    link_ids = tuple(network.link_ids())
    node_index = {nid: i for i, nid in enumerate(node_ids)}
    link_index = {lid: i for i, lid in enumerate(link_ids)}

    link_nodes = []
    node_links: list[list[tuple[int, int]]] = [[] for _ in node_ids]
    for j, lid in enumerate(link_ids):
        elem = network.link(lid)
        a = node_index[elem.from_node]
        b = node_index[elem.to_node]
        link_nodes.append((a, b))
        node_links[a].append((j, -1))
        node_links[b].append((j, +1))

    return Incidence(
        node_ids=node_ids,
        link_ids=link_ids,
        node_index=node_index,
        link_index=link_index,
        link_nodes=tuple(link_nodes),
        node_links=tuple(tuple(entries) for entries in node_links),
    )


def _close(a: float, b: float, rtol: float) -> bool:
    if a == b:
        return True
    return abs(a - b) <= rtol * max(abs(a), abs(b), 1e-30)


def networks_close(a: Network, b: Network, rtol: float = 1e-9) -> bool:
    """Structural equality up to a relative tolerance on every float field."""
    for attr in ("junctions", "reservoirs", "tanks", "pipes", "pumps",
                 "valves", "patterns", "curves"):
        ga, gb = getattr(a, attr), getattr(b, attr)
        if set(ga) != set(gb):
            return False
        for key, ea in ga.items():
            eb = gb[key]
            if type(ea) is not type(eb):
                return False
            for fname in ea.__dataclass_fields__:
                va, vb = getattr(ea, fname), getattr(eb, fname)
                if isinstance(va, float) and isinstance(vb, float):
                    if not _close(va, vb, rtol):
                        return False
                elif isinstance(va, tuple) and va and isinstance(va[0], tuple):
                    if len(va) != len(vb):
                        return False
                    for pa, pb in zip(va, vb):
                        if not all(_close(x, y, rtol) for x, y in zip(pa, pb)):
                            return False
                elif isinstance(va, tuple):
                    if len(va) != len(vb):
                        return False
                    if not all(_close(float(x), float(y), rtol) for x, y in zip(va, vb)):
                        return False
                elif va != vb:
                    return False
    return a.options == b.options
