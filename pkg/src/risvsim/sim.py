"""Scenario configuration and the fixed-tick simulation loop.

Each tick advances every vehicle, re-derives the pose of mounted panels and
evaluates all configured links in config order. Nothing here is random, so
identical configs always yield identical logs.
"""
from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Iterable, Optional, Sequence

from .channel import RadioParams, evaluate_link
from .errors import ConfigError, GeometryError, TraceFormatError, Unreachable
from .geometry import Building, Polygon2D, RoadGraph, Vec3, World, ground_height, place_buildings
from .ingest import GeoProjection, build_road_graph, load_dem_file, load_osm_file
from .mobility import (DEFAULT_TICK, GroundMotionParams, NodeKind, RoutePlan, UavFollowerParams,
                       VehicleState, ground_state, shortest_route, step_ground, step_uav_follower,
                       uav_state)
from .ris import MountSpec, RisPanel, mounted_panel

DEPLOYMENTS = ("none", "static", "static+uav")

SAMPLE_COLUMNS = ("t", "link_id", "condition", "selected_kind", "selected_panel",
                  "path_loss_db", "direct_d3d_m")
TRACE_COLUMNS = ("t", "node_id", "x", "y", "z")


# -- configuration -----------------------------------------------------------

@dataclass(frozen=True)
class StaticNode:
    id: str
    position: Vec3


@dataclass(frozen=True)
class GroundNode:
    id: str
    route: tuple[str, ...]  # explicit node sequence, or (from, to) with shortest=True
    shortest: bool = False
    loop: bool = False
    start_offset: float = 0.0
    initial_speed: float = 0.0
    motion: GroundMotionParams = field(default_factory=GroundMotionParams)


@dataclass(frozen=True)
class UavNode:
    id: str
    target: str
    align_to: str
    params: UavFollowerParams = field(default_factory=UavFollowerParams)


@dataclass(frozen=True)
class StaticPanel:
    id: str
    position: Vec3
    normal: Vec3
    width: float = 0.5
    height: float = 0.5


@dataclass(frozen=True)
class MountedPanel:
    id: str
    mount: MountSpec
    align_to: str
    width: float = 0.5
    height: float = 0.5


@dataclass(frozen=True)
class LinkSpec:
    id: str
    tx: str
    rx: str


@dataclass
class ScenarioConfig:
    world: dict[str, Any] = field(default_factory=dict)
    radio: RadioParams = field(default_factory=RadioParams)
    nodes: list = field(default_factory=list)
    panels: list = field(default_factory=list)
    links: list[LinkSpec] = field(default_factory=list)
    duration: float = 0.0
    tick: float = DEFAULT_TICK
    deployment: str = "static+uav"
    base_dir: Path = field(default_factory=Path.cwd)

    def node(self, node_id: str):
        for n in self.nodes:
            if n.id == node_id:
                return n
        raise ConfigError(f"unknown node {node_id!r}")

    def panel_tier(self, panel) -> str:
        if isinstance(panel, StaticPanel):
            return "static"
        carrier = self.node(panel.mount.carrier)
        return "static" if isinstance(carrier, StaticNode) else "static+uav"

    def active_panels(self, deployment: Optional[str] = None) -> list:
        deployment = deployment or self.deployment
        if deployment not in DEPLOYMENTS:
            raise ConfigError(f"unknown deployment {deployment!r}")
        if deployment == "none":
            return []
        if deployment == "static":
            return [p for p in self.panels if self.panel_tier(p) == "static"]
        return list(self.panels)


def _fields(obj: Any, where: str, required: Sequence[str], optional: Sequence[str] = ()) -> dict:
    if not isinstance(obj, dict):
        raise ConfigError(f"{where}: expected an object")
    unknown = set(obj) - set(required) - set(optional)
    if unknown:
        raise ConfigError(f"{where}: unknown keys {sorted(unknown)}")
    missing = [k for k in required if k not in obj]
    if missing:
        raise ConfigError(f"{where}: missing keys {missing}")
    return obj


def _num(v: Any, where: str) -> float:
    if isinstance(v, bool) or not isinstance(v, (int, float)) or not math.isfinite(v):
        raise ConfigError(f"{where}: expected a finite number, got {v!r}")
    return float(v)


def _vec(v: Any, where: str, dims: int = 3) -> Vec3:
    if not isinstance(v, list) or len(v) not in (dims, 3) or len(v) < 2:
        raise ConfigError(f"{where}: expected a list of {dims} numbers")
    xs = [_num(c, where) for c in v]
    return Vec3(*xs) if len(xs) == 3 else Vec3(xs[0], xs[1], 0.0)


def _build(cls, where: str, **kw):
    try:
        return cls(**kw)
    except (ValueError, GeometryError) as e:
        raise ConfigError(f"{where}: {e}") from e


def parse_config(data: Any, base_dir: Optional[Path] = None) -> ScenarioConfig:
    d = _fields(data, "config", ("nodes", "links", "duration"),
                ("world", "radio", "panels", "tick", "deployment"))
    cfg = ScenarioConfig(base_dir=Path(base_dir) if base_dir else Path.cwd())

    world = _fields(d.get("world", {}), "world", (), ("osm", "projection", "dem", "buildings", "roads"))
    if "osm" in world and "projection" not in world:
        raise ConfigError("world: 'osm' requires 'projection'")
    if "projection" in world:
        _fields(world["projection"], "world.projection", ("lat", "lon"))
    for i, b in enumerate(world.get("buildings", [])):
        _fields(b, f"world.buildings[{i}]", ("id", "footprint", "height"))
    if "roads" in world:
        _fields(world["roads"], "world.roads", ("nodes", "ways"))
    cfg.world = world

    radio = _fields(d.get("radio", {}), "radio", (),
                    ("fc_ghz", "gain_tx", "gain_rx", "h_bs", "h_ut", "link_budget_db"))
    kw = {k: _num(v, f"radio.{k}") for k, v in radio.items()}
    if "link_budget_db" in kw:
        kw["link_budget"] = kw.pop("link_budget_db")
    cfg.radio = _build(RadioParams, "radio", **kw)

    seen: set[str] = set()
    for i, n in enumerate(d["nodes"]):
        where = f"nodes[{i}]"
        if not isinstance(n, dict) or "kind" not in n:
            raise ConfigError(f"{where}: expected an object with 'kind'")
        kind = n["kind"]
        if kind == "static":
            _fields(n, where, ("id", "kind", "position"))
            node = StaticNode(str(n["id"]), _vec(n["position"], where))
        elif kind == "ground":
            _fields(n, where, ("id", "kind", "route"),
                    ("loop", "start_offset", "initial_speed", "motion"))
            route = n["route"]
            if isinstance(route, dict):
                _fields(route, f"{where}.route", ("from", "to"))
                seq, shortest = (str(route["from"]), str(route["to"])), True
            elif isinstance(route, list) and route:
                seq, shortest = tuple(str(r) for r in route), False
            else:
                raise ConfigError(f"{where}.route: expected node list or {{from, to}}")
            motion = _fields(n.get("motion", {}), f"{where}.motion", (),
                             ("v_max", "a_max", "b_max", "corner_speed", "antenna_height"))
            node = GroundNode(
                str(n["id"]), seq, shortest, bool(n.get("loop", False)),
                _num(n.get("start_offset", 0.0), where), _num(n.get("initial_speed", 0.0), where),
                _build(GroundMotionParams, f"{where}.motion",
                       **{k: _num(v, f"{where}.motion.{k}") for k, v in motion.items()}))
            if node.initial_speed < 0:
                raise ConfigError(f"{where}: initial_speed must be >= 0")
        elif kind == "uav":
            _fields(n, where, ("id", "kind", "target", "align_to"), ("altitude", "offset"))
            params = _build(UavFollowerParams, where,
                            altitude=_num(n.get("altitude", 60.0), where),
                            horizontal_offset=_vec(n.get("offset", [0.0, 0.0]), where, 2))
            node = UavNode(str(n["id"]), str(n["target"]), str(n["align_to"]), params)
            if node.target not in seen:
                raise ConfigError(f"{where}: target {node.target!r} must be defined before the UAV")
        else:
            raise ConfigError(f"{where}: unknown node kind {kind!r}")
        if node.id in seen:
            raise ConfigError(f"{where}: duplicate node id {node.id!r}")
        seen.add(node.id)
        cfg.nodes.append(node)
    for n in cfg.nodes:
        if isinstance(n, UavNode) and n.align_to not in seen:
            raise ConfigError(f"uav {n.id}: unknown align_to node {n.align_to!r}")

    pids: set[str] = set()
    for i, p in enumerate(d.get("panels", [])):
        where = f"panels[{i}]"
        if isinstance(p, dict) and "mount" in p:
            _fields(p, where, ("id", "mount"), ("width", "height"))
            m = _fields(p["mount"], f"{where}.mount", ("carrier", "align_to"),
                        ("downtilt_deg", "offset"))
            for ref in (m["carrier"], m["align_to"]):
                if str(ref) not in seen:
                    raise ConfigError(f"{where}: unknown node {ref!r}")
            mount = _build(MountSpec, where, carrier=str(m["carrier"]),
                           downtilt=math.radians(_num(m.get("downtilt_deg", 30.0), where)),
                           offset=_vec(m.get("offset", [0.0, 0.0, 0.0]), where))
            panel = MountedPanel(str(p["id"]), mount, str(m["align_to"]),
                                 _num(p.get("width", 0.5), where), _num(p.get("height", 0.5), where))
        else:
            _fields(p, where, ("id", "position", "normal"), ("width", "height"))
            normal = _vec(p["normal"], where)
            if abs(normal.norm() - 1.0) > 1e-6:
                raise ConfigError(f"{where}: normal must be a unit vector")
            panel = StaticPanel(str(p["id"]), _vec(p["position"], where), normal.unit(),
                                _num(p.get("width", 0.5), where), _num(p.get("height", 0.5), where))
        if not (panel.width > 0 and panel.height > 0):
            raise ConfigError(f"{where}: panel dimensions must be > 0")
        if panel.id in pids:
            raise ConfigError(f"{where}: duplicate panel id {panel.id!r}")
        pids.add(panel.id)
        cfg.panels.append(panel)

    lids: set[str] = set()
    for i, link in enumerate(d["links"]):
        _fields(link, f"links[{i}]", ("id", "tx", "rx"))
        spec = LinkSpec(str(link["id"]), str(link["tx"]), str(link["rx"]))
        for ref in (spec.tx, spec.rx):
            if ref not in seen:
                raise ConfigError(f"links[{i}]: unknown node {ref!r}")
        if spec.tx == spec.rx or spec.id in lids:
            raise ConfigError(f"links[{i}]: invalid or duplicate link")
        lids.add(spec.id)
        cfg.links.append(spec)

    cfg.duration = _num(d["duration"], "duration")
    cfg.tick = _num(d.get("tick", DEFAULT_TICK), "tick")
    if cfg.duration < 0 or not cfg.tick > 0:
        raise ConfigError("duration must be >= 0 and tick > 0")
    cfg.deployment = str(d.get("deployment", "static+uav"))
    if cfg.deployment not in DEPLOYMENTS:
        raise ConfigError(f"deployment must be one of {DEPLOYMENTS}")
    return cfg


def load_config(path) -> ScenarioConfig:
    path = Path(path)
    try:
        raw = path.read_bytes()
    except OSError as e:
        raise ConfigError(f"cannot read config {path}: {e}") from e
    try:
        data = json.loads(raw)
    except ValueError as e:
        raise ConfigError(f"config {path} is not valid JSON: {e}") from e
    return parse_config(data, path.parent)


# -- world and scenario state ------------------------------------------------

def build_world(cfg: ScenarioConfig) -> World:
    w = cfg.world
    resolve = lambda p: p if Path(p).is_absolute() else cfg.base_dir / p  # noqa: E731
    terrain = load_dem_file(resolve(w["dem"])) if "dem" in w else None
    buildings: list[Building] = []
    roads = RoadGraph()
    if "osm" in w:
        proj = GeoProjection(_num(w["projection"]["lat"], "lat"), _num(w["projection"]["lon"], "lon"))
        extract = load_osm_file(resolve(w["osm"]), proj)
        buildings.extend(extract.buildings)
        roads = build_road_graph(extract.ways, proj, terrain)
    for i, b in enumerate(w.get("buildings", [])):
        where = f"world.buildings[{i}]"
        fp = [(_num(x, where), _num(y, where)) for x, y in b["footprint"]]
        poly = _build(Polygon2D, where, vertices=tuple(fp))
        buildings.append(_build(Building, where, id=str(b["id"]), footprint=poly,
                                height=_num(b["height"], where)))
    if "roads" in w:
        for nid, xy in w["roads"]["nodes"].items():
            if nid in roads.nodes:
                raise ConfigError(f"road node {nid!r} defined twice")
            p = _vec(xy, f"world.roads.nodes.{nid}", 2)
            roads.nodes[str(nid)] = Vec3(p.x, p.y, ground_height(terrain, p.x, p.y))
        for way in w["roads"]["ways"]:
            for a, b in zip(way, way[1:]):
                if str(a) not in roads.nodes or str(b) not in roads.nodes:
                    raise ConfigError(f"road way references unknown node ({a}, {b})")
                roads.add_edge(str(a), str(b))
    try:
        return World(tuple(place_buildings(buildings, terrain)), terrain, roads)
    except GeometryError as e:
        raise ConfigError(str(e)) from e


def route_for(node: GroundNode, roads: RoadGraph) -> RoutePlan:
    try:
        if node.shortest:
            return shortest_route(roads, node.route[0], node.route[1], node.loop)
        return RoutePlan.from_graph(roads, node.route, node.loop)
    except KeyError as e:
        raise ConfigError(f"vehicle {node.id}: unknown road node {e}") from e
    except Unreachable as e:
        raise ConfigError(f"vehicle {node.id}: {e}") from e


@dataclass(frozen=True)
class PathLossSample:
    t: float
    link_id: str
    condition: str
    selected_kind: str
    path_loss_db: float
    direct_d3d: float
    selected_panel: Optional[str] = None


@dataclass
class SampleLog:
    samples: list[PathLossSample] = field(default_factory=list)

    def __len__(self):
        return len(self.samples)

    def __iter__(self):
        return iter(self.samples)

    def link_ids(self) -> list[str]:
        return list(dict.fromkeys(s.link_id for s in self.samples))

    def for_link(self, link_id: str) -> list[PathLossSample]:
        return [s for s in self.samples if s.link_id == link_id]


class Scenario:
    """Mutable simulation state owned by the loop."""

    def __init__(self, cfg: ScenarioConfig, world: Optional[World] = None):
        self.cfg = cfg
        self.world = world if world is not None else build_world(cfg)
        self.routes: dict[str, RoutePlan] = {}
        self.states: dict[str, VehicleState] = {}
        for n in cfg.nodes:
            if isinstance(n, StaticNode):
                self.states[n.id] = VehicleState(n.id, n.position, kind=NodeKind.STATIC)
            elif isinstance(n, GroundNode):
                plan = route_for(n, self.world.roads)
                self.routes[n.id] = plan
                self.states[n.id] = ground_state(n.id, plan, n.motion, n.start_offset, n.initial_speed)
        for n in cfg.nodes:
            if isinstance(n, UavNode):
                self.states[n.id] = uav_state(n.id, self.states[n.target],
                                              self._align_point(n.align_to), n.params,
                                              self.world.terrain)

    def _align_point(self, node_id: str) -> Vec3:
        if node_id in self.states:
            return self.states[node_id].position
        n = self.cfg.node(node_id)
        if isinstance(n, StaticNode):
            return n.position
        raise ConfigError(f"align_to node {node_id!r} must be static or defined earlier")

    def step(self, dt: float) -> None:
        for n in self.cfg.nodes:
            if isinstance(n, GroundNode):
                self.states[n.id] = step_ground(self.states[n.id], self.routes[n.id], n.motion, dt)
        for n in self.cfg.nodes:
            if isinstance(n, UavNode):
                self.states[n.id] = step_uav_follower(
                    self.states[n.id], self.states[n.target], self.states[n.align_to].position,
                    n.params, dt, self.world.terrain)

    def panels(self, deployment: Optional[str] = None) -> list[RisPanel]:
        out = []
        for p in self.cfg.active_panels(deployment):
            if isinstance(p, StaticPanel):
                out.append(RisPanel(p.id, p.position, p.normal, p.width, p.height))
            else:
                out.append(mounted_panel(p.id, self.states[p.mount.carrier], p.mount,
                                         self.states[p.align_to].position, p.width, p.height))
        return out

    def evaluate(self, t: float, deployment: Optional[str] = None) -> list[PathLossSample]:
        panels = self.panels(deployment)
        out = []
        for link in self.cfg.links:
            sel = evaluate_link(self.world, self.states[link.tx].position,
                                self.states[link.rx].position, panels, self.cfg.radio)
            best = sel.best
            out.append(PathLossSample(t, link.id, sel.condition, best.kind, best.path_loss,
                                      sel.direct_d3d, best.panel_id))
        return out


def tick_count(duration: float, tick: float) -> int:
    return int(math.floor(duration / tick + 1e-9)) + 1


def run_scenario(cfg: ScenarioConfig, deployment: Optional[str] = None,
                 world: Optional[World] = None, trace: Optional[list] = None) -> SampleLog:
    """Run ``cfg`` and return its sample log.

    When ``trace`` is a list, one ``(t, node_id, x, y, z)`` row per node and
    tick is appended to it.
    """
    sc = Scenario(cfg, world)
    log = SampleLog()
    for i in range(tick_count(cfg.duration, cfg.tick)):
        t = i * cfg.tick
        if i > 0:
            sc.step(cfg.tick)
        if trace is not None:
            for nid, st in sc.states.items():
                trace.append((t, nid, st.position.x, st.position.y, st.position.z))
        log.samples.extend(sc.evaluate(t, deployment))
    return log


def run_deployments(cfg: ScenarioConfig, deployments: Iterable[str] = DEPLOYMENTS,
                    world: Optional[World] = None, trace: Optional[list] = None) -> dict[str, SampleLog]:
    """Evaluate several deployment cases over one shared mobility run."""
    deployments = list(deployments)
    sc = Scenario(cfg, world)
    logs = {d: SampleLog() for d in deployments}
    for i in range(tick_count(cfg.duration, cfg.tick)):
        t = i * cfg.tick
        if i > 0:
            sc.step(cfg.tick)
        if trace is not None:
            for nid, st in sc.states.items():
                trace.append((t, nid, st.position.x, st.position.y, st.position.z))
        for d in deployments:
            logs[d].samples.extend(sc.evaluate(t, d))
    return logs


def replay_positions(cfg: ScenarioConfig, trace: Sequence[tuple], deployment: Optional[str] = None,
                     world: Optional[World] = None) -> SampleLog:
    """Evaluate links on externally supplied positions instead of the mobility models.

    Nodes missing from a trace timestamp keep their last known position.
    """
    sc = Scenario(cfg, world)
    groups: list[tuple[float, list[tuple]]] = []
    for row in trace:
        if len(row) != 5:
            raise TraceFormatError(f"trace row needs 5 fields: {row!r}")
        t = float(row[0])
        if groups and t < groups[-1][0]:
            raise TraceFormatError(f"trace timestamps not monotone at t={t}")
        if groups and t == groups[-1][0]:
            groups[-1][1].append(row)
        else:
            groups.append((t, [row]))
    log = SampleLog()
    for t, rows in groups:
        for _, nid, x, y, z in rows:
            nid = str(nid)
            if nid not in sc.states:
                raise TraceFormatError(f"trace references unknown node {nid!r}")
            prev = sc.states[nid]
            pos = Vec3(float(x), float(y), float(z))
            heading = prev.heading
            if prev.kind == NodeKind.GROUND and (pos.x != prev.position.x or pos.y != prev.position.y):
                heading = math.atan2(pos.y - prev.position.y, pos.x - prev.position.x)
            sc.states[nid] = VehicleState(nid, pos, prev.speed, heading, prev.kind, prev.s)
        for n in cfg.nodes:
            if isinstance(n, UavNode):
                st = sc.states[n.id]
                a = sc.states[n.align_to].position
                if a.x != st.position.x or a.y != st.position.y:
                    sc.states[n.id] = VehicleState(n.id, st.position, st.speed,
                                                   math.atan2(a.y - st.position.y, a.x - st.position.x),
                                                   st.kind)
        log.samples.extend(sc.evaluate(t, deployment))
    return log


# -- CSV I/O -----------------------------------------------------------------

def format_samples_csv(log: SampleLog) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(SAMPLE_COLUMNS)
    for s in log:
        w.writerow([f"{s.t:.6f}", s.link_id, s.condition, s.selected_kind, s.selected_panel or "",
                    f"{s.path_loss_db:.6f}", f"{s.direct_d3d:.6f}"])
    return buf.getvalue()


def read_samples_csv(text: str) -> SampleLog:
    rows = list(csv.reader(io.StringIO(text)))
    if not rows or tuple(rows[0]) != SAMPLE_COLUMNS:
        raise TraceFormatError("samples CSV header mismatch")
    log = SampleLog()
    for r in rows[1:]:
        if not r:
            continue
        try:
            log.samples.append(PathLossSample(float(r[0]), r[1], r[2], r[3], float(r[5]),
                                              float(r[6]), r[4] or None))
        except (ValueError, IndexError) as e:
            raise TraceFormatError(f"bad samples row {r!r}") from e
    return log


def format_trace_csv(trace: Iterable[tuple]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(TRACE_COLUMNS)
    for t, nid, x, y, z in trace:
        w.writerow([repr(float(t)), nid, repr(float(x)), repr(float(y)), repr(float(z))])
    return buf.getvalue()


def read_trace_csv(text: str) -> list[tuple]:
    rows = list(csv.reader(io.StringIO(text)))
    if not rows or tuple(h.strip() for h in rows[0]) != TRACE_COLUMNS:
        raise TraceFormatError('trace CSV must start with header "t,node_id,x,y,z"')
    out = []
    for r in rows[1:]:
        if not r:
            continue
        if len(r) != 5:
            raise TraceFormatError(f"bad trace row {r!r}")
        try:
            out.append((float(r[0]), r[1], float(r[2]), float(r[3]), float(r[4])))
        except ValueError as e:
            raise TraceFormatError(f"bad trace row {r!r}") from e
    return out
