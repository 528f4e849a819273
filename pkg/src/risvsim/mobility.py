"""Discrete-time kinematics for ground vehicles, UAV followers and static nodes."""
from __future__ import annotations

import bisect
import heapq
import math
from dataclasses import dataclass, field, replace
from enum import Enum
from typing import Optional, Sequence

from .errors import Unreachable
from .geometry import RoadGraph, TerrainGrid, Vec3, ground_height

CORNER_LOOKAHEAD = 20.0
CORNER_ANGLE = math.radians(15.0)
DEFAULT_TICK = 0.1


class NodeKind(str, Enum):
    GROUND = "ground"
    UAV = "uav"
    STATIC = "static"


@dataclass(frozen=True)
class VehicleState:
    id: str
    position: Vec3
    speed: float = 0.0
    heading: float = 0.0
    kind: NodeKind = NodeKind.STATIC
    s: float = 0.0  # arc length along the route, ground vehicles only

    def __post_init__(self):
        if self.speed < 0:
            raise ValueError(f"{self.id}: negative speed")


@dataclass(frozen=True)
class GroundMotionParams:
    v_max: float = 10.0
    a_max: float = 2.0
    b_max: float = 4.0
    corner_speed: float = 5.0
    antenna_height: float = 1.5

    def __post_init__(self):
        for name in ("v_max", "a_max", "b_max", "corner_speed"):
            if not getattr(self, name) > 0:
                raise ValueError(f"{name} must be > 0")
        if self.antenna_height < 0:
            raise ValueError("antenna_height must be >= 0")


@dataclass(frozen=True)
class UavFollowerParams:
    altitude: float = 60.0
    horizontal_offset: Vec3 = field(default_factory=lambda: Vec3(0.0, 0.0, 0.0))

    def __post_init__(self):
        if not self.altitude > 0:
            raise ValueError("altitude must be > 0")


@dataclass(frozen=True)
class RoutePlan:
    """Polyline through road graph nodes, parameterized by arc length."""

    node_ids: tuple[str, ...]
    points: tuple[Vec3, ...]
    loop: bool = False

    def __post_init__(self):
        if len(self.node_ids) != len(self.points) or not self.points:
            raise ValueError("route needs one point per node id")
        cum = [0.0]
        for a, b in zip(self.points, self.points[1:]):
            cum.append(cum[-1] + _hdist(a, b))
        object.__setattr__(self, "cum", tuple(cum))
        object.__setattr__(self, "corners", tuple(self._sharp_vertices()))

    @classmethod
    def from_graph(cls, graph: RoadGraph, node_ids: Sequence[str], loop: bool = False) -> "RoutePlan":
        adj = graph.neighbors()
        for a, b in zip(node_ids, node_ids[1:]):
            if not any(n == b for n, _ in adj.get(a, ())):
                raise Unreachable(f"route nodes {a} and {b} are not adjacent")
        return cls(tuple(node_ids), tuple(graph.nodes[n] for n in node_ids), loop)

    @property
    def length(self) -> float:
        return self.cum[-1]

    def _sharp_vertices(self) -> list[float]:
        pts = list(self.points)
        idx = list(range(1, len(pts) - 1))
        if self.loop and len(pts) > 2 and _hdist(pts[0], pts[-1]) < 1e-9:
            idx.append(len(pts) - 1)
        out = []
        for i in idx:
            prev = pts[i - 1]
            nxt = pts[i + 1] if i + 1 < len(pts) else pts[1]
            h1 = math.atan2(pts[i].y - prev.y, pts[i].x - prev.x)
            h2 = math.atan2(nxt.y - pts[i].y, nxt.x - pts[i].x)
            turn = abs(math.remainder(h2 - h1, 2 * math.pi))
            if turn > CORNER_ANGLE:
                out.append(self.cum[i])
        return out

    def locate(self, s: float) -> tuple[Vec3, float]:
        """Point on the polyline at arc length ``s`` and the local heading."""
        if len(self.points) == 1 or self.length == 0.0:
            return self.points[0], 0.0
        s = min(max(s, 0.0), self.length)
        i = bisect.bisect_right(self.cum, s) - 1
        i = min(max(i, 0), len(self.points) - 2)
        while i < len(self.points) - 2 and self.cum[i + 1] - self.cum[i] == 0.0:
            i += 1
        a, b = self.points[i], self.points[i + 1]
        seg = self.cum[i + 1] - self.cum[i]
        f = 0.0 if seg == 0.0 else (s - self.cum[i]) / seg
        p = Vec3(a.x + f * (b.x - a.x), a.y + f * (b.y - a.y), a.z + f * (b.z - a.z))
        return p, math.atan2(b.y - a.y, b.x - a.x)

    def target_speed(self, s: float, params: GroundMotionParams) -> float:
        for sc in self.corners:
            ahead = sc - s
            if self.loop and ahead < 0:
                ahead += self.length
            if 0.0 <= ahead <= CORNER_LOOKAHEAD:
                return min(params.corner_speed, params.v_max)
        return params.v_max


def _hdist(a: Vec3, b: Vec3) -> float:
    return math.hypot(b.x - a.x, b.y - a.y)


def shortest_route(graph: RoadGraph, source: str, target: str, loop: bool = False) -> RoutePlan:
    """Minimum-length route; equal lengths resolve to the smaller node-id sequence."""
    for n in (source, target):
        if n not in graph.nodes:
            raise KeyError(f"unknown road node {n!r}")
    adj = graph.neighbors()
    best: dict[str, tuple[float, tuple[str, ...]]] = {source: (0.0, (source,))}
    heap = [(0.0, (source,))]
    done = set()
    while heap:
        d, path = heapq.heappop(heap)
        node = path[-1]
        if node in done:
            continue
        done.add(node)
        if node == target:
            return RoutePlan(path, tuple(graph.nodes[n] for n in path), loop)
        for nxt, w in adj[node]:
            if nxt in done:
                continue
            key = (d + w, path + (nxt,))
            if nxt not in best or key < best[nxt]:
                best[nxt] = key
                heapq.heappush(heap, key)
    raise Unreachable(f"no road path from {source} to {target}")


def ground_state(vid: str, plan: RoutePlan, params: GroundMotionParams, s: float = 0.0,
                 speed: float = 0.0) -> VehicleState:
    if plan.loop and plan.length > 0:
        s = s % plan.length
    s = min(max(s, 0.0), plan.length)
    p, heading = plan.locate(s)
    return VehicleState(vid, Vec3(p.x, p.y, p.z + params.antenna_height), speed, heading,
                        NodeKind.GROUND, s)


def step_ground(state: VehicleState, plan: RoutePlan, params: GroundMotionParams, dt: float) -> VehicleState:
    """Advance one tick: update speed toward the target, then move along the route.

    The advance uses the mean of old and new speed, which is exact for the
    constant acceleration applied within the tick.
    """
    if not dt > 0:
        raise ValueError("dt must be > 0")
    if plan.length == 0.0:
        return replace(state, speed=0.0)
    v = state.speed
    target = plan.target_speed(state.s, params)
    if v < target:
        v_new = min(target, v + params.a_max * dt)
    else:
        v_new = max(target, v - params.b_max * dt)
    s = state.s + 0.5 * (v + v_new) * dt
    if s >= plan.length:
        if plan.loop:
            s = math.fmod(s, plan.length)
        else:
            s, v_new = plan.length, 0.0
    p, heading = plan.locate(s)
    return VehicleState(state.id, Vec3(p.x, p.y, p.z + params.antenna_height), v_new, heading,
                        NodeKind.GROUND, s)


def follower_position(target: VehicleState, params: UavFollowerParams,
                      terrain: Optional[TerrainGrid] = None) -> Vec3:
    off = params.horizontal_offset
    c, s = math.cos(target.heading), math.sin(target.heading)
    x = target.position.x + c * off.x - s * off.y
    y = target.position.y + s * off.x + c * off.y
    z = ground_height(terrain, target.position.x, target.position.y) + params.altitude
    return Vec3(x, y, z)


def _yaw_toward(p: Vec3, align_to: Vec3, fallback: float) -> float:
    dx, dy = align_to.x - p.x, align_to.y - p.y
    if dx == 0.0 and dy == 0.0:
        return fallback
    return math.atan2(dy, dx)


def uav_state(uid: str, target: VehicleState, align_to: Vec3, params: UavFollowerParams,
              terrain: Optional[TerrainGrid] = None) -> VehicleState:
    p = follower_position(target, params, terrain)
    return VehicleState(uid, p, 0.0, _yaw_toward(p, align_to, target.heading), NodeKind.UAV)


def step_uav_follower(uav: VehicleState, target: VehicleState, align_to: Vec3,
                      params: UavFollowerParams, dt: float,
                      terrain: Optional[TerrainGrid] = None) -> VehicleState:
    if not dt > 0:
        raise ValueError("dt must be > 0")
    p = follower_position(target, params, terrain)
    speed = math.hypot(p.x - uav.position.x, p.y - uav.position.y) / dt
    return VehicleState(uav.id, p, speed, _yaw_toward(p, align_to, uav.heading), NodeKind.UAV)
