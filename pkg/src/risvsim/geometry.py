"""World model and exact geometric predicates.

Coordinates are local Cartesian meters with z pointing up. Buildings are
vertical prisms over a polygonal footprint; terrain is an optional regular
height grid. ``has_los`` is the single obstacle oracle used by the radio
models.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Iterable, Optional, Sequence

import numpy as np

from .errors import GeometryError, NoData, OutOfBounds

_EPS = 1e-12
TERRAIN_STEP = 5.0
TERRAIN_TOUCH_TOL = 1e-6


@dataclass(frozen=True, slots=True)
class Vec3:
    x: float
    y: float
    z: float = 0.0

    def __post_init__(self):
        if not (math.isfinite(self.x) and math.isfinite(self.y) and math.isfinite(self.z)):
            raise ValueError(f"non-finite Vec3 component: ({self.x}, {self.y}, {self.z})")

    def __add__(self, other: "Vec3") -> "Vec3":
        return Vec3(self.x + other.x, self.y + other.y, self.z + other.z)

    def __sub__(self, other: "Vec3") -> "Vec3":
        return Vec3(self.x - other.x, self.y - other.y, self.z - other.z)

    def __mul__(self, k: float) -> "Vec3":
        return Vec3(self.x * k, self.y * k, self.z * k)

    __rmul__ = __mul__

    def __neg__(self) -> "Vec3":
        return Vec3(-self.x, -self.y, -self.z)

    def dot(self, other: "Vec3") -> float:
        return self.x * other.x + self.y * other.y + self.z * other.z

    def norm(self) -> float:
        return math.sqrt(self.x * self.x + self.y * self.y + self.z * self.z)

    def unit(self) -> "Vec3":
        n = self.norm()
        if n == 0.0:
            raise GeometryError("cannot normalize zero vector")
        return Vec3(self.x / n, self.y / n, self.z / n)

    def horizontal(self) -> "Vec3":
        return Vec3(self.x, self.y, 0.0)

    def as_tuple(self) -> tuple[float, float, float]:
        return (self.x, self.y, self.z)


def distance3d(p: Vec3, q: Vec3) -> float:
    return math.sqrt((q.x - p.x) ** 2 + (q.y - p.y) ** 2 + (q.z - p.z) ** 2)


def distance2d(p: Vec3, q: Vec3) -> float:
    return math.hypot(q.x - p.x, q.y - p.y)


def _cross2(ax, ay, bx, by):
    return ax * by - ay * bx


def _segments_touch(a, b, c, d) -> bool:
    """True if closed 2D segments ab and cd share at least one point."""

    def orient(p, q, r):
        v = _cross2(q[0] - p[0], q[1] - p[1], r[0] - p[0], r[1] - p[1])
        return 0 if abs(v) <= _EPS else (1 if v > 0 else -1)

    def on_seg(p, q, r):
        return (min(p[0], q[0]) - _EPS <= r[0] <= max(p[0], q[0]) + _EPS
                and min(p[1], q[1]) - _EPS <= r[1] <= max(p[1], q[1]) + _EPS)

    o1, o2, o3, o4 = orient(a, b, c), orient(a, b, d), orient(c, d, a), orient(c, d, b)
    if o1 != o2 and o3 != o4:
        return True
    if o1 == 0 and on_seg(a, b, c):
        return True
    if o2 == 0 and on_seg(a, b, d):
        return True
    if o3 == 0 and on_seg(c, d, a):
        return True
    if o4 == 0 and on_seg(c, d, b):
        return True
    return False


@dataclass(frozen=True)
class Polygon2D:
    """Simple polygon, stored counter-clockwise without a repeated closing vertex."""

    vertices: tuple[tuple[float, float], ...]

    def __post_init__(self):
        pts = [(float(x), float(y)) for x, y in self.vertices]
        if len(pts) > 1 and pts[0] == pts[-1]:
            pts.pop()
        dedup = []
        for pt in pts:
            if not (math.isfinite(pt[0]) and math.isfinite(pt[1])):
                raise GeometryError("non-finite polygon vertex")
            if not dedup or dedup[-1] != pt:
                dedup.append(pt)
        if len(dedup) > 1 and dedup[0] == dedup[-1]:
            dedup.pop()
        if len(dedup) < 3:
            raise GeometryError("polygon needs at least 3 distinct vertices")
        area = _signed_area(dedup)
        if abs(area) <= _EPS:
            raise GeometryError("degenerate polygon (zero area)")
        if area < 0:
            dedup.reverse()
        n = len(dedup)
        for i in range(n):
            a, b = dedup[i], dedup[(i + 1) % n]
            for j in range(i + 1, n):
                if j == i or (j + 1) % n == i or j == (i + 1) % n:
                    continue
                c, d = dedup[j], dedup[(j + 1) % n]
                if _segments_touch(a, b, c, d):
                    raise GeometryError("self-intersecting polygon")
        object.__setattr__(self, "vertices", tuple(dedup))
        xs = [v[0] for v in dedup]
        ys = [v[1] for v in dedup]
        object.__setattr__(self, "bbox", (min(xs), min(ys), max(xs), max(ys)))

    def area(self) -> float:
        return _signed_area(self.vertices)

    def centroid(self) -> tuple[float, float]:
        a = 0.0
        cx = cy = 0.0
        v = self.vertices
        for i in range(len(v)):
            x0, y0 = v[i]
            x1, y1 = v[(i + 1) % len(v)]
            w = x0 * y1 - x1 * y0
            a += w
            cx += (x0 + x1) * w
            cy += (y0 + y1) * w
        a *= 0.5
        return cx / (6 * a), cy / (6 * a)

    def on_boundary(self, x: float, y: float, tol: float = 1e-9) -> bool:
        v = self.vertices
        for i in range(len(v)):
            (x0, y0), (x1, y1) = v[i], v[(i + 1) % len(v)]
            ex, ey = x1 - x0, y1 - y0
            l2 = ex * ex + ey * ey
            t = ((x - x0) * ex + (y - y0) * ey) / l2
            t = min(1.0, max(0.0, t))
            if math.hypot(x0 + t * ex - x, y0 + t * ey - y) <= tol:
                return True
        return False

    def contains(self, x: float, y: float) -> bool:
        """Strict interior test; boundary points are outside."""
        xmin, ymin, xmax, ymax = self.bbox
        if x <= xmin or x >= xmax or y <= ymin or y >= ymax:
            return False
        if self.on_boundary(x, y):
            return False
        inside = False
        v = self.vertices
        j = len(v) - 1
        for i in range(len(v)):
            xi, yi = v[i]
            xj, yj = v[j]
            if (yi > y) != (yj > y):
                xc = xi + (y - yi) * (xj - xi) / (yj - yi)
                if x < xc:
                    inside = not inside
            j = i
        return inside


def _signed_area(pts: Sequence[tuple[float, float]]) -> float:
    s = 0.0
    for i in range(len(pts)):
        x0, y0 = pts[i]
        x1, y1 = pts[(i + 1) % len(pts)]
        s += x0 * y1 - x1 * y0
    return 0.5 * s


@dataclass(frozen=True)
class Building:
    id: str
    footprint: Polygon2D
    height: float
    base_z: float = 0.0

    def __post_init__(self):
        if not (self.height > 0 and math.isfinite(self.height)):
            raise GeometryError(f"building {self.id}: height must be > 0")
        if not math.isfinite(self.base_z):
            raise GeometryError(f"building {self.id}: non-finite base_z")

    @property
    def top_z(self) -> float:
        return self.base_z + self.height


@dataclass(frozen=True)
class TerrainGrid:
    """Regular height grid with nodes at ``(x0 + j*cell_size, y0 + i*cell_size)``.

    ``heights`` is row-major with row 0 the northernmost row, as read from an
    ESRI ASCII grid.
    """

    x0: float
    y0: float
    cell_size: float
    ncols: int
    nrows: int
    heights: np.ndarray
    nodata: Optional[float] = None

    def __post_init__(self):
        if not self.cell_size > 0:
            raise GeometryError("cell_size must be > 0")
        if self.ncols < 2 or self.nrows < 2:
            raise GeometryError("terrain grid needs at least 2x2 nodes")
        h = np.asarray(self.heights, dtype=float)
        if h.shape != (self.nrows, self.ncols):
            raise GeometryError(f"heights shape {h.shape} != ({self.nrows}, {self.ncols})")
        h.setflags(write=False)
        object.__setattr__(self, "heights", h)

    @property
    def x_max(self) -> float:
        return self.x0 + (self.ncols - 1) * self.cell_size

    @property
    def y_max(self) -> float:
        return self.y0 + (self.nrows - 1) * self.cell_size

    def node(self, col: int, row_from_south: int) -> float:
        return float(self.heights[self.nrows - 1 - row_from_south, col])

    def contains(self, x: float, y: float) -> bool:
        tol = 1e-9 * self.cell_size
        return (self.x0 - tol <= x <= self.x_max + tol) and (self.y0 - tol <= y <= self.y_max + tol)


def terrain_height_at(grid: TerrainGrid, x: float, y: float) -> float:
    if not grid.contains(x, y):
        raise OutOfBounds(f"({x}, {y}) outside terrain extent")
    u = (x - grid.x0) / grid.cell_size
    v = (y - grid.y0) / grid.cell_size
    j = min(max(int(math.floor(u)), 0), grid.ncols - 2)
    i = min(max(int(math.floor(v)), 0), grid.nrows - 2)
    fu = min(max(u - j, 0.0), 1.0)
    fv = min(max(v - i, 0.0), 1.0)
    h00 = grid.node(j, i)
    h10 = grid.node(j + 1, i)
    h01 = grid.node(j, i + 1)
    h11 = grid.node(j + 1, i + 1)
    if grid.nodata is not None and grid.nodata in (h00, h10, h01, h11):
        raise NoData(f"terrain cell near ({x}, {y}) has no data")
    # exact at nodes: skip the arithmetic where a weight vanishes
    if fu == 0.0 and fv == 0.0:
        return h00
    return ((1 - fu) * (1 - fv) * h00 + fu * (1 - fv) * h10
            + (1 - fu) * fv * h01 + fu * fv * h11)


def ground_height(terrain: Optional[TerrainGrid], x: float, y: float) -> float:
    """Terrain height, or 0 where no terrain (or no data) is available."""
    if terrain is None:
        return 0.0
    try:
        return terrain_height_at(terrain, x, y)
    except (OutOfBounds, NoData):
        return 0.0


@dataclass
class RoadGraph:
    nodes: dict[str, Vec3] = field(default_factory=dict)
    edges: list[tuple[str, str, float]] = field(default_factory=list)

    def __post_init__(self):
        for a, b, length in self.edges:
            if a not in self.nodes or b not in self.nodes:
                raise GeometryError(f"edge {a}-{b} references unknown node")
            if abs(length - distance3d(self.nodes[a], self.nodes[b])) > 1e-6:
                raise GeometryError(f"edge {a}-{b} length inconsistent with node positions")

    def add_edge(self, a: str, b: str) -> None:
        if a == b:
            return
        key = (min(a, b), max(a, b))
        if any((min(e[0], e[1]), max(e[0], e[1])) == key for e in self.edges):
            return
        self.edges.append((a, b, distance3d(self.nodes[a], self.nodes[b])))

    def neighbors(self) -> dict[str, list[tuple[str, float]]]:
        adj: dict[str, list[tuple[str, float]]] = {n: [] for n in self.nodes}
        for a, b, length in self.edges:
            adj[a].append((b, length))
            adj[b].append((a, length))
        return adj

    def degree(self, node_id: str) -> int:
        return sum((a == node_id) + (b == node_id) for a, b, _ in self.edges)

    def components(self) -> list[set[str]]:
        adj = self.neighbors()
        seen: set[str] = set()
        comps = []
        for start in sorted(self.nodes):
            if start in seen:
                continue
            comp = {start}
            stack = [start]
            while stack:
                n = stack.pop()
                for m, _ in adj[n]:
                    if m not in comp:
                        comp.add(m)
                        stack.append(m)
            seen |= comp
            comps.append(comp)
        return comps


@dataclass(frozen=True)
class World:
    buildings: tuple[Building, ...] = ()
    terrain: Optional[TerrainGrid] = None
    roads: RoadGraph = field(default_factory=RoadGraph)

    def __post_init__(self):
        object.__setattr__(self, "buildings", tuple(self.buildings))
        ids = [b.id for b in self.buildings]
        if len(ids) != len(set(ids)):
            raise GeometryError("duplicate building ids")

    def with_building(self, building: Building) -> "World":
        return World(self.buildings + (building,), self.terrain, self.roads)


def place_buildings(buildings: Iterable[Building], terrain: Optional[TerrainGrid]) -> list[Building]:
    """Set each building's base to the terrain height under its footprint centroid."""
    out = []
    for b in buildings:
        cx, cy = b.footprint.centroid()
        out.append(Building(b.id, b.footprint, b.height, ground_height(terrain, cx, cy)))
    return out


def _footprint_intervals(poly: Polygon2D, ax, ay, dx, dy) -> list[tuple[float, float]]:
    """Parameter intervals of segment a + t*d, t in [0, 1], strictly inside ``poly``."""
    ts = [0.0, 1.0]
    v = poly.vertices
    dd = dx * dx + dy * dy
    for i in range(len(v)):
        cx, cy = v[i]
        ex, ey = v[(i + 1) % len(v)][0] - cx, v[(i + 1) % len(v)][1] - cy
        denom = _cross2(dx, dy, ex, ey)
        wx, wy = cx - ax, cy - ay
        if abs(denom) > _EPS * max(1.0, math.sqrt(dd * (ex * ex + ey * ey))):
            t = _cross2(wx, wy, ex, ey) / denom
            u = _cross2(wx, wy, dx, dy) / denom
            if -1e-12 <= u <= 1 + 1e-12 and 0.0 < t < 1.0:
                ts.append(t)
        elif abs(_cross2(wx, wy, dx, dy)) <= 1e-9 * math.sqrt(dd):
            # collinear edge: its endpoints split the segment
            for px, py in ((cx, cy), (cx + ex, cy + ey)):
                t = ((px - ax) * dx + (py - ay) * dy) / dd
                if 0.0 < t < 1.0:
                    ts.append(t)
    ts.sort()
    out = []
    for t0, t1 in zip(ts, ts[1:]):
        if t1 - t0 <= _EPS:
            continue
        tm = 0.5 * (t0 + t1)
        if poly.contains(ax + tm * dx, ay + tm * dy):
            if out and abs(out[-1][1] - t0) <= _EPS:
                out[-1] = (out[-1][0], t1)
            else:
                out.append((t0, t1))
    return out


def segment_intersects_building(p: Vec3, q: Vec3, b: Building) -> bool:
    """Whether the open segment (p, q) passes through the interior of the prism."""
    xmin, ymin, xmax, ymax = b.footprint.bbox
    if max(p.x, q.x) <= xmin or min(p.x, q.x) >= xmax or max(p.y, q.y) <= ymin or min(p.y, q.y) >= ymax:
        return False
    base, top = b.base_z, b.top_z
    if min(p.z, q.z) >= top or max(p.z, q.z) <= base:
        return False

    dz = q.z - p.z
    if abs(dz) <= _EPS:
        if not (base < p.z < top):
            return False
        z_lo, z_hi = 0.0, 1.0
    else:
        t_a, t_b = (base - p.z) / dz, (top - p.z) / dz
        z_lo, z_hi = min(t_a, t_b), max(t_a, t_b)

    dx, dy = q.x - p.x, q.y - p.y
    if dx * dx + dy * dy <= _EPS * _EPS:
        if not b.footprint.contains(p.x, p.y):
            return False
        intervals = [(0.0, 1.0)]
    else:
        intervals = _footprint_intervals(b.footprint, p.x, p.y, dx, dy)

    for t0, t1 in intervals:
        if max(t0, z_lo, 0.0) + _EPS < min(t1, z_hi, 1.0):
            return True
    return False


def _terrain_clear(terrain: TerrainGrid, p: Vec3, q: Vec3) -> bool:
    n = max(1, int(math.ceil(distance2d(p, q) / TERRAIN_STEP)))
    for i in range(n + 1):
        t = i / n
        x = p.x + t * (q.x - p.x)
        y = p.y + t * (q.y - p.y)
        z = p.z + t * (q.z - p.z)
        try:
            h = terrain_height_at(terrain, x, y)
        except (OutOfBounds, NoData):
            continue
        if z < h - TERRAIN_TOUCH_TOL:
            return False
    return True


def has_los(world: World, p: Vec3, q: Vec3) -> bool:
    # canonical endpoint order keeps the terrain sampling symmetric
    if (q.x, q.y, q.z) < (p.x, p.y, p.z):
        p, q = q, p
    for b in world.buildings:
        if segment_intersects_building(p, q, b):
            return False
    if world.terrain is not None and not _terrain_clear(world.terrain, p, q):
        return False
    return True
