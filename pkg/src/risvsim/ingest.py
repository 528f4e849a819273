"""OpenStreetMap XML and ESRI ASCII grid loaders."""
from __future__ import annotations

import logging
import math
import re
import xml.etree.ElementTree as ET
from dataclasses import dataclass, field
from typing import BinaryIO, Optional, Union

import numpy as np

from .errors import CountMismatch, GeometryError, HeaderMissing, IngestError, MalformedXml
from .geometry import Building, Polygon2D, RoadGraph, TerrainGrid, Vec3, ground_height

log = logging.getLogger(__name__)

EARTH_RADIUS = 6378137.0
DEFAULT_BUILDING_HEIGHT = 10.0
LEVEL_HEIGHT = 3.0

_NUMERIC_PREFIX = re.compile(r"^\s*([+-]?(?:\d+(?:\.\d*)?|\.\d+))")

Source = Union[bytes, str, BinaryIO]


@dataclass(frozen=True)
class GeoProjection:
    """Equirectangular projection about a reference point."""

    lat0: float
    lon0: float

    def project(self, lat: float, lon: float) -> tuple[float, float]:
        k = math.pi / 180.0
        x = EARTH_RADIUS * (lon - self.lon0) * k * math.cos(self.lat0 * k)
        y = EARTH_RADIUS * (lat - self.lat0) * k
        return x, y

    def inverse(self, x: float, y: float) -> tuple[float, float]:
        k = math.pi / 180.0
        lat = self.lat0 + y / (EARTH_RADIUS * k)
        lon = self.lon0 + x / (EARTH_RADIUS * k * math.cos(self.lat0 * k))
        return lat, lon


@dataclass(frozen=True)
class RoadWay:
    id: str
    node_ids: tuple[str, ...]
    coords: tuple[tuple[float, float], ...]  # (lat, lon) per node


@dataclass
class OsmExtract:
    buildings: list[Building] = field(default_factory=list)
    ways: list[RoadWay] = field(default_factory=list)
    warnings: int = 0


def _read_bytes(source: Source) -> bytes:
    if isinstance(source, bytes):
        return source
    if isinstance(source, str):
        return source.encode("utf-8")
    return source.read()


def parse_height(tags: dict[str, str]) -> float:
    """Building height in meters from OSM tags."""
    m = _NUMERIC_PREFIX.match(tags.get("height", ""))
    if m and float(m.group(1)) > 0:
        return float(m.group(1))
    m = _NUMERIC_PREFIX.match(tags.get("building:levels", ""))
    if m and float(m.group(1)) > 0:
        return float(m.group(1)) * LEVEL_HEIGHT
    return DEFAULT_BUILDING_HEIGHT


def parse_osm(document: Source, projection: GeoProjection) -> OsmExtract:
    raw = _read_bytes(document)
    if not raw.strip():
        return OsmExtract()
    try:
        root = ET.fromstring(raw)
    except ET.ParseError as e:
        raise MalformedXml(str(e)) from e

    nodes: dict[str, tuple[float, float]] = {}
    for el in root.iter("node"):
        try:
            nodes[el.attrib["id"]] = (float(el.attrib["lat"]), float(el.attrib["lon"]))
        except (KeyError, ValueError) as e:
            raise MalformedXml(f"bad node element: {el.attrib}") from e

    out = OsmExtract()
    for el in root.iter("way"):
        way_id = el.attrib.get("id")
        if way_id is None:
            raise MalformedXml("way without id")
        refs = [nd.attrib["ref"] for nd in el.iter("nd") if "ref" in nd.attrib]
        tags = {t.attrib.get("k"): t.attrib.get("v", "") for t in el.iter("tag")}
        is_building = "building" in tags
        is_road = "highway" in tags
        if not (is_building or is_road):
            continue
        if any(r not in nodes for r in refs):
            log.warning("way %s references unknown nodes; skipped", way_id)
            out.warnings += 1
            continue
        if is_building:
            if len(refs) < 4 or refs[0] != refs[-1]:
                log.warning("building way %s is not a closed ring; skipped", way_id)
                out.warnings += 1
                continue
            try:
                footprint = Polygon2D(tuple(projection.project(*nodes[r]) for r in refs))
            except GeometryError as e:
                log.warning("building way %s has an invalid footprint (%s); skipped", way_id, e)
                out.warnings += 1
                continue
            out.buildings.append(Building(way_id, footprint, parse_height(tags)))
        elif len(refs) >= 2:
            out.ways.append(RoadWay(way_id, tuple(refs), tuple(nodes[r] for r in refs)))

    out.buildings.sort(key=lambda b: b.id)
    out.ways.sort(key=lambda w: w.id)
    return out


def build_road_graph(ways, projection: GeoProjection, terrain: Optional[TerrainGrid] = None) -> RoadGraph:
    graph = RoadGraph()
    for way in sorted(ways, key=lambda w: w.id):
        for nid, (lat, lon) in zip(way.node_ids, way.coords):
            if nid not in graph.nodes:
                x, y = projection.project(lat, lon)
                graph.nodes[nid] = Vec3(x, y, ground_height(terrain, x, y))
    for way in sorted(ways, key=lambda w: w.id):
        for a, b in zip(way.node_ids, way.node_ids[1:]):
            graph.add_edge(a, b)
    graph.nodes = dict(sorted(graph.nodes.items()))
    graph.edges.sort()
    return graph


_HEADER_KEYS = ("ncols", "nrows", "cellsize")


def load_dem(document: Source) -> TerrainGrid:
    """Parse an ESRI ASCII grid.

    Values are treated as grid nodes. With ``xllcorner``/``yllcorner`` the
    node of the south-west cell sits half a cell inside the stated corner.
    """
    text = _read_bytes(document).decode("utf-8")
    tokens = text.split()
    header: dict[str, str] = {}
    pos = 0
    while pos + 1 < len(tokens) and re.match(r"^[A-Za-z_]", tokens[pos]):
        header[tokens[pos].lower()] = tokens[pos + 1]
        pos += 2
    missing = [k for k in _HEADER_KEYS if k not in header]
    if ("xllcorner" not in header and "xllcenter" not in header) or \
            ("yllcorner" not in header and "yllcenter" not in header):
        missing.append("xll/yll")
    if missing:
        raise HeaderMissing(f"missing header fields: {', '.join(missing)}")
    try:
        ncols, nrows = int(header["ncols"]), int(header["nrows"])
        cs = float(header["cellsize"])
        nodata = float(header["nodata_value"]) if "nodata_value" in header else None
        if "xllcenter" in header:
            x0 = float(header["xllcenter"])
        else:
            x0 = float(header["xllcorner"]) + 0.5 * cs
        if "yllcenter" in header:
            y0 = float(header["yllcenter"])
        else:
            y0 = float(header["yllcorner"]) + 0.5 * cs
        values = np.array([float(t) for t in tokens[pos:]], dtype=float)
    except ValueError as e:
        raise IngestError(f"unparseable DEM content: {e}") from e
    if values.size != ncols * nrows:
        raise CountMismatch(f"expected {ncols * nrows} values, found {values.size}")
    try:
        return TerrainGrid(x0, y0, cs, ncols, nrows, values.reshape(nrows, ncols), nodata)
    except GeometryError as e:
        raise IngestError(str(e)) from e


def load_osm_file(path, projection: GeoProjection) -> OsmExtract:
    try:
        with open(path, "rb") as fh:
            return parse_osm(fh.read(), projection)
    except OSError as e:
        raise IngestError(f"cannot read OSM file {path}: {e}") from e


def load_dem_file(path) -> TerrainGrid:
    try:
        with open(path, "rb") as fh:
            return load_dem(fh.read())
    except OSError as e:
        raise IngestError(f"cannot read DEM file {path}: {e}") from e
