import random
import xml.etree.ElementTree as ET

import pytest
from hypothesis import given
from hypothesis import strategies as st

from conftest import DATA
from risvsim.errors import CountMismatch, HeaderMissing, MalformedXml, NoData
from risvsim.geometry import distance3d, terrain_height_at
from risvsim.ingest import (GeoProjection, build_road_graph, load_dem, parse_height, parse_osm)

PROJ = GeoProjection(51.4934, 7.4140)


@pytest.fixture
def campus():
    return (DATA / "campus.osm").read_bytes()


def test_osm_fixture_counts(campus):
    ex = parse_osm(campus, PROJ)
    assert sorted(b.height for b in ex.buildings) == [6.0, 12.0]
    graph = build_road_graph(ex.ways, PROJ)
    assert len(graph.nodes) == 3
    assert len(graph.edges) == 2
    assert ex.warnings == 0


def test_osm_footprints_are_counter_clockwise(campus):
    for b in parse_osm(campus, PROJ).buildings:
        assert b.footprint.area() > 0


def test_road_edge_lengths_match_node_distance(campus):
    g = build_road_graph(parse_osm(campus, PROJ).ways, PROJ)
    for a, b, length in g.edges:
        assert length == pytest.approx(distance3d(g.nodes[a], g.nodes[b]), abs=1e-6)


def test_empty_document():
    ex = parse_osm(b'<?xml version="1.0"?><osm version="0.6"></osm>', PROJ)
    assert ex.buildings == [] and ex.ways == []
    assert parse_osm(b"", PROJ).buildings == []


def test_unclosed_building_skipped():
    doc = b"""<osm>
      <node id="1" lat="0" lon="0"/><node id="2" lat="0" lon="0.001"/><node id="3" lat="0.001" lon="0.001"/>
      <way id="5"><nd ref="1"/><nd ref="2"/><nd ref="3"/><tag k="building" v="yes"/></way>
    </osm>"""
    ex = parse_osm(doc, GeoProjection(0, 0))
    assert ex.buildings == []
    assert ex.warnings == 1


def test_dangling_node_ref_skipped_not_fatal():
    doc = b"""<osm>
      <node id="1" lat="0" lon="0"/><node id="2" lat="0" lon="0.001"/>
      <way id="7"><nd ref="1"/><nd ref="99"/><tag k="highway" v="service"/></way>
      <way id="8"><nd ref="1"/><nd ref="2"/><tag k="highway" v="service"/></way>
    </osm>"""
    ex = parse_osm(doc, GeoProjection(0, 0))
    assert [w.id for w in ex.ways] == ["8"]
    assert ex.warnings == 1


def test_malformed_xml():
    with pytest.raises(MalformedXml):
        parse_osm(b"<osm><node id='1'", PROJ)


@pytest.mark.parametrize("tags,expected", [
    ({"height": "12"}, 12.0),
    ({"height": "7.5 m"}, 7.5),
    ({"building:levels": "2"}, 6.0),
    ({"height": "tall", "building:levels": "4"}, 12.0),
    ({}, 10.0),
])
def test_parse_height(tags, expected):
    assert parse_height(tags) == expected


def test_parsing_is_order_independent(campus):
    root = ET.fromstring(campus)
    children = list(root)
    rng = random.Random(3)
    for _ in range(5):
        rng.shuffle(children)
        shuffled = ET.Element("osm")
        shuffled.extend(children)
        a = parse_osm(campus, PROJ)
        b = parse_osm(ET.tostring(shuffled), PROJ)
        assert a.buildings == b.buildings
        assert build_road_graph(a.ways, PROJ) == build_road_graph(b.ways, PROJ)


@given(st.floats(-5000, 5000), st.floats(-5000, 5000))
def test_projection_round_trip(x, y):
    lat, lon = PROJ.inverse(x, y)
    x2, y2 = PROJ.project(lat, lon)
    assert abs(x2 - x) < 1e-6 and abs(y2 - y) < 1e-6
    lat2, lon2 = PROJ.inverse(x2, y2)
    assert abs(lat2 - lat) < 1e-9 and abs(lon2 - lon) < 1e-9


class TestRoadGraph:
    def ways(self, *seqs):
        from risvsim.ingest import RoadWay
        coords = {"A": (0, 0), "B": (0, 0.001), "C": (0.001, 0.001), "D": (0.002, 0.0),
                  "E": (0.003, 0.0), "F": (0.004, 0.0), "G": (0.001, 0.0)}
        return [RoadWay(f"w{i}", tuple(s), tuple(coords[n] for n in s)) for i, s in enumerate(seqs)]

    def test_single_way(self):
        g = build_road_graph(self.ways("ABC"), GeoProjection(0, 0))
        assert {(a, b) for a, b, _ in g.edges} == {("A", "B"), ("B", "C")}

    def test_shared_node_merges(self):
        g = build_road_graph(self.ways("ABC", "GBD"), GeoProjection(0, 0))
        assert g.degree("B") == 4
        assert len(g.components()) == 1

    def test_disconnected_ways(self):
        g = build_road_graph(self.ways("AB", "EF"), GeoProjection(0, 0))
        assert len(g.components()) == 2


class TestDem:
    def test_2x2_fixture(self):
        g = load_dem((DATA / "dem_2x2.asc").read_bytes())
        # nodes sit at cell centres: (5, 5) .. (15, 15)
        assert terrain_height_at(g, 5, 15) == 1.0   # north-west
        assert terrain_height_at(g, 15, 15) == 2.0
        assert terrain_height_at(g, 5, 5) == 3.0
        assert terrain_height_at(g, 15, 5) == 4.0
        assert terrain_height_at(g, 10, 10) == pytest.approx(2.5)

    def test_nodata_cell(self):
        g = load_dem((DATA / "dem_nodata.asc").read_bytes())
        with pytest.raises(NoData):
            terrain_height_at(g, 2.5, 2.5)
        with pytest.raises(NoData):
            terrain_height_at(g, 5.0, 5.0)

    def test_constant_grid(self):
        g = load_dem(b"ncols 3\nnrows 3\nxllcenter 0\nyllcenter 0\ncellsize 2\n5 5 5\n5 5 5\n5 5 5\n")
        for x, y in [(0.3, 0.7), (2, 2), (3.9, 1.1)]:
            assert terrain_height_at(g, x, y) == pytest.approx(5.0)

    def test_header_missing(self):
        with pytest.raises(HeaderMissing):
            load_dem(b"ncols 2\nnrows 2\ncellsize 1\n1 2 3 4\n")

    def test_count_mismatch(self):
        with pytest.raises(CountMismatch):
            load_dem(b"ncols 2\nnrows 2\nxllcorner 0\nyllcorner 0\ncellsize 1\n1 2 3\n")
