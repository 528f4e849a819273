import json
import shutil
import subprocess
import sys

import pytest

from conftest import DATA
from risvsim.cli import main
from risvsim.fixtures import canyon_config


@pytest.fixture
def canyon(tmp_path):
    p = tmp_path / "canyon.json"
    assert main(["fixture", "canyon", "-o", str(p)]) == 0
    return p


def write_cfg(tmp_path, data):
    p = tmp_path / "cfg.json"
    p.write_text(json.dumps(data))
    return p


def test_run_writes_outputs(canyon, tmp_path, capsys):
    out = tmp_path / "out"
    assert main(["run", "-c", str(canyon), "-o", str(out)]) == 0
    for name in ("samples.csv", "ecdf.csv", "summary.csv", "positions.csv", "manifest.json"):
        assert (out / name).is_file()
    manifest = json.loads((out / "manifest.json").read_text())
    assert manifest["deployment"] == "static+uav"
    assert len(manifest["config_sha256"]) == 64
    summary = (out / "summary.csv").read_text().splitlines()
    assert {line.split(",")[0] for line in summary[1:]} == {"none", "static", "static+uav"}
    assert "bs-car: outage" in capsys.readouterr().out


def test_fixture_matches_library(canyon):
    assert json.loads(canyon.read_text()) == canyon_config()


def test_missing_map_file(tmp_path, capsys):
    data = canyon_config()
    data["world"]["osm"] = "nowhere.osm"
    data["world"]["projection"] = {"lat": 51.0, "lon": 7.0}
    rc = main(["run", "-c", str(write_cfg(tmp_path, data)), "-o", str(tmp_path / "o")])
    assert rc == 2
    assert "ingest error" in capsys.readouterr().err


def test_osm_world_from_file(tmp_path):
    shutil.copy(DATA / "campus.osm", tmp_path / "campus.osm")
    data = {
        "world": {"osm": "campus.osm", "projection": {"lat": 51.4934, "lon": 7.4140}},
        "nodes": [{"id": "a", "kind": "static", "position": [0, 0, 10]},
                  {"id": "b", "kind": "static", "position": [50, 0, 1.5]}],
        "links": [{"id": "ab", "tx": "a", "rx": "b"}],
        "duration": 0,
    }
    assert main(["validate", "-c", str(write_cfg(tmp_path, data))]) == 0


def test_config_error_exit(tmp_path, capsys):
    data = canyon_config()
    data["links"][0]["tx"] = "ghost"
    assert main(["run", "-c", str(write_cfg(tmp_path, data)), "-o", str(tmp_path / "o")]) == 2
    assert "config error" in capsys.readouterr().err


def test_unwritable_output(canyon, tmp_path):
    blocker = tmp_path / "file"
    blocker.write_text("x")
    assert main(["run", "-c", str(canyon), "-o", str(blocker / "sub")]) == 3


def test_validate(canyon, capsys):
    assert main(["validate", "-c", str(canyon)]) == 0
    assert capsys.readouterr().out.startswith("ok: 3 nodes, 2 panels, 1 links, 3 buildings")


class TestCompare:
    @pytest.fixture
    def runs(self, canyon, tmp_path):
        out = {}
        for dep in ("none", "static"):
            d = tmp_path / dep
            assert main(["run", "-c", str(canyon), "-o", str(d), "--deployment", dep]) == 0
            out[dep] = d / "samples.csv"
        return out

    def test_identical(self, runs, tmp_path, capsys):
        a = str(runs["static"])
        assert main(["compare", "-a", a, "-b", a, "-o", str(tmp_path)]) == 0
        assert "gain area: 0.000000" in capsys.readouterr().out

    def test_static_beats_none(self, runs, tmp_path, capsys):
        assert main(["compare", "-a", str(runs["none"]), "-b", str(runs["static"]), "-o", str(tmp_path)]) == 0
        line = capsys.readouterr().out.splitlines()[0]
        assert float(line.split()[2]) > 0
        rows = (tmp_path / "gain.csv").read_text().splitlines()
        assert rows[0] == "link_id,gain_area_db_s"
        assert rows[-1].startswith("total,")

    def test_misaligned(self, runs, tmp_path):
        lines = runs["static"].read_text().splitlines()
        short = tmp_path / "short.csv"
        short.write_text("\n".join(lines[:-1]) + "\n")
        assert main(["compare", "-a", str(runs["none"]), "-b", str(short)]) == 4

    def test_missing_file(self, tmp_path):
        assert main(["compare", "-a", str(tmp_path / "x.csv"), "-b", str(tmp_path / "y.csv")]) == 2


def test_replay_cli(canyon, tmp_path):
    out = tmp_path / "out"
    assert main(["run", "-c", str(canyon), "-o", str(out)]) == 0
    rep = tmp_path / "rep"
    assert main(["replay", "-c", str(canyon), "-t", str(out / "positions.csv"), "-o", str(rep)]) == 0
    a = (out / "samples.csv").read_text()
    b = (rep / "samples.csv").read_text()
    assert a == b


def test_console_entry_point(tmp_path):
    r = subprocess.run([sys.executable, "-m", "risvsim.cli", "fixture", "canyon", "-o", str(tmp_path / "c.json")],
                       capture_output=True, text=True)
    assert r.returncode == 0
