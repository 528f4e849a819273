"""Built-in synthetic street-canyon scenario.

A 400 m main street runs east from the base station, flanked by two rows of
12 m buildings. A side street branches north at x = 190 m. The vehicle
drives east and turns into the side street, where the direct path is
blocked. A static panel at the crossroads sits 200 m from the base station
and faces it head-on; an optional UAV carries a second panel 60 m above the
vehicle.
"""
from __future__ import annotations

import math

BS_POSITION = (0.0, 0.0, 10.0)
BUILDING_HEIGHT = 12.0
SIDE_STREET_X = 190.0
ROUTE_END_Y = 360.0
CORNER_RIS_Y = -8.0
CORNER_RIS_Z = 5.0
CORNER_RIS_RANGE = 200.0


def corner_ris_pose() -> tuple[list[float], list[float]]:
    bx, by, bz = BS_POSITION
    dy, dz = CORNER_RIS_Y - by, CORNER_RIS_Z - bz
    x = bx + math.sqrt(CORNER_RIS_RANGE ** 2 - dy * dy - dz * dz)
    pos = [x, CORNER_RIS_Y, CORNER_RIS_Z]
    d = [bx - x, by - CORNER_RIS_Y, bz - CORNER_RIS_Z]
    n = math.sqrt(sum(c * c for c in d))
    return pos, [c / n for c in d]


def canyon_config(uav: bool = True, deployment: str = "static+uav",
                  duration: float = 60.0, tick: float = 0.1) -> dict:
    ris_pos, ris_normal = corner_ris_pose()
    h = BUILDING_HEIGHT
    cfg = {
        "world": {
            "buildings": [
                {"id": "north_west", "height": h,
                 "footprint": [[20, 10], [180, 10], [180, 400], [20, 400]]},
                {"id": "north_east", "height": h,
                 "footprint": [[200, 10], [400, 10], [400, 400], [200, 400]]},
                {"id": "south", "height": h,
                 "footprint": [[20, -40], [400, -40], [400, -10], [20, -10]]},
            ],
            "roads": {
                "nodes": {"W": [10, 0], "X": [SIDE_STREET_X, 0], "E": [400, 0],
                          "N": [SIDE_STREET_X, ROUTE_END_Y]},
                "ways": [["W", "X", "E"], ["X", "N"]],
            },
        },
        "radio": {"fc_ghz": 28.0, "gain_tx": 1.0, "gain_rx": 1.0, "h_bs": 10.0, "h_ut": 1.5,
                  "link_budget_db": 142.0},
        "nodes": [
            {"id": "bs", "kind": "static", "position": list(BS_POSITION)},
            {"id": "car", "kind": "ground", "route": {"from": "W", "to": "N"},
             "motion": {"v_max": 10.0, "a_max": 2.0, "b_max": 4.0, "corner_speed": 5.0,
                        "antenna_height": 1.5}},
        ],
        "panels": [
            {"id": "ris_corner", "width": 0.5, "height": 0.5,
             "position": ris_pos, "normal": ris_normal},
        ],
        "links": [{"id": "bs-car", "tx": "bs", "rx": "car"}],
        "duration": duration,
        "tick": tick,
        "deployment": deployment if uav else ("static" if deployment == "static+uav" else deployment),
    }
    if uav:
        cfg["nodes"].append({"id": "uav", "kind": "uav", "target": "car", "align_to": "bs",
                             "altitude": 60.0, "offset": [0.0, 0.0]})
        cfg["panels"].append({"id": "ris_uav", "width": 0.5, "height": 0.5,
                              "mount": {"carrier": "uav", "align_to": "bs", "downtilt_deg": 30.0,
                                        "offset": [0.0, 0.0, 0.0]}})
    return cfg
