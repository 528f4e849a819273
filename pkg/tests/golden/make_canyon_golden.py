"""Regenerate tests/data/canyon_golden.csv.

Positions come from the simulator's mobility trace; every path loss is
recomputed with the brute-force enumeration in tests/oracles.py, with the
UAV panel normal worked out directly from its pose. Run from the repo root:

    python3 tests/golden/make_canyon_golden.py
"""
import csv
import sys
from pathlib import Path

HERE = Path(__file__).resolve().parent
sys.path.insert(0, str(HERE.parent))

import oracles  # noqa: E402
from risvsim.fixtures import BS_POSITION, BUILDING_HEIGHT, canyon_config, corner_ris_pose  # noqa: E402
from risvsim.sim import parse_config, run_scenario  # noqa: E402

OUT = HERE.parent / "data" / "canyon_golden.csv"
COLUMNS = ("t", "condition", "static_db", "static_panel", "static_uav_db", "static_uav_panel")


def rows():
    raw = canyon_config()
    boxes = []
    for b in raw["world"]["buildings"]:
        xs = [p[0] for p in b["footprint"]]
        ys = [p[1] for p in b["footprint"]]
        boxes.append((min(xs), min(ys), max(xs), max(ys), 0.0, BUILDING_HEIGHT))
    ris_pos, ris_n = corner_ris_pose()
    corner = ("ris_corner", ris_pos, ris_n, 0.5, 0.5)

    trace = []
    run_scenario(parse_config(raw), "none", trace=trace)
    by_t = {}
    for t, nid, x, y, z in trace:
        by_t.setdefault(t, {})[nid] = (x, y, z)

    for t in sorted(by_t):
        car, uav = by_t[t]["car"], by_t[t]["uav"]
        static = oracles.enumerate_link(BS_POSITION, car, boxes, [corner])
        uav_panel = ("ris_uav", uav, oracles.tilted_normal(uav, BS_POSITION, 30.0), 0.5, 0.5)
        both = oracles.enumerate_link(BS_POSITION, car, boxes, [corner, uav_panel])
        cond = "LOS" if oracles.los(BS_POSITION, car, boxes) else "NLOS"
        yield (f"{t:.6f}", cond, f"{static[0][0]:.6f}", static[0][3] or "",
               f"{both[0][0]:.6f}", both[0][3] or "")


def main():
    with OUT.open("w", newline="") as f:
        w = csv.writer(f, lineterminator="\n")
        w.writerow(COLUMNS)
        w.writerows(rows())
    print(f"wrote {OUT}")


if __name__ == "__main__":
    main()
