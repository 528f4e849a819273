"""Command-line front end.

    risvsim run -c scenario.json -o out/ [--budget 142] [--deployment static]
    risvsim compare -a base/samples.csv -b ris/samples.csv [-o out/]
    risvsim replay -c scenario.json -t positions.csv -o out/
    risvsim validate -c scenario.json
    risvsim fixture canyon -o canyon.json

Exit codes: 0 success, 2 config or input error, 3 output not writable,
4 sample logs not timestamp-aligned.
"""
from __future__ import annotations

import argparse
import csv
import hashlib
import io
import json
import logging
import sys
import time
from pathlib import Path

from . import __version__
from .errors import ConfigError, IngestError, TimestampMismatch, TraceFormatError
from .fixtures import canyon_config
from .metrics import ecdf, gain_area, outage_fraction, summarize
from .sim import (DEPLOYMENTS, SampleLog, Scenario, build_world, format_samples_csv, format_trace_csv,
                  load_config, read_samples_csv, read_trace_csv, replay_positions, run_deployments)

EXIT_OK, EXIT_INPUT, EXIT_OUTPUT, EXIT_MISMATCH = 0, 2, 3, 4

log = logging.getLogger("risvsim")


def _fail(code: int, msg: str) -> int:
    print(msg, file=sys.stderr)
    return code


def _csv_text(header, rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    w.writerows(rows)
    return buf.getvalue()


def _ecdf_rows(log_: SampleLog):
    for link in log_.link_ids():
        e = ecdf(s.path_loss_db for s in log_.for_link(link))
        for v, f in zip(e.values, e.fractions):
            yield [link, f"{v:.6f}", f"{f:.6f}"]


def _summary_rows(logs: dict[str, SampleLog], budget: float):
    for dep, lg in logs.items():
        for s in summarize(lg, budget):
            yield [dep, s.link_id, s.samples, f"{s.outage_fraction:.6f}", f"{s.nlos_fraction:.6f}",
                   f"{s.min_db:.6f}", f"{s.max_db:.6f}", f"{s.mean_db:.6f}"]


def _write_outputs(outdir: Path, files: dict[str, str]) -> list[str]:
    outdir.mkdir(parents=True, exist_ok=True)
    written = []
    for name, text in files.items():
        p = outdir / name
        p.write_text(text, encoding="utf-8")
        written.append(str(p))
    return written


def _load(config_path):
    cfg = load_config(config_path)
    return cfg, build_world(cfg)


def cmd_run(args) -> int:
    t0 = time.perf_counter()
    try:
        cfg, world = _load(args.config)
        if args.deployment:
            if args.deployment not in DEPLOYMENTS:
                raise ConfigError(f"unknown deployment {args.deployment!r}")
            cfg.deployment = args.deployment
        budget = cfg.radio.link_budget if args.budget is None else args.budget
        trace: list = []
        logs = run_deployments(cfg, DEPLOYMENTS, world, trace)
    except IngestError as e:
        return _fail(EXIT_INPUT, f"ingest error: {e}")
    except ConfigError as e:
        return _fail(EXIT_INPUT, f"config error: {e}")
    samples = logs[cfg.deployment]
    files = {
        "samples.csv": format_samples_csv(samples),
        "ecdf.csv": _csv_text(("link_id", "path_loss_db", "fraction"), _ecdf_rows(samples)),
        "summary.csv": _csv_text(("deployment", "link_id", "samples", "outage_fraction",
                                  "nlos_fraction", "min_path_loss_db", "max_path_loss_db",
                                  "mean_path_loss_db"), _summary_rows(logs, budget)),
        "positions.csv": format_trace_csv(trace),
    }
    outdir = Path(args.output)
    try:
        written = _write_outputs(outdir, files)
        manifest = {
            "config_sha256": hashlib.sha256(Path(args.config).read_bytes()).hexdigest(),
            "tool_version": __version__,
            "deployment": cfg.deployment,
            "link_budget_db": budget,
            "inputs": [str(args.config)],
            "outputs": written,
            "runtime_s": round(time.perf_counter() - t0, 6),
        }
        (outdir / "manifest.json").write_text(json.dumps(manifest, indent=2) + "\n", encoding="utf-8")
    except OSError as e:
        return _fail(EXIT_OUTPUT, f"output error: {e}")
    for row in _summary_rows({cfg.deployment: samples}, budget):
        print(f"{row[1]}: outage {row[3]}, NLOS {row[4]}, path loss {row[5]}..{row[6]} dB")
    return EXIT_OK


def cmd_replay(args) -> int:
    try:
        cfg, world = _load(args.config)
        trace = read_trace_csv(Path(args.trace).read_text(encoding="utf-8"))
        samples = replay_positions(cfg, trace, args.deployment, world)
    except IngestError as e:
        return _fail(EXIT_INPUT, f"ingest error: {e}")
    except (ConfigError, TraceFormatError, OSError) as e:
        return _fail(EXIT_INPUT, f"input error: {e}")
    try:
        _write_outputs(Path(args.output), {"samples.csv": format_samples_csv(samples)})
    except OSError as e:
        return _fail(EXIT_OUTPUT, f"output error: {e}")
    return EXIT_OK


def cmd_compare(args) -> int:
    try:
        base = read_samples_csv(Path(args.a).read_text(encoding="utf-8"))
        enh = read_samples_csv(Path(args.b).read_text(encoding="utf-8"))
    except (OSError, TraceFormatError) as e:
        return _fail(EXIT_INPUT, f"input error: {e}")
    try:
        total = gain_area(base, enh)
        per_link = [(link, gain_area(SampleLog(base.for_link(link)), SampleLog(enh.for_link(link))))
                    for link in base.link_ids()]
    except TimestampMismatch as e:
        return _fail(EXIT_MISMATCH, f"timestamp mismatch: {e}")
    budget = 142.0 if args.budget is None else args.budget
    print(f"gain area: {total:.6f} dB*s")
    if len(base):
        print(f"outage fraction (a): {outage_fraction(base, budget):.6f}")
        print(f"outage fraction (b): {outage_fraction(enh, budget):.6f}")
    rows = [[link, f"{g:.6f}"] for link, g in per_link] + [["total", f"{total:.6f}"]]
    try:
        _write_outputs(Path(args.output), {"gain.csv": _csv_text(("link_id", "gain_area_db_s"), rows)})
    except OSError as e:
        return _fail(EXIT_OUTPUT, f"output error: {e}")
    return EXIT_OK


def cmd_validate(args) -> int:
    try:
        cfg, world = _load(args.config)
        Scenario(cfg, world)
    except IngestError as e:
        return _fail(EXIT_INPUT, f"ingest error: {e}")
    except ConfigError as e:
        return _fail(EXIT_INPUT, f"config error: {e}")
    print(f"ok: {len(cfg.nodes)} nodes, {len(cfg.panels)} panels, {len(cfg.links)} links, "
          f"{len(world.buildings)} buildings")
    return EXIT_OK


def cmd_fixture(args) -> int:
    cfg = canyon_config(uav=not args.no_uav)
    try:
        Path(args.output).write_text(json.dumps(cfg, indent=2) + "\n", encoding="utf-8")
    except OSError as e:
        return _fail(EXIT_OUTPUT, f"output error: {e}")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="risvsim", description="RIS-enhanced mmWave vehicular link simulator")
    p.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True)

    r = sub.add_parser("run", help="run a scenario and write CSV outputs")
    r.add_argument("-c", "--config", required=True)
    r.add_argument("-o", "--output", required=True)
    r.add_argument("--budget", type=float, help="link budget in dB (default: config value)")
    r.add_argument("--deployment", choices=DEPLOYMENTS)
    r.set_defaults(func=cmd_run)

    c = sub.add_parser("compare", help="gain area between two samples.csv files")
    c.add_argument("-a", required=True, help="baseline samples.csv")
    c.add_argument("-b", required=True, help="enhanced samples.csv")
    c.add_argument("-o", "--output", default=".")
    c.add_argument("--budget", type=float)
    c.set_defaults(func=cmd_compare)

    rp = sub.add_parser("replay", help="evaluate links along a recorded position trace")
    rp.add_argument("-c", "--config", required=True)
    rp.add_argument("-t", "--trace", required=True)
    rp.add_argument("-o", "--output", required=True)
    rp.add_argument("--deployment", choices=DEPLOYMENTS)
    rp.set_defaults(func=cmd_replay)

    v = sub.add_parser("validate", help="check a scenario config")
    v.add_argument("-c", "--config", required=True)
    v.set_defaults(func=cmd_validate)

    f = sub.add_parser("fixture", help="emit a built-in scenario config")
    f.add_argument("name", choices=["canyon"])
    f.add_argument("-o", "--output", required=True)
    f.add_argument("--no-uav", action="store_true", help="omit the UAV-mounted panel")
    f.set_defaults(func=cmd_fixture)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
