"""Command-line interface: generation, simulation, analysis, and serving.

Every subcommand is deterministic for fixed inputs; artifacts (JSON, CSV,
SVG) are written with stable formatting so repeated runs are byte-identical.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from pathlib import Path

import numpy as np

from . import files, svg
from .circuit import AdmittanceSystem, MaterialParams, impedance, log_sweep_frequencies, sweep
from .errors import LiquidSkinError
from .geometry import CellId, Network, Point2, delaunay, generate_random_points
from .localization import (
    DETECTION_THRESHOLD_OHM,
    MIN_SEPARATION_S,
    classify_signature,
    detect_events,
    localize,
    signature_table,
)
from .logic import (
    GateOutputs,
    calibrate,
    config_from_protocol,
    realizable_gates,
    run_multitouch,
    threshold_gate,
)
from .stimulus import PerturbCoeffs, family_map, simulate_scenario, subtract_drift

DEFAULT_PORT_ENV = "LIQUIDSKIN_PORT"


def _parse_pair(text: str) -> tuple[str, str]:
    parts = text.split("-")
    if len(parts) != 2 or not all(parts):
        raise LiquidSkinError(f"pair must look like BL-C, got {text!r}")
    return (parts[0], parts[1])


def _load_config(path: str | None) -> dict:
    if path is None:
        return {}
    doc = json.loads(Path(path).read_text())
    if not isinstance(doc, dict):
        raise LiquidSkinError(f"config file {path}: expected a JSON object")
    return doc


def _resolve_network(args, config: dict) -> Network:
    path = getattr(args, "network", None) or config.get("network")
    return files.load_network(path) if path else files.default_network()


def _resolve_pair(args, config: dict) -> tuple[str, str]:
    return _parse_pair(getattr(args, "pair", None) or config.get("pair") or "BL-C")


def _resolve_material(args, config: dict) -> MaterialParams:
    path = getattr(args, "material", None) or config.get("material")
    return files.load_material(path) if path else MaterialParams()


def _resolve_coeffs(args, config: dict) -> PerturbCoeffs:
    path = getattr(args, "coeffs", None) or config.get("coeffs")
    return files.load_coeffs(path) if path else PerturbCoeffs()


def _nearest_node(nodes, target: Point2) -> int:
    return min(range(len(nodes)), key=lambda i: (nodes[i].distance_to(target), i))


def cmd_gen_network(args, config) -> int:
    points = generate_random_points(args.seed, args.count, min_separation=args.min_distance)
    tri = delaunay(points)
    # Electrodes: the nodes closest to the bottom-left corner, the centre,
    # and the top-right corner of the skin.
    anchors = {"BL": Point2(0.0, 0.0), "C": Point2(100.0, 80.0), "TR": Point2(200.0, 160.0)}
    electrodes = {}
    for name, anchor in sorted(anchors.items()):
        idx = _nearest_node(tri.nodes, anchor)
        if idx in electrodes.values():
            raise LiquidSkinError(
                f"electrode {name} collides with another electrode; use more points"
            )
        electrodes[name] = idx
    network = Network(triangulation=tri, electrodes=electrodes)
    files.save_network(network, args.out)
    print(f"wrote {args.out}: {len(tri.nodes)} nodes, {len(tri.edges)} edges")
    return 0


def cmd_show_families(args, config) -> int:
    network = _resolve_network(args, config)
    pair = _resolve_pair(args, config)
    families = family_map(network, pair)
    Path(args.out).write_text(svg.family_map_svg(network, pair, families))
    counts: dict[str, int] = {}
    for fam in families.values():
        counts[fam.name] = counts.get(fam.name, 0) + 1
    print(f"wrote {args.out}: " + ", ".join(f"{k}={v}" for k, v in sorted(counts.items())))
    return 0


def cmd_sweep(args, config) -> int:
    network = _resolve_network(args, config)
    pair = _resolve_pair(args, config)
    material = _resolve_material(args, config)
    system = AdmittanceSystem.from_network(network, material)
    freqs = log_sweep_frequencies(args.f_min, args.f_max, args.points)
    result = sweep(system, pair, freqs)
    Path(args.csv).write_text(files.sweep_to_csv(result))
    if args.svg:
        rs = [z.resistance for _, z in result]
        xs = [z.reactance for _, z in result]
        Path(args.svg).write_text(svg.sweep_svg([f for f, _ in result], rs, xs, pair))
    print(f"wrote {args.csv}" + (f" and {args.svg}" if args.svg else ""))
    return 0


def cmd_simulate(args, config) -> int:
    network = _resolve_network(args, config)
    material = _resolve_material(args, config)
    coeffs = _resolve_coeffs(args, config)
    scenario = files.load_scenario(args.scenario)
    series = simulate_scenario(network, material, coeffs, scenario)
    Path(args.csv).write_text(files.series_to_csv(series))
    if args.svg:
        Path(args.svg).write_text(
            svg.series_svg(
                series.times(), series.resistances(), series.reactances(),
                scenario.electrode_pair,
            )
        )
    print(f"wrote {args.csv}" + (f" and {args.svg}" if args.svg else ""))
    return 0


def cmd_localize(args, config) -> int:
    network = _resolve_network(args, config)
    pair = _resolve_pair(args, config)
    material = _resolve_material(args, config)
    coeffs = _resolve_coeffs(args, config)
    series = files.series_from_csv(Path(args.series).read_text())
    if args.quiescent:
        windows = []
        for chunk in args.quiescent.split(";"):
            a, b = chunk.split(",")
            windows.append((float(a), float(b)))
        series = subtract_drift(series, windows)
    events = detect_events(series, args.threshold, args.min_separation)
    signatures = signature_table(network, material, coeffs, pair)
    report = {"pair": list(pair), "events": []}
    for event in events:
        entry = {
            "tPeak_s": event.t_peak_s,
            "deltaR_ohm": event.delta_r_ohm,
            "deltaX_ohm": event.delta_x_ohm,
            "width_s": event.width_s,
        }
        result = localize(event, network, pair, coeffs, material, signatures=signatures)
        entry["family"] = result.family.name
        entry["candidates"] = [
            {"cell": cell.label, "score": score} for cell, score in result.candidates[:10]
        ]
        report["events"].append(entry)
    text = files.canonical_json(report)
    if args.report:
        Path(args.report).write_text(text)
        print(f"wrote {args.report}: {len(events)} event(s)")
    else:
        print(text, end="")
    if args.svg and report["events"]:
        first = report["events"][0]
        scores = {CellId.parse(c["cell"]): c["score"] for c in first["candidates"]}
        Path(args.svg).write_text(
            svg.score_map_svg(network, pair, scores, "Localization scores (first event)")
        )
    return 0


def _gate_report(outputs: GateOutputs, thresholds) -> dict:
    report = {
        "outputs_ohm": {
            "O00": outputs.o00_ohm, "O01": outputs.o01_ohm,
            "O10": outputs.o10_ohm, "O11": outputs.o11_ohm,
        },
        "uncertainties_ohm": {
            "O00": outputs.u00_ohm, "O01": outputs.u01_ohm,
            "O10": outputs.u10_ohm, "O11": outputs.u11_ohm,
        },
        "o00_pre_ohm": outputs.o00_pre_ohm,
        "separable": outputs.separable(),
        "thresholds": [],
        "realizableGates": sorted(g.name for g in realizable_gates(outputs)),
    }
    for t in thresholds:
        table = threshold_gate(outputs, t)
        report["thresholds"].append(
            {"T_ohm": t, "truthTable": list(table.as_tuple()), "gate": table.name}
        )
    return report


def _print_table(table_entry: dict) -> None:
    f00, f01, f10, f11 = table_entry["truthTable"]
    print(f"T = {table_entry['T_ohm']} Ohm -> {table_entry['gate']}")
    print("      y=0  y=1")
    print(f"x=0    {f00}    {f01}")
    print(f"x=1    {f10}    {f11}")


def cmd_logic(args, config) -> int:
    asset = files.load_gate_asset(args.asset) if args.asset else files.paper_levels_asset()
    network = _resolve_network(args, config)
    outputs, _ = run_multitouch(
        network, asset["material"], asset["coeffs"], asset["pair"],
        asset["cellA"], asset["cellB"], config_from_protocol(asset["protocol"]),
    )
    thresholds = args.threshold if args.threshold else [0.13, 5.79]
    report = _gate_report(outputs, thresholds)
    report["cellA"] = asset["cellA"].label
    report["cellB"] = asset["cellB"].label
    if args.report:
        Path(args.report).write_text(files.canonical_json(report))
        print(f"wrote {args.report}")
    for entry in report["thresholds"]:
        _print_table(entry)
    return 0


def cmd_calibrate(args, config) -> int:
    network = _resolve_network(args, config)
    pair = _resolve_pair(args, config)
    material = _resolve_material(args, config)
    o00, o01, o10, o11 = (float(v) for v in args.targets.split(","))
    targets = GateOutputs(o00_ohm=o00, o01_ohm=o01, o10_ohm=o10, o11_ohm=o11)
    result = calibrate(
        network, material, pair,
        CellId.parse(args.cell_a), CellId.parse(args.cell_b),
        targets, args.tolerance,
    )
    files.save_coeffs(result.coeffs, args.out)
    print(
        f"wrote {args.out}: residual {result.residual_ohm:.4g} Ohm in "
        f"{result.evaluations} evaluations; drift slope "
        f"{result.disturbances.drift_slope_ohm_per_s:.5f} Ohm/s"
    )
    return 0


def cmd_serve(args, config) -> int:
    import uvicorn

    from .server import create_app

    uvicorn.run(create_app(), host=args.host, port=args.port, log_level="warning")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="liquidskin",
        description="Digital twin of a liquid-conductor tactile sensing skin",
    )
    parser.add_argument("--config", help="JSON file with default paths (network, material, coeffs, pair)")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("gen-network", help="generate a random channel network")
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--count", type=int, required=True)
    p.add_argument("--min-distance", type=float, default=15.0)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_gen_network)

    p = sub.add_parser("show-families", help="render the response-family map as SVG")
    p.add_argument("--network")
    p.add_argument("--pair", default=None)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_show_families)

    p = sub.add_parser("sweep", help="frequency sweep of the port impedance")
    p.add_argument("--network")
    p.add_argument("--pair", default=None)
    p.add_argument("--material")
    p.add_argument("--f-min", type=float, default=20.0)
    p.add_argument("--f-max", type=float, default=2e6)
    p.add_argument("--points", type=int, default=50)
    p.add_argument("--csv", required=True)
    p.add_argument("--svg")
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("simulate", help="run a timed press scenario")
    p.add_argument("--scenario", required=True)
    p.add_argument("--network")
    p.add_argument("--material")
    p.add_argument("--coeffs")
    p.add_argument("--csv", required=True)
    p.add_argument("--svg")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("localize", help="detect, classify and localize presses in a series")
    p.add_argument("--series", required=True, help="CSV with t_s,R_ohm,X_ohm columns")
    p.add_argument("--network")
    p.add_argument("--pair", default=None)
    p.add_argument("--material")
    p.add_argument("--coeffs")
    p.add_argument("--threshold", type=float, default=DETECTION_THRESHOLD_OHM)
    p.add_argument("--min-separation", type=float, default=MIN_SEPARATION_S)
    p.add_argument("--quiescent", help='drift windows like "0,2.5;11,14"')
    p.add_argument("--report")
    p.add_argument("--svg")
    p.set_defaults(func=cmd_localize)

    p = sub.add_parser("logic", help="run the two-input protocol and report gates")
    p.add_argument("--asset", help="gate calibration asset (default: shipped paper levels)")
    p.add_argument("--network")
    p.add_argument("--threshold", type=float, action="append")
    p.add_argument("--report")
    p.set_defaults(func=cmd_logic)

    p = sub.add_parser("calibrate", help="fit coefficients to target output levels")
    p.add_argument("--network")
    p.add_argument("--pair", default=None)
    p.add_argument("--material")
    p.add_argument("--cell-a", required=True)
    p.add_argument("--cell-b", required=True)
    p.add_argument("--targets", required=True, help="O00,O01,O10,O11 in Ohm")
    p.add_argument("--tolerance", type=float, default=0.05)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_calibrate)

    p = sub.add_parser("serve", help="start the HTTP session service")
    p.add_argument("--host", default="127.0.0.1")
    p.add_argument(
        "--port", type=int, default=int(os.environ.get(DEFAULT_PORT_ENV, "8000"))
    )
    p.set_defaults(func=cmd_serve)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        config = _load_config(args.config)
        return args.func(args, config)
    except LiquidSkinError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except (OSError, json.JSONDecodeError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
