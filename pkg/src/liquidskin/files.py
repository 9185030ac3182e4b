"""Persistence: network / scenario / coefficient documents and CSV artifacts.

All JSON documents carry a ``schemaVersion`` and reject unknown fields, so a
tampered calibration asset fails loudly instead of silently drifting.  Saves
are canonical (sorted keys, repr-precision floats), which makes save -> load
-> save byte-identical.
"""

from __future__ import annotations

import io
import json
from importlib import resources
from pathlib import Path

from .circuit import ComplexZ, MaterialParams
from .errors import SchemaError
from .geometry import CellId, Network, Point2, delaunay
from .stimulus import DisturbanceSettings, PerturbCoeffs, Press, Scenario, TimeSeries

NETWORK_SCHEMA_VERSION = 1
SCENARIO_SCHEMA_VERSION = 1
COEFFS_SCHEMA_VERSION = 1
GATE_ASSET_SCHEMA_VERSION = 1
MATERIAL_SCHEMA_VERSION = 1

ELECTRODE_NAMES = ("BL", "C", "TR")


def _require(doc: dict, fields: dict, where: str) -> dict:
    """Check exact field set and return the document."""
    missing = set(fields) - set(doc)
    unknown = set(doc) - set(fields)
    if missing:
        raise SchemaError(f"{where}: missing field {sorted(missing)[0]!r}")
    if unknown:
        raise SchemaError(f"{where}: unknown field {sorted(unknown)[0]!r}")
    for name, types in fields.items():
        if types is not None and not isinstance(doc[name], types):
            raise SchemaError(f"{where}: field {name!r} has wrong type")
    return doc


def canonical_json(doc) -> str:
    """Stable JSON text: sorted keys, two-space indent, trailing newline."""
    return json.dumps(doc, indent=2, sort_keys=True) + "\n"


_dump = canonical_json


# ---------------------------------------------------------------------------
# Network documents


def network_to_doc(network: Network) -> dict:
    tri = network.triangulation
    return {
        "schemaVersion": NETWORK_SCHEMA_VERSION,
        "nodes": [
            {"id": i, "x_mm": p.x, "y_mm": p.y}
            | ({"label": tri.labels[i]} if tri.labels[i] else {})
            for i, p in enumerate(tri.nodes)
        ],
        "edges": [{"a": a, "b": b} for (a, b) in tri.edges],
        "electrodes": dict(network.electrodes),
        "channel": {
            "width_mm": network.channel_width_mm,
            "depth_mm": network.channel_depth_mm,
        },
    }


def network_from_doc(doc: dict) -> Network:
    _require(
        doc,
        {
            "schemaVersion": int,
            "nodes": list,
            "edges": list,
            "electrodes": dict,
            "channel": dict,
        },
        "network",
    )
    if doc["schemaVersion"] != NETWORK_SCHEMA_VERSION:
        raise SchemaError(f"network: unsupported schemaVersion {doc['schemaVersion']}")
    points, labels = [], []
    for i, node in enumerate(doc["nodes"]):
        fields = {"id": int, "x_mm": (int, float), "y_mm": (int, float)}
        if "label" in node:
            fields["label"] = str
        _require(node, fields, f"network.nodes[{i}]")
        if node["id"] != i:
            raise SchemaError(f"network.nodes[{i}]: id must equal position, got {node['id']}")
        points.append(Point2(float(node["x_mm"]), float(node["y_mm"])))
        labels.append(node.get("label"))
    tri = delaunay(points, labels)
    stored = {tuple(sorted((e["a"], e["b"]))) for e in (
        _require(e, {"a": int, "b": int}, f"network.edges[{i}]")
        for i, e in enumerate(doc["edges"])
    )}
    if stored != set(tri.edges):
        raise SchemaError("network: stored edges do not match the Delaunay triangulation of the nodes")
    _require(doc["channel"], {"width_mm": (int, float), "depth_mm": (int, float)}, "network.channel")
    electrodes = doc["electrodes"]
    for name in electrodes:
        if name not in ELECTRODE_NAMES:
            raise SchemaError(f"network.electrodes: unknown field {name!r}")
    return Network(
        triangulation=tri,
        channel_width_mm=float(doc["channel"]["width_mm"]),
        channel_depth_mm=float(doc["channel"]["depth_mm"]),
        electrodes={k: int(v) for k, v in electrodes.items()},
    )


def save_network(network: Network, path: str | Path) -> None:
    Path(path).write_text(_dump(network_to_doc(network)))


def load_network(path: str | Path) -> Network:
    return network_from_doc(_load_json(path, "network"))


def default_network() -> Network:
    """The versioned default network asset (approximate stand-in geometry)."""
    text = resources.files("liquidskin").joinpath("assets/default_network.json").read_text()
    return network_from_doc(json.loads(text))


def _load_json(path: str | Path, what: str) -> dict:
    try:
        return json.loads(Path(path).read_text())
    except json.JSONDecodeError as exc:
        raise SchemaError(f"{what} file {path}: not valid JSON ({exc})") from exc


# ---------------------------------------------------------------------------
# Scenario documents


def scenario_to_doc(scenario: Scenario) -> dict:
    return {
        "schemaVersion": SCENARIO_SCHEMA_VERSION,
        "presses": [
            {"cell": p.cell.label, "mass_g": p.mass_g, "t_on_s": p.t_on_s, "t_off_s": p.t_off_s}
            for p in scenario.presses
        ],
        "duration_s": scenario.duration_s,
        "probe_frequency_hz": scenario.probe_frequency_hz,
        "probe_amplitude_v": scenario.probe_amplitude_v,
        "sample_period_s": scenario.sample_period_s,
        "electrode_pair": list(scenario.electrode_pair),
        "noise_sigma_ohm": scenario.disturbances.noise_sigma_ohm,
        "drift_slope_ohm_per_s": scenario.disturbances.drift_slope_ohm_per_s,
        "drift_walk_sigma_ohm": scenario.disturbances.drift_walk_sigma_ohm,
        "drift_curvature_ohm_per_s2": scenario.disturbances.drift_curvature_ohm_per_s2,
        "seed": scenario.seed,
    }


def scenario_from_doc(doc: dict) -> Scenario:
    _require(
        doc,
        {
            "schemaVersion": int,
            "presses": list,
            "duration_s": (int, float),
            "probe_frequency_hz": (int, float),
            "probe_amplitude_v": (int, float),
            "sample_period_s": (int, float),
            "electrode_pair": list,
            "noise_sigma_ohm": (int, float),
            "drift_slope_ohm_per_s": (int, float),
            "drift_walk_sigma_ohm": (int, float),
            "drift_curvature_ohm_per_s2": (int, float),
            "seed": int,
        },
        "scenario",
    )
    if doc["schemaVersion"] != SCENARIO_SCHEMA_VERSION:
        raise SchemaError(f"scenario: unsupported schemaVersion {doc['schemaVersion']}")
    presses = []
    for i, p in enumerate(doc["presses"]):
        _require(
            p,
            {"cell": str, "mass_g": (int, float), "t_on_s": (int, float), "t_off_s": (int, float)},
            f"scenario.presses[{i}]",
        )
        presses.append(
            Press(CellId.parse(p["cell"]), float(p["mass_g"]), float(p["t_on_s"]), float(p["t_off_s"]))
        )
    pair = doc["electrode_pair"]
    if len(pair) != 2:
        raise SchemaError("scenario.electrode_pair must list exactly two electrode names")
    return Scenario(
        presses=tuple(presses),
        duration_s=float(doc["duration_s"]),
        probe_frequency_hz=float(doc["probe_frequency_hz"]),
        probe_amplitude_v=float(doc["probe_amplitude_v"]),
        sample_period_s=float(doc["sample_period_s"]),
        electrode_pair=(pair[0], pair[1]),
        disturbances=DisturbanceSettings(
            noise_sigma_ohm=float(doc["noise_sigma_ohm"]),
            drift_slope_ohm_per_s=float(doc["drift_slope_ohm_per_s"]),
            drift_walk_sigma_ohm=float(doc["drift_walk_sigma_ohm"]),
            drift_curvature_ohm_per_s2=float(doc["drift_curvature_ohm_per_s2"]),
        ),
        seed=int(doc["seed"]),
    )


def save_scenario(scenario: Scenario, path: str | Path) -> None:
    Path(path).write_text(_dump(scenario_to_doc(scenario)))


def load_scenario(path: str | Path) -> Scenario:
    return scenario_from_doc(_load_json(path, "scenario"))


# ---------------------------------------------------------------------------
# Coefficient and material documents


_COEFF_FIELDS = (
    "red_path_resistance_factor",
    "gradient_squeeze_resistance_factor",
    "gradient_squeeze_capacitance_factor",
    "green_pump_inductance_factor",
    "blue_inductance_factor",
    "response_time_s",
    "stiffness_scale",
    "multi_press_synergy",
)

_MATERIAL_FIELDS = (
    "conductivity_s_per_m",
    "inductance_per_length_h_per_m",
    "shunt_capacitance_per_area_f_per_m2",
    "contact_resistance_ohm",
    "contact_capacitance_f",
)


def coeffs_to_doc(coeffs: PerturbCoeffs) -> dict:
    return {"schemaVersion": COEFFS_SCHEMA_VERSION} | {
        name: getattr(coeffs, name) for name in _COEFF_FIELDS
    }


def coeffs_from_doc(doc: dict) -> PerturbCoeffs:
    _require(
        doc,
        {"schemaVersion": int} | {name: (int, float) for name in _COEFF_FIELDS},
        "coeffs",
    )
    if doc["schemaVersion"] != COEFFS_SCHEMA_VERSION:
        raise SchemaError(f"coeffs: unsupported schemaVersion {doc['schemaVersion']}")
    return PerturbCoeffs(**{name: float(doc[name]) for name in _COEFF_FIELDS})


def save_coeffs(coeffs: PerturbCoeffs, path: str | Path) -> None:
    Path(path).write_text(_dump(coeffs_to_doc(coeffs)))


def load_coeffs(path: str | Path) -> PerturbCoeffs:
    return coeffs_from_doc(_load_json(path, "coeffs"))


def material_to_doc(material: MaterialParams) -> dict:
    return {name: getattr(material, name) for name in _MATERIAL_FIELDS}


def material_from_doc(doc: dict) -> MaterialParams:
    _require(doc, {name: (int, float) for name in _MATERIAL_FIELDS}, "material")
    return MaterialParams(**{name: float(doc[name]) for name in _MATERIAL_FIELDS})


# ---------------------------------------------------------------------------
# Gate calibration asset


def save_material(material: MaterialParams, path: str | Path) -> None:
    Path(path).write_text(_dump(material_to_doc(material) | {"schemaVersion": MATERIAL_SCHEMA_VERSION}))


def load_material(path: str | Path) -> MaterialParams:
    doc = _load_json(path, "material")
    if doc.get("schemaVersion") != MATERIAL_SCHEMA_VERSION:
        raise SchemaError(f"material: unsupported schemaVersion {doc.get('schemaVersion')!r}")
    return material_from_doc({k: v for k, v in doc.items() if k != "schemaVersion"})


def gate_asset_to_doc(asset: dict) -> dict:
    return {
        "schemaVersion": GATE_ASSET_SCHEMA_VERSION,
        "pair": list(asset["pair"]),
        "cellA": asset["cellA"].label,
        "cellB": asset["cellB"].label,
        "coeffs": coeffs_to_doc(asset["coeffs"]),
        "material": material_to_doc(asset["material"]),
        "protocol": dict(asset["protocol"]),
        "targets": dict(asset.get("targets", {})),
    }


def gate_asset_from_doc(doc: dict) -> dict:
    _require(
        doc,
        {
            "schemaVersion": int,
            "pair": list,
            "cellA": str,
            "cellB": str,
            "coeffs": dict,
            "material": dict,
            "protocol": dict,
            "targets": dict,
        },
        "gate-asset",
    )
    if doc["schemaVersion"] != GATE_ASSET_SCHEMA_VERSION:
        raise SchemaError(f"gate-asset: unsupported schemaVersion {doc['schemaVersion']}")
    return {
        "pair": (doc["pair"][0], doc["pair"][1]),
        "cellA": CellId.parse(doc["cellA"]),
        "cellB": CellId.parse(doc["cellB"]),
        "coeffs": coeffs_from_doc(doc["coeffs"]),
        "material": material_from_doc(doc["material"]),
        "protocol": doc["protocol"],
        "targets": doc["targets"],
    }


def save_gate_asset(asset: dict, path: str | Path) -> None:
    Path(path).write_text(_dump(gate_asset_to_doc(asset)))


def load_gate_asset(path: str | Path) -> dict:
    return gate_asset_from_doc(_load_json(path, "gate-asset"))


def paper_levels_asset() -> dict:
    """The shipped calibration asset reproducing the published gate levels."""
    text = resources.files("liquidskin").joinpath("assets/paper_levels.json").read_text()
    return gate_asset_from_doc(json.loads(text))


# ---------------------------------------------------------------------------
# CSV artifacts


def _fmt(x: float) -> str:
    return repr(float(x))


def sweep_to_csv(rows) -> str:
    out = io.StringIO()
    out.write("freq_hz,R_ohm,X_ohm,Zmod_ohm,Zphase_deg\n")
    for (f, z) in rows:
        out.write(
            f"{_fmt(f)},{_fmt(z.resistance)},{_fmt(z.reactance)},{_fmt(z.modulus)},{_fmt(z.phase_deg)}\n"
        )
    return out.getvalue()


def iv_to_csv(rows) -> str:
    out = io.StringIO()
    out.write("v_volt,i_amp\n")
    for (v, i) in rows:
        out.write(f"{_fmt(v)},{_fmt(i)}\n")
    return out.getvalue()


def series_to_csv(series: TimeSeries) -> str:
    out = io.StringIO()
    out.write("t_s,R_ohm,X_ohm\n")
    for t, s in zip(series.times(), series.samples):
        out.write(f"{_fmt(t)},{_fmt(s.resistance)},{_fmt(s.reactance)}\n")
    return out.getvalue()


def series_from_csv(
    text: str,
    probe_frequency_hz: float = 1000.0,
    electrode_pair: tuple[str, str] = ("BL", "C"),
) -> TimeSeries:
    lines = [ln for ln in text.strip().splitlines() if ln]
    if not lines or lines[0].split(",") != ["t_s", "R_ohm", "X_ohm"]:
        raise SchemaError("series CSV: expected header t_s,R_ohm,X_ohm")
    ts, samples = [], []
    for k, line in enumerate(lines[1:]):
        parts = line.split(",")
        if len(parts) != 3:
            raise SchemaError(f"series CSV row {k + 1}: expected 3 columns")
        t, r, x = (float(p) for p in parts)
        ts.append(t)
        samples.append(ComplexZ(r, x))
    if len(ts) >= 2:
        period = ts[1] - ts[0]
    else:
        period = 1.0
    return TimeSeries(
        t0_s=ts[0] if ts else 0.0,
        sample_period_s=period,
        samples=tuple(samples),
        probe_frequency_hz=probe_frequency_hz,
        electrode_pair=electrode_pair,
    )
