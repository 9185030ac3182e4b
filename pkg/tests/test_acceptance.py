"""Acceptance gate: one test per shipped guarantee, each printing a verdict.

Run with ``pytest tests/test_acceptance.py -v`` to see one pass/fail line per
criterion.  Tolerances here are the product requirements, not test artifacts;
loosening them is a behaviour change.
"""

import sys
import time
from dataclasses import replace

import numpy as np
import pytest

from liquidskin import files
from liquidskin.circuit import (
    AdmittanceSystem,
    EdgeElement,
    impedance,
    log_sweep_frequencies,
    sweep,
)
from liquidskin.cli import main
from liquidskin.errors import CalibrationInfeasibleError
from liquidskin.geometry import delaunay, generate_random_points
from liquidskin.localization import detect_events, localize, signature_table
from liquidskin.logic import (
    MultitouchConfig,
    calibrate,
    config_from_protocol,
    realizable_gates,
    run_multitouch,
    threshold_gate,
)
from liquidskin.stimulus import (
    DisturbanceSettings,
    Press,
    PerturbCoeffs,
    Scenario,
    simulate_scenario,
    subtract_drift,
)


#: Collected verdict lines, echoed by the terminal-summary hook in conftest.
VERDICTS: list[str] = []


def verdict(passed: bool, line: str) -> None:
    text = f"[{'PASS' if passed else 'FAIL'}] {line}"
    VERDICTS.append(text)
    print(text, file=sys.__stdout__, flush=True)
    assert passed, line


# ---------------------------------------------------------------------------
# Geometry


def circumcircles_empty(points, triangles) -> bool:
    P = np.array([[p.x, p.y] for p in points])
    for (a, b, c) in triangles:
        ax, ay = P[a]
        bx, by = P[b]
        cx, cy = P[c]
        d = 2.0 * (ax * (by - cy) + bx * (cy - ay) + cx * (ay - by))
        ux = ((ax**2 + ay**2) * (by - cy) + (bx**2 + by**2) * (cy - ay)
              + (cx**2 + cy**2) * (ay - by)) / d
        uy = ((ax**2 + ay**2) * (cx - bx) + (bx**2 + by**2) * (ax - cx)
              + (cx**2 + cy**2) * (bx - ax)) / d
        r2 = (ax - ux) ** 2 + (ay - uy) ** 2
        dist2 = (P[:, 0] - ux) ** 2 + (P[:, 1] - uy) ** 2
        inside = dist2 < r2 * (1.0 - 1e-9)
        inside[[a, b, c]] = False
        if inside.any():
            return False
    return True


def edges_planar(points, edges) -> bool:
    P = np.array([[p.x, p.y] for p in points])
    E = np.array(edges)
    a, b = P[E[:, 0]], P[E[:, 1]]

    def orient(p, q, r):
        return (q[..., 0] - p[..., 0]) * (r[..., 1] - p[..., 1]) - (
            q[..., 1] - p[..., 1]
        ) * (r[..., 0] - p[..., 0])

    for i in range(len(E)):
        shares = (E[:, 0] == E[i, 0]) | (E[:, 1] == E[i, 0]) | \
                 (E[:, 0] == E[i, 1]) | (E[:, 1] == E[i, 1])
        shares[: i + 1] = True
        others = ~shares
        if not others.any():
            continue
        c, d = a[others], b[others]
        o1 = orient(a[i], b[i], c) * orient(a[i], b[i], d)
        o2 = orient(c, d, a[i][None, :]) * orient(c, d, b[i][None, :])
        if np.any((o1 < -1e-12) & (o2 < -1e-12)):
            return False
    return True


def test_delaunay_correctness():
    start = time.perf_counter()
    rng = np.random.default_rng(2024)
    checked = 0
    ok = True
    for seed in range(200):
        count = int(rng.integers(4, 51))
        points = generate_random_points(seed, count, min_separation=4.0)
        tri = delaunay(points)
        ok = ok and circumcircles_empty(points, tri.triangles)
        ok = ok and edges_planar(points, tri.edges)
        checked += 1
    elapsed = time.perf_counter() - start
    verdict(
        ok and elapsed < 10.0,
        f"Delaunay correctness: {checked} seeded sets, empty-circumcircle and "
        f"planarity 100%, {elapsed:.1f} s (< 10 s)",
    )


# ---------------------------------------------------------------------------
# Circuit


def test_dc_oracle_equivalence():
    rng = np.random.default_rng(0)
    worst = 0.0
    for _ in range(100):
        n = int(rng.integers(4, 21))
        edges = [(i, i + 1) for i in range(n - 1)]
        for a, b in rng.integers(0, n, size=(n, 2)):
            if a != b:
                edges.append((int(min(a, b)), int(max(a, b))))
        system = AdmittanceSystem(
            node_count=n,
            edge_nodes=tuple(edges),
            elements=tuple(
                EdgeElement(float(rng.uniform(1.0, 100.0)), 0.0, 0.0) for _ in edges
            ),
            electrodes={"A": 0, "B": n - 1},
            contact_resistance_ohm=0.0,
            contact_capacitance_f=0.0,
        )
        lap = np.zeros((n, n))
        for (i, j), e in zip(system.edge_nodes, system.elements):
            g = 1.0 / e.series_resistance_ohm
            lap[i, i] += g
            lap[j, j] += g
            lap[i, j] -= g
            lap[j, i] -= g
        pinv = np.linalg.pinv(lap)
        expected = pinv[0, 0] + pinv[n - 1, n - 1] - 2 * pinv[0, n - 1]
        got = impedance(system, ("A", "B"), 0.0).resistance
        worst = max(worst, abs(got - expected) / expected)
    verdict(
        worst <= 1e-9,
        f"DC oracle equivalence: 100 random resistive networks, worst relative "
        f"error {worst:.2e} (<= 1e-9)",
    )


def test_reciprocity_and_passivity(system):
    worst = 0.0
    passive = True
    for f, z in sweep(system, ("BL", "C"), log_sweep_frequencies()):
        swapped = impedance(system, ("C", "BL"), f)
        worst = max(worst, abs(z.as_complex - swapped.as_complex) / z.modulus)
        passive = passive and z.resistance >= 0.0
    verdict(
        worst <= 1e-12 and passive,
        f"Reciprocity and passivity: 50-point sweep 20 Hz-2 MHz, worst relative "
        f"asymmetry {worst:.2e} (<= 1e-12), Re(Z) >= 0 everywhere",
    )


def test_spectral_crossover(system):
    x_lo = impedance(system, ("BL", "C"), 100.0).reactance
    x_hi = impedance(system, ("BL", "C"), 1e6).reactance
    verdict(
        x_lo < 0.0 < x_hi,
        f"Spectral crossover: X(100 Hz) = {x_lo:.2f} Ohm < 0, "
        f"X(1 MHz) = {x_hi:.2f} Ohm > 0",
    )


# ---------------------------------------------------------------------------
# Localization


def disturbance_offsets(network, material, coeffs, disturbances, seed, count):
    """Per-sample additive (dR, dX) of a seeded disturbance, press-independent."""
    from liquidskin.stimulus import ScenarioEngine

    scenario = Scenario(
        presses=(), duration_s=14.0, disturbances=disturbances, seed=seed
    )
    engine = ScenarioEngine(network, material, coeffs, scenario)
    return [engine.disturbance(k) for k in range(count)]


def round_trip(series, offsets, signatures, cell, network, material, coeffs):
    from liquidskin.circuit import ComplexZ

    noisy = replace(
        series,
        samples=tuple(
            ComplexZ(s.resistance + dr, s.reactance + dx)
            for s, (dr, dx) in zip(series.samples, offsets)
        ),
    )
    corrected = subtract_drift(noisy, [(0.0, 2.5), (11.0, 14.0)])
    events = detect_events(corrected)
    if len(events) != 1:
        return False, False
    try:
        result = localize(
            events[0], network, ("BL", "C"), coeffs, material, signatures=signatures
        )
    except Exception:
        return False, False
    return result.family is signatures[cell][0], cell in result.top(3)


def test_taxonomy_round_trip(network, material, coeffs):
    start = time.perf_counter()
    signatures = signature_table(network, material, coeffs, ("BL", "C"))
    cells = sorted(signatures)
    # The press response is deterministic; noise and drift are additive.
    # Simulate each cell's clean series once and overlay the per-seed
    # disturbances, which are the same for every cell.
    clean = {}
    for cell in cells:
        scenario = Scenario(
            presses=(Press(cell, 100.0, 3.0, 8.0),),
            duration_s=14.0,
            disturbances=DisturbanceSettings.none(),
        )
        clean[cell] = simulate_scenario(network, material, coeffs, scenario)
    count = len(clean[cells[0]].samples)

    noiseless = disturbance_offsets(
        network, material, coeffs,
        replace(DisturbanceSettings(), noise_sigma_ohm=0.0), 0, count,
    )
    fam_ok = top_ok = 0
    for cell in cells:
        f, t = round_trip(
            clean[cell], noiseless, signatures, cell, network, material, coeffs
        )
        fam_ok += f
        top_ok += t

    noisy_ok = total = 0
    for seed in range(5):
        offsets = disturbance_offsets(
            network, material, coeffs, DisturbanceSettings(), seed, count
        )
        for cell in cells:
            _, t = round_trip(
                clean[cell], offsets, signatures, cell, network, material, coeffs
            )
            noisy_ok += t
            total += 1
    elapsed = time.perf_counter() - start
    rate = noisy_ok / total
    verdict(
        fam_ok == 320 and top_ok == 320 and rate >= 0.90 and elapsed < 60.0,
        f"Taxonomy round trip: noiseless family {fam_ok}/320, top-3 {top_ok}/320; "
        f"noisy top-3 {rate:.1%} over 5 seeds (>= 90%); {elapsed:.1f} s (< 60 s)",
    )


def test_drift_correction(network, material, coeffs):
    scenario = Scenario(presses=(), duration_s=60.0, seed=3)
    series = simulate_scenario(network, material, coeffs, scenario)
    corrected = subtract_drift(series, [(0.0, 60.0)])
    r = corrected.resistances()
    t = corrected.times()
    mean = float(np.mean(r))
    slope = float(np.polyfit(t, r, 1)[0])
    twice = subtract_drift(corrected, [(0.0, 60.0)])
    idempotent = np.allclose(twice.resistances(), r, atol=1e-9)
    verdict(
        abs(mean) < 0.01 and abs(slope) < 0.001 and idempotent,
        f"Drift correction: corrected |mean| {abs(mean):.2e} Ohm (< 0.01), "
        f"|slope| {abs(slope):.2e} Ohm/s (< 0.001), idempotent",
    )


# ---------------------------------------------------------------------------
# Logic


def test_logic_levels(network):
    asset = files.paper_levels_asset()
    outputs, _ = run_multitouch(
        network, asset["material"], asset["coeffs"], asset["pair"],
        asset["cellA"], asset["cellB"], config_from_protocol(asset["protocol"]),
    )
    targets = (-1.03, 5.79, 0.13, 8.03)
    levels_ok = all(
        abs(level - want) <= 0.05 for level, want in zip(outputs.levels(), targets)
    )
    y_ok = threshold_gate(outputs, 0.13).as_tuple() == (0, 1, 0, 1)
    and_ok = threshold_gate(outputs, 5.79).as_tuple() == (0, 0, 0, 1)
    gates = {g.name for g in realizable_gates(outputs)}
    gates_ok = gates == {"const-0", "AND", "y", "OR", "const-1"}
    shown = ", ".join(f"{v:+.2f}" for v in outputs.levels())
    verdict(
        levels_ok and y_ok and and_ok and gates_ok,
        f"Logic levels: asset gives ({shown}) Ohm within +/-0.05 of "
        f"(-1.03, +5.79, +0.13, +8.03); T=0.13 -> y, T=5.79 -> AND; "
        f"realizable set {sorted(gates)}",
    )


def test_calibration_self_inversion(network, material, pair):
    config = MultitouchConfig(
        baseline_s=3.0, phase_s=3.0, rest_s=6.0, sample_period_s=0.5,
        disturbances=DisturbanceSettings(noise_sigma_ohm=0.0,
                                         drift_slope_ohm_per_s=0.01),
    )
    true_coeffs = PerturbCoeffs(
        gradient_squeeze_capacitance_factor=1.3,
        blue_inductance_factor=1.5,
        multi_press_synergy=0.08,
    )
    cell_a = files.paper_levels_asset()["cellA"]
    cell_b = files.paper_levels_asset()["cellB"]
    targets, _ = run_multitouch(
        network, material, true_coeffs, pair, cell_a, cell_b, config
    )
    result = calibrate(
        network, material, pair, cell_a, cell_b, targets,
        tolerance_ohm=1e-3, config=config,
    )
    worst = max(
        abs(got - want) for got, want in zip(result.outputs.levels(), targets.levels())
    )
    with pytest.raises(CalibrationInfeasibleError):
        calibrate(
            network, material, pair, cell_a, cell_b, targets,
            tolerance_ohm=0.0, config=config,
        )
    verdict(
        worst <= 1e-3 and result.evaluations <= 5000,
        f"Calibration self-inversion: worst level error {worst:.2e} Ohm "
        f"(<= 1e-3) in {result.evaluations} evaluations (<= 5000); "
        f"zero tolerance rejected as infeasible",
    )


# ---------------------------------------------------------------------------
# Determinism


def test_determinism(tmp_path):
    def pipeline(out_dir):
        out_dir.mkdir()
        net = out_dir / "network.json"
        main(["gen-network", "--seed", "9", "--count", "70", "--out", str(net)])
        scenario = Scenario(
            presses=(Press(files.paper_levels_asset()["cellA"], 100.0, 3.0, 8.0),),
            duration_s=14.0,
            seed=5,
        )
        spath = out_dir / "scenario.json"
        files.save_scenario(scenario, spath)
        csv = out_dir / "series.csv"
        main(["simulate", "--scenario", str(spath), "--csv", str(csv)])
        report = out_dir / "report.json"
        main(["localize", "--series", str(csv), "--quiescent", "0,2.5;11,14",
              "--report", str(report)])
        return [net, spath, csv, report]

    first = pipeline(tmp_path / "run1")
    second = pipeline(tmp_path / "run2")
    identical = all(a.read_bytes() == b.read_bytes() for a, b in zip(first, second))
    verdict(
        identical,
        "Determinism: seeded generate -> simulate -> localize pipeline is "
        "byte-identical across two runs",
    )
