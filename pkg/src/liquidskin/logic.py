"""Mechano-electrical Boolean logic on top of the impedance simulator.

Two pressed cells act as binary inputs x and y; the differential reactance at
the probe frequency, read against the pre-experiment baseline, is the analog
output level for each input combination.  A threshold turns the four levels
into a truth table, and a calibration routine fits the perturbation
coefficients (plus the slow measurement drift) so the levels land on
published targets.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, replace

import numpy as np
from scipy.optimize import minimize

from .circuit import MaterialParams
from .errors import (
    CalibrationInfeasibleError,
    DomainError,
    ProtocolWindowError,
)
from .geometry import CellId, Network
from .stimulus import (
    DisturbanceSettings,
    PerturbCoeffs,
    Press,
    Scenario,
    TimeSeries,
    simulate_scenario,
)

#: Fraction of each phase treated as settled, measured from the end.
STEADY_FRACTION = 0.6
#: Hard cap on forward simulations during calibration.
CALIBRATION_BUDGET = 5000


class _Converged(Exception):
    """Internal signal: the calibration search already satisfies tolerance."""


@dataclass(frozen=True)
class GateOutputs:
    """Differential-reactance level per input combination, with spreads."""

    o00_ohm: float
    o01_ohm: float
    o10_ohm: float
    o11_ohm: float
    u00_ohm: float = 0.0
    u01_ohm: float = 0.0
    u10_ohm: float = 0.0
    u11_ohm: float = 0.0
    #: Pre-experiment no-touch level (the post-experiment one is o00_ohm).
    o00_pre_ohm: float = 0.0

    def __post_init__(self):
        values = (self.o00_ohm, self.o01_ohm, self.o10_ohm, self.o11_ohm,
                  self.u00_ohm, self.u01_ohm, self.u10_ohm, self.u11_ohm)
        if not all(np.isfinite(v) for v in values):
            raise DomainError("gate outputs and uncertainties must be finite")

    def levels(self) -> tuple[float, float, float, float]:
        return (self.o00_ohm, self.o01_ohm, self.o10_ohm, self.o11_ohm)

    def separable(self) -> bool:
        """True when no two levels overlap within their summed spreads."""
        pairs = itertools.combinations(
            [(self.o00_ohm, self.u00_ohm), (self.o01_ohm, self.u01_ohm),
             (self.o10_ohm, self.u10_ohm), (self.o11_ohm, self.u11_ohm)], 2)
        return all(abs(a - b) > ua + ub for (a, ua), (b, ub) in pairs)


@dataclass(frozen=True, order=True)
class TruthTable:
    """Boolean function of two inputs, stored as the four output bits."""

    f00: int
    f01: int
    f10: int
    f11: int

    def __post_init__(self):
        if not all(v in (0, 1) for v in (self.f00, self.f01, self.f10, self.f11)):
            raise DomainError("truth table entries must be 0 or 1")

    def as_tuple(self) -> tuple[int, int, int, int]:
        return (self.f00, self.f01, self.f10, self.f11)

    @property
    def name(self) -> str:
        return {
            (0, 0, 0, 0): "const-0", (0, 0, 0, 1): "AND", (0, 1, 0, 1): "y",
            (0, 0, 1, 1): "x", (0, 1, 1, 1): "OR", (1, 1, 1, 1): "const-1",
            (0, 1, 1, 0): "XOR", (1, 0, 0, 1): "XNOR", (1, 1, 1, 0): "NAND",
            (1, 0, 0, 0): "NOR",
        }.get(self.as_tuple(), "f" + "".join(map(str, self.as_tuple())))


@dataclass(frozen=True)
class MultitouchConfig:
    """Timing and disturbance plan for the four-phase two-input protocol."""

    baseline_s: float = 10.0
    phase_s: float = 10.0
    rest_s: float = 20.0
    sample_period_s: float = 0.2
    mass_g: float = 100.0
    probe_frequency_hz: float = 1000.0
    seed: int = 0
    disturbances: DisturbanceSettings = DisturbanceSettings(
        noise_sigma_ohm=2e-4, drift_slope_ohm_per_s=0.0, drift_walk_sigma_ohm=0.0
    )

    def __post_init__(self):
        if min(self.baseline_s, self.phase_s, self.rest_s, self.sample_period_s) <= 0:
            raise DomainError("protocol durations must be positive")

    def total_s(self) -> float:
        return self.baseline_s + 3 * self.phase_s + self.rest_s

    def phase_windows(self) -> dict[str, tuple[float, float]]:
        """Steady (start, end) window per measured quantity."""
        t0 = self.baseline_s
        p = self.phase_s

        def steady(a: float, b: float) -> tuple[float, float]:
            return (b - STEADY_FRACTION * (b - a), b)

        return {
            "baseline": steady(0.0, t0),
            "o10": steady(t0, t0 + p),            # A held alone
            "o11": steady(t0 + p, t0 + 2 * p),    # A and B held
            "o01": steady(t0 + 2 * p, t0 + 3 * p),  # B held alone
            "o00": steady(t0 + 3 * p, self.total_s()),  # all released
        }


def _window_stats(series: TimeSeries, window: tuple[float, float]) -> tuple[float, float]:
    t = series.times()
    mask = (t >= window[0]) & (t <= window[1])
    n = int(mask.sum())
    if n < 2:
        raise ProtocolWindowError(
            f"steady window {window} holds {n} samples; lengthen the phase or "
            "shorten the sample period"
        )
    x = series.reactances()[mask]
    return float(np.mean(x)), float(np.std(x))


def config_from_protocol(protocol: dict) -> MultitouchConfig:
    """Build the protocol config stored in a gate calibration asset."""
    return MultitouchConfig(
        baseline_s=float(protocol["baseline_s"]),
        phase_s=float(protocol["phase_s"]),
        rest_s=float(protocol["rest_s"]),
        sample_period_s=float(protocol["sample_period_s"]),
        mass_g=float(protocol["mass_g"]),
        probe_frequency_hz=float(protocol["probe_frequency_hz"]),
        seed=int(protocol["seed"]),
        disturbances=DisturbanceSettings(
            noise_sigma_ohm=float(protocol["noise_sigma_ohm"]),
            drift_slope_ohm_per_s=float(protocol["drift_slope_ohm_per_s"]),
            drift_walk_sigma_ohm=0.0,
            drift_curvature_ohm_per_s2=float(protocol["drift_curvature_ohm_per_s2"]),
        ),
    )


def multitouch_scenario(
    config: MultitouchConfig, pair, cell_a: CellId, cell_b: CellId
) -> Scenario:
    """Four-phase press schedule: A; A+B; B; rest."""
    t0 = config.baseline_s
    p = config.phase_s
    return Scenario(
        presses=(
            Press(cell_a, config.mass_g, t0, t0 + 2 * p),
            Press(cell_b, config.mass_g, t0 + p, t0 + 3 * p),
        ),
        duration_s=config.total_s(),
        probe_frequency_hz=config.probe_frequency_hz,
        sample_period_s=config.sample_period_s,
        electrode_pair=pair,
        disturbances=config.disturbances,
        seed=config.seed,
    )


def run_multitouch(
    network: Network,
    material: MaterialParams,
    coeffs: PerturbCoeffs,
    pair,
    cell_a: CellId,
    cell_b: CellId,
    config: MultitouchConfig | None = None,
) -> tuple[GateOutputs, TimeSeries]:
    """Execute the two-input protocol and read the four output levels.

    Levels are reactance means over each phase's steady window, relative to
    the pre-experiment baseline; the no-touch level O00 is read after the
    final release (the pre-experiment one is reported alongside).
    """
    if cell_a == cell_b:
        raise DomainError("the two input cells must differ")
    config = config or MultitouchConfig()
    series = simulate_scenario(
        network, material, coeffs, multitouch_scenario(config, pair, cell_a, cell_b)
    )
    windows = config.phase_windows()
    base, u_base = _window_stats(series, windows["baseline"])
    levels = {}
    spreads = {}
    for key in ("o00", "o01", "o10", "o11"):
        mean, std = _window_stats(series, windows[key])
        levels[key] = mean - base
        spreads[key] = std
    outputs = GateOutputs(
        o00_ohm=levels["o00"], o01_ohm=levels["o01"],
        o10_ohm=levels["o10"], o11_ohm=levels["o11"],
        u00_ohm=spreads["o00"], u01_ohm=spreads["o01"],
        u10_ohm=spreads["o10"], u11_ohm=spreads["o11"],
        o00_pre_ohm=0.0,
    )
    return outputs, series


def threshold_gate(outputs: GateOutputs, threshold_ohm: float) -> TruthTable:
    """Binarize the four levels: output is 1 exactly when O > T."""
    if not np.isfinite(threshold_ohm):
        raise DomainError("threshold must be finite")
    return TruthTable(
        f00=int(outputs.o00_ohm > threshold_ohm),
        f01=int(outputs.o01_ohm > threshold_ohm),
        f10=int(outputs.o10_ohm > threshold_ohm),
        f11=int(outputs.o11_ohm > threshold_ohm),
    )


def realizable_gates(outputs: GateOutputs) -> set[TruthTable]:
    """Every truth table reachable as the threshold sweeps the real line."""
    levels = sorted(set(outputs.levels()))
    thresholds = [levels[0] - 1.0]
    thresholds += [(a + b) / 2 for a, b in zip(levels, levels[1:])]
    # At T == max level the strict rule yields all zeros: the constant-0 table.
    thresholds.append(levels[-1])
    return {threshold_gate(outputs, t) for t in thresholds}


# ---------------------------------------------------------------------------
# Calibration


def _drift_design(config: MultitouchConfig, series_times: np.ndarray):
    """Per-window mean values of t and t^2 for the drift least squares."""
    rows = {}
    for key, (a, b) in config.phase_windows().items():
        mask = (series_times >= a) & (series_times <= b)
        t = series_times[mask]
        rows[key] = (float(np.mean(t)), float(np.mean(t * t)))
    return rows


def fit_protocol_drift(
    clean_levels: dict[str, float],
    targets: dict[str, float],
    config: MultitouchConfig,
    series_times: np.ndarray,
) -> tuple[DisturbanceSettings, float]:
    """Least-squares drift slope explaining target minus model levels.

    A linear drift contributes ``a * mean(t)`` to each steady window, read
    relative to the baseline window; the max-abs residual of the 4x1 system
    is returned with the fitted settings.
    """
    rows = _drift_design(config, series_times)
    m1b, _ = rows["baseline"]
    keys = ("o00", "o01", "o10", "o11")
    design = np.array([[rows[k][0] - m1b] for k in keys])
    rhs = np.array([targets[k] - clean_levels[k] for k in keys])
    (a,), *_ = np.linalg.lstsq(design, rhs, rcond=None)
    residual = float(np.max(np.abs(design @ np.array([a]) - rhs)))
    fitted = replace(DisturbanceSettings.none(), drift_slope_ohm_per_s=float(a))
    return fitted, residual


@dataclass(frozen=True)
class CalibrationResult:
    """Outcome of fitting coefficients and drift to target levels."""

    coeffs: PerturbCoeffs
    disturbances: DisturbanceSettings
    outputs: GateOutputs
    residual_ohm: float
    evaluations: int


def calibrate(
    network: Network,
    material: MaterialParams,
    pair,
    cell_a: CellId,
    cell_b: CellId,
    target_outputs: GateOutputs,
    tolerance_ohm: float,
    *,
    base_coeffs: PerturbCoeffs | None = None,
    config: MultitouchConfig | None = None,
    budget: int = CALIBRATION_BUDGET,
) -> CalibrationResult:
    """Fit the press coefficients and drift so the protocol hits the targets.

    The inner step is exact: for any candidate coefficient pair, the slow
    drift (slope and curvature) is solved in closed form against all four
    targets.  The outer derivative-free search adjusts the capacitance
    squeeze of cell A's family and the inductance factor of cell B's family
    in log space.  Deterministic: fixed start point, bounded evaluation
    count, no randomness.
    """
    if tolerance_ohm <= 0:
        raise CalibrationInfeasibleError(
            float("inf"), "tolerance must exceed the measurement noise floor"
        )
    base = base_coeffs or PerturbCoeffs()
    config = config or MultitouchConfig()
    quiet = replace(config, disturbances=DisturbanceSettings.none())
    targets = {
        "o00": target_outputs.o00_ohm, "o01": target_outputs.o01_ohm,
        "o10": target_outputs.o10_ohm, "o11": target_outputs.o11_ohm,
    }
    evals = 0
    best: tuple[float, PerturbCoeffs, DisturbanceSettings] | None = None

    def objective(log_factors: np.ndarray) -> float:
        nonlocal evals, best
        if evals >= budget:
            # Flat wall: any further probing is wasted, stop improving.
            return best[0] if best else float("inf")
        evals += 1
        grad_c, blue, synergy = np.clip(np.exp(log_factors), 1e-9, 1e3)
        coeffs = replace(
            base,
            gradient_squeeze_capacitance_factor=1.0 + grad_c,
            blue_inductance_factor=1.0 + blue,
            multi_press_synergy=synergy,
        )
        outputs, series = run_multitouch(
            network, material, coeffs, pair, cell_a, cell_b, quiet
        )
        clean = {
            "o00": outputs.o00_ohm, "o01": outputs.o01_ohm,
            "o10": outputs.o10_ohm, "o11": outputs.o11_ohm,
        }
        disturbances, residual = fit_protocol_drift(clean, targets, config, series.times())
        if best is None or residual < best[0]:
            best = (residual, coeffs, disturbances)
        if residual <= 0.5 * tolerance_ohm:
            raise _Converged
        return residual

    start = np.log(np.array([
        max(base.gradient_squeeze_capacitance_factor - 1.0, 1e-3),
        max(base.blue_inductance_factor - 1.0, 1e-3),
        max(base.multi_press_synergy, 1e-2),
    ]))
    try:
        # Powell with restarts from the incumbent: each restart resets the
        # direction set, which un-sticks the search when it stalls early.
        for _ in range(8):
            if evals >= budget:
                break
            minimize(
                objective, start, method="Powell",
                options={"maxfev": budget - evals, "xtol": 1e-8, "ftol": 1e-14},
            )
            next_start = np.log(np.clip(np.array([
                best[1].gradient_squeeze_capacitance_factor - 1.0,
                best[1].blue_inductance_factor - 1.0,
                best[1].multi_press_synergy,
            ]), 1e-9, None))
            if np.allclose(next_start, start, rtol=0, atol=1e-10):
                break
            start = next_start
    except _Converged:
        pass  # hit tolerance early; convergence is judged below, not by scipy
    residual, coeffs, disturbances = best
    if residual > tolerance_ohm:
        raise CalibrationInfeasibleError(
            residual,
            f"best residual {residual:.4g} above tolerance {tolerance_ohm:.4g} "
            f"after {evals} evaluations",
        )
    check_config = replace(config, disturbances=replace(
        disturbances, noise_sigma_ohm=config.disturbances.noise_sigma_ohm
    ))
    outputs, _ = run_multitouch(network, material, coeffs, pair, cell_a, cell_b, check_config)
    return CalibrationResult(coeffs, disturbances, outputs, residual, evals)
