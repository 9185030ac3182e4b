"""Pressure stimuli and their electrical consequences.

A press on a checkerboard cell perturbs the lumped parameters of the channels
it reaches, according to the cell's geometric response family:

* RED      - the cell sits on the conductive path between the electrodes;
             pressing shortens the effective path, so resistance dips.
* GRADIENT - the cell sits on the straight corridor between the electrodes;
             squeezing raises channel resistance, and the layered compression
             of the polymers raises the series interface capacitance of the
             measuring path (which is what lifts the reactance).
* GREEN    - the cell crosses an ordinary duct; pumping the liquid changes
             the duct's inductive behaviour, with resistance untouched.
* BLUE     - everything else; the dominant effect is on inductance with the
             opposite sign of GREEN.

Which parameter moves, and in which direction, is fixed by the family; the
magnitudes are calibration assets.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field, replace

import numpy as np
from scipy.sparse import csr_matrix
from scipy.sparse.csgraph import dijkstra

from .circuit import AdmittanceSystem, ComplexZ, EdgeElement, MaterialParams, impedance
from .errors import DomainError, InsufficientBaselineError
from .geometry import (
    CellId,
    Network,
    Point2,
    cell_rectangle,
    edges_under_cell,
    segment_point_distance,
    segment_rect_distance,
)


class Family(enum.Enum):
    """The four qualitative response families."""

    RED = "RED"
    BLUE = "BLUE"
    GRADIENT = "GRADIENT"
    GREEN = "GREEN"


@dataclass(frozen=True)
class Press:
    """A timed weight placed on one cell."""

    cell: CellId
    mass_g: float = 100.0
    t_on_s: float = 0.0
    t_off_s: float = 5.0

    def __post_init__(self):
        if self.mass_g <= 0:
            raise DomainError("press mass must be positive")
        if not self.t_on_s < self.t_off_s:
            raise DomainError("press must satisfy t_on < t_off")


@dataclass(frozen=True)
class PerturbCoeffs:
    """Per-family multiplicative sensitivities at 100 g and full activation.

    The factors and time constant are calibration assets validated by the
    signature-direction tests, not measured constants.
    """

    red_path_resistance_factor: float = 0.75
    gradient_squeeze_resistance_factor: float = 2.0
    gradient_squeeze_capacitance_factor: float = 1.1
    green_pump_inductance_factor: float = 0.35
    blue_inductance_factor: float = 2.2
    response_time_s: float = 0.3
    stiffness_scale: float = 1.0
    #: Extra squeeze of the electrode interface when presses overlap in time.
    multi_press_synergy: float = 0.0

    def __post_init__(self):
        for name in (
            "red_path_resistance_factor",
            "gradient_squeeze_resistance_factor",
            "gradient_squeeze_capacitance_factor",
            "green_pump_inductance_factor",
            "blue_inductance_factor",
        ):
            v = getattr(self, name)
            if not (v > 0 and math.isfinite(v)):
                raise DomainError(f"{name} must be finite and positive")
        if self.gradient_squeeze_resistance_factor < 1 or self.gradient_squeeze_capacitance_factor < 1:
            raise DomainError("gradient squeeze factors must be at least 1")
        if self.red_path_resistance_factor > 1:
            raise DomainError("red path resistance factor must not exceed 1")
        if not self.multi_press_synergy >= 0:
            raise DomainError("multi-press synergy must be non-negative")
        if not self.response_time_s > 0:
            raise DomainError("response time constant must be positive")
        if not self.stiffness_scale > 0:
            raise DomainError("stiffness scale must be positive")


@dataclass(frozen=True)
class DisturbanceSettings:
    """Measurement drift and noise added on top of the solved impedance."""

    noise_sigma_ohm: float = 2e-4
    drift_slope_ohm_per_s: float = 0.002
    drift_walk_sigma_ohm: float = 0.0
    drift_curvature_ohm_per_s2: float = 0.0

    @classmethod
    def none(cls) -> "DisturbanceSettings":
        return cls(0.0, 0.0, 0.0, 0.0)


@dataclass(frozen=True)
class Scenario:
    """A timed measurement run: presses, probe settings, disturbances."""

    presses: tuple[Press, ...]
    duration_s: float
    probe_frequency_hz: float = 1000.0
    probe_amplitude_v: float = 0.1
    sample_period_s: float = 0.2
    electrode_pair: tuple[str, str] = ("BL", "C")
    disturbances: DisturbanceSettings = field(default_factory=DisturbanceSettings)
    seed: int = 0

    def __post_init__(self):
        if self.sample_period_s <= 0:
            raise DomainError("sample period must be positive")
        if not 20.0 <= self.probe_frequency_hz <= 2e6:
            raise DomainError("probe frequency must lie within the 20 Hz - 2 MHz sweep range")
        if self.duration_s <= 0:
            raise DomainError("scenario duration must be positive")


@dataclass(frozen=True)
class TimeSeries:
    """Uniformly sampled complex impedance at the probe frequency."""

    t0_s: float
    sample_period_s: float
    samples: tuple[ComplexZ, ...]
    probe_frequency_hz: float = 1000.0
    electrode_pair: tuple[str, str] = ("BL", "C")

    def times(self) -> np.ndarray:
        return self.t0_s + self.sample_period_s * np.arange(len(self.samples))

    def resistances(self) -> np.ndarray:
        return np.array([s.resistance for s in self.samples])

    def reactances(self) -> np.ndarray:
        return np.array([s.reactance for s in self.samples])


# ---------------------------------------------------------------------------
# Family classification

#: Edges shorter than this are hub links and never produce GREEN output.
HUB_LENGTH_MM = 25.0
#: Edges passing closer than this to an active electrode never produce GREEN output.
ELECTRODE_INFLUENCE_MM = 30.0
#: Half-width of the inter-electrode corridor that yields GRADIENT output.
CORRIDOR_HALF_WIDTH_MM = 10.0
#: A press reaches channels up to this far from its cell (through the elastomer).
PRESS_INFLUENCE_MM = 60.0
#: Decay length of the press influence outside the cell square.
PRESS_DECAY_MM = 20.0


def shortest_conductive_path(network: Network, pair) -> list[int]:
    """Edge indices of the least-resistance path between the pair's electrodes."""
    n = len(network.nodes)
    rows, cols, data = [], [], []
    for (a, b) in network.edges:
        L = network.nodes[a].distance_to(network.nodes[b])
        rows += [a, b]
        cols += [b, a]
        data += [L, L]
    graph = csr_matrix((data, (rows, cols)), shape=(n, n))
    src = network.electrodes[pair[0]]
    dst = network.electrodes[pair[1]]
    _, predecessors = dijkstra(graph, indices=src, return_predecessors=True)
    if predecessors[dst] < 0 and dst != src:
        return []
    path_edges = []
    v = dst
    while v != src:
        u = int(predecessors[v])
        path_edges.append(network.triangulation.edge_index(u, v))
        v = u
    return path_edges[::-1]


def classify_cell_family(network: Network, pair, cell: CellId) -> Family:
    """Geometric response family of ``cell`` for the active electrode pair."""
    rect = cell_rectangle(cell)
    e1 = network.electrode_point(pair[0])
    e2 = network.electrode_point(pair[1])
    if segment_rect_distance(e1, e2, rect) <= CORRIDOR_HALF_WIDTH_MM:
        return Family.GRADIENT
    under = edges_under_cell(network, cell)
    under_idx = {i for (i, _) in under}
    if under_idx & set(shortest_conductive_path(network, pair)):
        return Family.RED
    for i in under_idx:
        if network.edge_length_mm(i) < HUB_LENGTH_MM:
            continue
        p, q = network.edge_endpoints(i)
        if any(
            segment_point_distance(p, q, network.electrode_point(name)) < ELECTRODE_INFLUENCE_MM
            for name in pair
        ):
            continue
        return Family.GREEN
    return Family.BLUE


def family_map(network: Network, pair) -> dict[CellId, Family]:
    from .geometry import all_cells

    return {c: classify_cell_family(network, pair, c) for c in all_cells()}


# ---------------------------------------------------------------------------
# Perturbation


def press_edge_weights(network: Network, cell: CellId) -> dict[int, float]:
    """How strongly a press on ``cell`` couples into each channel.

    Channels under the cell are weighted by the fraction of their length the
    cell covers; channels nearby (pressure spreads through the elastomer) get
    an exponentially decaying weight.  Every cell therefore has a distinct
    weight vector, which is what makes cells along one duct distinguishable.
    """
    rect = cell_rectangle(cell)
    half = network.channel_width_mm / 2.0
    weights: dict[int, float] = {}
    under = {i: seg for (i, seg) in edges_under_cell(network, cell)}
    for i in range(len(network.edges)):
        p, q = network.edge_endpoints(i)
        d = segment_rect_distance(p, q, rect)
        if d > PRESS_INFLUENCE_MM + half:
            continue
        length = network.edge_length_mm(i)
        if i in under:
            a, b = under[i]
            w = max(a.distance_to(b), 1.0) / length
        else:
            w = (10.0 / length) * math.exp(-(d - half) / PRESS_DECAY_MM)
        if w > 1e-6:
            weights[i] = min(w, 1.0)
    return weights


def corridor_coverage(network: Network, pair, cell: CellId) -> float:
    """Fraction of the inter-electrode segment a press on ``cell`` compresses.

    Ranges over (0, 1] for corridor (GRADIENT) cells and is distinct between
    neighbouring cells, which keeps their signatures distinguishable.
    """
    from .geometry import clip_segment_to_rect

    e1 = network.electrode_point(pair[0])
    e2 = network.electrode_point(pair[1])
    rect = cell_rectangle(cell).inflated(CORRIDOR_HALF_WIDTH_MM)
    clipped = clip_segment_to_rect(e1, e2, rect)
    if clipped is None:
        return 0.05
    a, b = clipped
    return max(min(a.distance_to(b) / (2.0 * CORRIDOR_HALF_WIDTH_MM + 10.0), 1.0), 0.05)


def press_port_capacitance_factor(
    network: Network,
    pair,
    press: Press,
    coeffs: PerturbCoeffs,
    t: float,
    family: Family | None = None,
) -> float:
    """Multiplicative factor on the port's contact capacitance for one press.

    Only GRADIENT presses compress the polymer layering of the measuring
    path; every other family leaves the contact stage untouched.
    """
    if family is None:
        family = classify_cell_family(network, pair, press.cell)
    if family is not Family.GRADIENT:
        return 1.0
    a = press_activation(press, t, coeffs.response_time_s)
    if a == 0.0:
        return 1.0
    strength = a * (press.mass_g / 100.0) * coeffs.stiffness_scale
    strength *= corridor_coverage(network, pair, press.cell)
    return 1.0 + (coeffs.gradient_squeeze_capacitance_factor - 1.0) * strength


def press_activation(press: Press, t: float, tau: float) -> float:
    """Exponential rise after t_on, exponential decay after t_off, in [0, 1]."""
    if t <= press.t_on_s:
        return 0.0
    rise_end = min(t, press.t_off_s)
    a = 1.0 - math.exp(-(rise_end - press.t_on_s) / tau)
    if t > press.t_off_s:
        a *= math.exp(-(t - press.t_off_s) / tau)
    return a


def _family_scales(family: Family, coeffs: PerturbCoeffs, strength: float):
    """Per-parameter multiplicative factors (R, L, C) at the given strength."""

    def lerp(f):
        return 1.0 + (f - 1.0) * strength

    if family is Family.RED:
        return lerp(coeffs.red_path_resistance_factor), 1.0, 1.0
    if family is Family.GRADIENT:
        return (
            lerp(coeffs.gradient_squeeze_resistance_factor),
            1.0,
            lerp(coeffs.gradient_squeeze_capacitance_factor),
        )
    if family is Family.GREEN:
        return 1.0, lerp(coeffs.green_pump_inductance_factor), 1.0
    return 1.0, lerp(coeffs.blue_inductance_factor), 1.0


def perturb(
    elements: list[EdgeElement],
    network: Network,
    pair,
    press: Press,
    coeffs: PerturbCoeffs,
    t: float,
    *,
    family: Family | None = None,
    weights: dict[int, float] | None = None,
) -> list[EdgeElement]:
    """Element list with one press applied at time ``t``.

    Multiple presses compose by applying ``perturb`` repeatedly; the factors
    multiply.  ``family`` and ``weights`` may be passed to reuse cached
    classifications during simulation.
    """
    if not math.isfinite(t):
        raise DomainError("time must be finite")
    a = press_activation(press, t, coeffs.response_time_s)
    if a == 0.0:
        return list(elements)
    if family is None:
        family = classify_cell_family(network, pair, press.cell)
    if weights is None:
        weights = press_edge_weights(network, press.cell)
    out = list(elements)
    base = a * (press.mass_g / 100.0) * coeffs.stiffness_scale
    for i, w in weights.items():
        fr, fl, fc = _family_scales(family, coeffs, base * w)
        el = out[i]
        out[i] = EdgeElement(
            series_resistance_ohm=el.series_resistance_ohm * fr,
            series_inductance_h=el.series_inductance_h * fl,
            shunt_capacitance_f=el.shunt_capacitance_f * fc,
        )
    return out


# ---------------------------------------------------------------------------
# Scenario simulation


class ScenarioEngine:
    """Incremental simulator shared by batch scenarios and the live service.

    Sample k is fully determined by (scenario, seed, k): noise is drawn from a
    per-sample generator and the drift walk is a seeded cumulative sum, so the
    output is independent of evaluation order.
    """

    def __init__(self, network: Network, material: MaterialParams, coeffs: PerturbCoeffs, scenario: Scenario):
        self.network = network
        self.coeffs = coeffs
        self.scenario = scenario
        self.system = AdmittanceSystem.from_network(network, material)
        self.rest_elements = list(self.system.elements)
        self._press_cache: dict[CellId, tuple[Family, dict[int, float]]] = {}

    def _press_info(self, cell: CellId):
        if cell not in self._press_cache:
            fam = classify_cell_family(self.network, self.scenario.electrode_pair, cell)
            self._press_cache[cell] = (fam, press_edge_weights(self.network, cell))
        return self._press_cache[cell]

    def clean_sample(self, t: float, presses=None) -> ComplexZ:
        """Impedance at time ``t`` without drift or noise."""
        presses = self.scenario.presses if presses is None else presses
        elements = self.rest_elements
        port_cap_factor = 1.0
        activations = []
        for press in presses:
            fam, weights = self._press_info(press.cell)
            elements = perturb(
                elements,
                self.network,
                self.scenario.electrode_pair,
                press,
                self.coeffs,
                t,
                family=fam,
                weights=weights,
            )
            port_cap_factor *= press_port_capacitance_factor(
                self.network, self.scenario.electrode_pair, press, self.coeffs, t, family=fam
            )
            activations.append(
                press_activation(press, t, self.coeffs.response_time_s)
                * (press.mass_g / 100.0)
                * self.coeffs.stiffness_scale
            )
        if self.coeffs.multi_press_synergy > 0 and len(activations) > 1:
            # Overlapping presses tension the whole membrane, compressing the
            # electrode interface beyond the per-press product.
            overlap = sum(
                a * b
                for i, a in enumerate(activations)
                for b in activations[i + 1 :]
            )
            port_cap_factor *= 1.0 + self.coeffs.multi_press_synergy * overlap
        system = self.system.with_elements(elements)
        if port_cap_factor != 1.0:
            from dataclasses import replace as _replace

            system = _replace(
                system, contact_capacitance_f=system.contact_capacitance_f * port_cap_factor
            )
        return impedance(system, self.scenario.electrode_pair, self.scenario.probe_frequency_hz)

    def disturbance(self, k: int) -> tuple[float, float]:
        """Additive (dR, dX) disturbance of sample ``k``: drift plus noise."""
        d = self.scenario.disturbances
        t = k * self.scenario.sample_period_s
        drift_r = drift_x = d.drift_slope_ohm_per_s * t + d.drift_curvature_ohm_per_s2 * t * t
        if d.drift_walk_sigma_ohm > 0:
            walk = np.random.default_rng([self.scenario.seed, 1]).normal(
                0.0, d.drift_walk_sigma_ohm, size=(2, k + 1)
            )
            drift_r += float(np.sum(walk[0]))
            drift_x += float(np.sum(walk[1]))
        noise_r = noise_x = 0.0
        if d.noise_sigma_ohm > 0:
            nr, nx = np.random.default_rng([self.scenario.seed, 2, k]).normal(
                0.0, d.noise_sigma_ohm, size=2
            )
            noise_r, noise_x = float(nr), float(nx)
        return drift_r + noise_r, drift_x + noise_x

    def sample(self, k: int, presses=None) -> ComplexZ:
        z = self.clean_sample(k * self.scenario.sample_period_s, presses)
        dr, dx = self.disturbance(k)
        return ComplexZ(z.resistance + dr, z.reactance + dx)


def simulate_scenario(
    network: Network, material: MaterialParams, coeffs: PerturbCoeffs, scenario: Scenario
) -> TimeSeries:
    """Run a full scenario; deterministic for a fixed seed."""
    engine = ScenarioEngine(network, material, coeffs, scenario)
    count = int(math.floor(scenario.duration_s / scenario.sample_period_s)) + 1
    samples = tuple(engine.sample(k) for k in range(count))
    return TimeSeries(
        t0_s=0.0,
        sample_period_s=scenario.sample_period_s,
        samples=samples,
        probe_frequency_hz=scenario.probe_frequency_hz,
        electrode_pair=scenario.electrode_pair,
    )


def press_signature(
    network: Network,
    material: MaterialParams,
    coeffs: PerturbCoeffs,
    pair,
    cell: CellId,
    mass_g: float = 100.0,
    probe_frequency_hz: float = 1000.0,
    *,
    system: AdmittanceSystem | None = None,
    rest: ComplexZ | None = None,
) -> tuple[Family, float, float]:
    """Noiseless steady-state (family, dR, dX) of a sustained press on ``cell``.

    This is the forward model the localizer ranks candidates against.
    """
    if system is None:
        system = AdmittanceSystem.from_network(network, material)
    if rest is None:
        rest = impedance(system, pair, probe_frequency_hz)
    press = Press(cell, mass_g, 0.0, 1e6)
    fam = classify_cell_family(network, pair, cell)
    weights = press_edge_weights(network, cell)
    elements = perturb(
        list(system.elements), network, pair, press, coeffs, 1e6, family=fam, weights=weights
    )
    pressed = system.with_elements(elements)
    fc = press_port_capacitance_factor(network, pair, press, coeffs, 1e6, family=fam)
    if fc != 1.0:
        from dataclasses import replace as _replace

        pressed = _replace(pressed, contact_capacitance_f=pressed.contact_capacitance_f * fc)
    z = impedance(pressed, pair, probe_frequency_hz)
    return fam, z.resistance - rest.resistance, z.reactance - rest.reactance


# ---------------------------------------------------------------------------
# Drift correction


def subtract_drift(series: TimeSeries, quiescent_windows) -> TimeSeries:
    """Fit and subtract a linear baseline over the quiescent windows.

    R and X are corrected independently.  Raises
    :class:`InsufficientBaselineError` when fewer than two samples fall
    inside the windows.
    """
    windows = list(quiescent_windows)
    if not windows:
        raise InsufficientBaselineError("need at least one quiescent window")
    t = series.times()
    mask = np.zeros(len(t), dtype=bool)
    for (a, b) in windows:
        if not (b > a):
            raise InsufficientBaselineError(f"degenerate window ({a}, {b})")
        mask |= (t >= a) & (t <= b)
    if int(mask.sum()) < 2:
        raise InsufficientBaselineError("quiescent windows contain fewer than 2 samples")
    r = series.resistances()
    x = series.reactances()
    out_r = r - np.polyval(np.polyfit(t[mask], r[mask], 1), t)
    out_x = x - np.polyval(np.polyfit(t[mask], x[mask], 1), t)
    return replace(
        series,
        samples=tuple(ComplexZ(rr, xx) for rr, xx in zip(out_r, out_x)),
    )
