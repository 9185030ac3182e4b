"""Electrical model of the channel network.

Each channel is a series R-L branch; half its plane capacitance is lumped to
each endpoint node against a common ground plane.  Each needle electrode adds
a contact stage (resistance in parallel with a double-layer capacitance) in
series with the port.  The contact capacitance is what makes the measured
reactance capacitive at low frequency and inductive at high frequency, as
seen on the physical skin; at DC the contact stage reduces to its resistance
and the network to its pure conductance Laplacian.

Two-terminal impedance is obtained by complex nodal analysis: inject a unit
test current at one electrode, extract it at the other, solve for node
voltages, and read the port voltage difference.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass, replace

import numpy as np

from .errors import DomainError, SingularSystemError
from .geometry import Network

#: Relative singularity threshold of the direct solver.
SINGULARITY_RTOL = 1e-12


@dataclass(frozen=True)
class MaterialParams:
    """Electrical material constants of the skin.

    All values are calibration assets: the paper fixes only the qualitative
    spectral behaviour, not element magnitudes.
    """

    conductivity_s_per_m: float = 100.0
    inductance_per_length_h_per_m: float = 0.05
    shunt_capacitance_per_area_f_per_m2: float = 1e-9
    contact_resistance_ohm: float = 100.0
    contact_capacitance_f: float = 1e-5

    def __post_init__(self):
        for name in (
            "conductivity_s_per_m",
            "inductance_per_length_h_per_m",
            "shunt_capacitance_per_area_f_per_m2",
            "contact_resistance_ohm",
            "contact_capacitance_f",
        ):
            v = getattr(self, name)
            if not (v > 0 and math.isfinite(v)):
                raise DomainError(f"{name} must be strictly positive, got {v}")


@dataclass(frozen=True)
class EdgeElement:
    """Lumped element values of one channel."""

    series_resistance_ohm: float
    series_inductance_h: float
    shunt_capacitance_f: float

    def __post_init__(self):
        if not (self.series_resistance_ohm > 0 and math.isfinite(self.series_resistance_ohm)):
            raise DomainError("series resistance must be strictly positive")
        for v in (self.series_inductance_h, self.shunt_capacitance_f):
            if not (v >= 0 and math.isfinite(v)):
                raise DomainError("element values must be finite and non-negative")


@dataclass(frozen=True)
class ComplexZ:
    """Complex impedance split into resistance (real) and reactance (imaginary)."""

    resistance: float
    reactance: float

    @classmethod
    def from_complex(cls, z: complex) -> "ComplexZ":
        return cls(z.real, z.imag)

    @property
    def as_complex(self) -> complex:
        return complex(self.resistance, self.reactance)

    @property
    def modulus(self) -> float:
        return abs(self.as_complex)

    @property
    def phase_deg(self) -> float:
        return math.degrees(cmath.phase(self.as_complex))


def channel_element(
    length_mm: float, width_mm: float, depth_mm: float, material: MaterialParams
) -> EdgeElement:
    """Lumped R, L, C of a channel of the given dimensions.

    R = length / (conductivity * width * depth), L and C scale linearly with
    length (C with the channel's plane area, width * length).
    """
    if length_mm <= 0 or width_mm <= 0 or depth_mm <= 0:
        raise DomainError("channel dimensions must be strictly positive")
    length = length_mm * 1e-3
    width = width_mm * 1e-3
    depth = depth_mm * 1e-3
    return EdgeElement(
        series_resistance_ohm=length / (material.conductivity_s_per_m * width * depth),
        series_inductance_h=material.inductance_per_length_h_per_m * length,
        shunt_capacitance_f=material.shunt_capacitance_per_area_f_per_m2 * width * length,
    )


@dataclass(frozen=True)
class AdmittanceSystem:
    """The assembled nodal description of a network at any frequency.

    Node shunt capacitances are the per-edge plane capacitances split half to
    each endpoint, referenced to the common ground plane.
    """

    node_count: int
    edge_nodes: tuple[tuple[int, int], ...]
    elements: tuple[EdgeElement, ...]
    electrodes: dict[str, int]
    contact_resistance_ohm: float
    contact_capacitance_f: float

    @classmethod
    def from_network(
        cls,
        network: Network,
        material: MaterialParams,
        elements: list[EdgeElement] | None = None,
    ) -> "AdmittanceSystem":
        if elements is None:
            elements = [
                channel_element(
                    network.edge_length_mm(i),
                    network.channel_width_mm,
                    network.channel_depth_mm,
                    material,
                )
                for i in range(len(network.edges))
            ]
        return cls(
            node_count=len(network.nodes),
            edge_nodes=tuple(network.edges),
            elements=tuple(elements),
            electrodes=dict(network.electrodes),
            contact_resistance_ohm=material.contact_resistance_ohm,
            contact_capacitance_f=material.contact_capacitance_f,
        )

    def with_elements(self, elements: list[EdgeElement]) -> "AdmittanceSystem":
        return replace(self, elements=tuple(elements))

    def node_shunt_caps(self) -> np.ndarray:
        caps = np.zeros(self.node_count)
        for (a, b), el in zip(self.edge_nodes, self.elements):
            caps[a] += el.shunt_capacitance_f / 2.0
            caps[b] += el.shunt_capacitance_f / 2.0
        return caps

    def admittance_matrix(self, omega: float) -> np.ndarray:
        """Complex nodal admittance matrix (ground plane eliminated)."""
        Y = np.zeros((self.node_count, self.node_count), dtype=complex)
        for (a, b), el in zip(self.edge_nodes, self.elements):
            y = 1.0 / complex(el.series_resistance_ohm, omega * el.series_inductance_h)
            Y[a, a] += y
            Y[b, b] += y
            Y[a, b] -= y
            Y[b, a] -= y
        Y[np.diag_indices(self.node_count)] += 1j * omega * self.node_shunt_caps()
        return Y

    def _resolve_pair(self, pair) -> tuple[int, int]:
        a, b = pair
        for name in (a, b):
            if isinstance(name, str) and name not in self.electrodes:
                raise DomainError(f"unknown electrode {name!r}")
        ia = self.electrodes[a] if isinstance(a, str) else int(a)
        ib = self.electrodes[b] if isinstance(b, str) else int(b)
        if ia == ib:
            raise DomainError("electrode pair must name two distinct electrodes")
        return ia, ib

    def _connected(self, ia: int, ib: int) -> bool:
        seen = {ia}
        stack = [ia]
        adj: dict[int, list[int]] = {}
        for (a, b) in self.edge_nodes:
            adj.setdefault(a, []).append(b)
            adj.setdefault(b, []).append(a)
        while stack:
            u = stack.pop()
            for v in adj.get(u, ()):
                if v not in seen:
                    seen.add(v)
                    stack.append(v)
        return ib in seen

    def contact_impedance(self, omega: float) -> complex:
        """One electrode's contact stage: R in parallel with C."""
        rc = self.contact_resistance_ohm
        if omega == 0:
            return complex(rc)
        return rc / (1.0 + 1j * omega * rc * self.contact_capacitance_f)


def _solve(Y: np.ndarray, rhs: np.ndarray) -> np.ndarray:
    try:
        sol = np.linalg.solve(Y, rhs)
    except np.linalg.LinAlgError as exc:
        raise SingularSystemError(str(exc)) from exc
    residual = np.linalg.norm(Y @ sol - rhs)
    scale = np.linalg.norm(Y) * np.linalg.norm(sol) + np.linalg.norm(rhs)
    if not np.all(np.isfinite(sol)) or residual > max(scale, 1.0) * 1e-8:
        raise SingularSystemError("nodal system is singular or ill-conditioned")
    return sol


def impedance_at_omega(system: AdmittanceSystem, pair, omega: float) -> ComplexZ:
    """Port impedance at signed angular frequency ``omega`` (rad/s)."""
    ia, ib = system._resolve_pair(pair)
    if not system._connected(ia, ib):
        raise SingularSystemError(f"electrodes {pair} are not connected through the network")
    if omega == 0.0:
        # Inductors short, capacitor branches removed: pure conductance Laplacian.
        G = np.zeros((system.node_count, system.node_count))
        for (a, b), el in zip(system.edge_nodes, system.elements):
            g = 1.0 / el.series_resistance_ohm
            G[a, a] += g
            G[b, b] += g
            G[a, b] -= g
            G[b, a] -= g
        keep = [i for i in range(system.node_count) if i != ib]
        rhs = np.zeros(len(keep))
        rhs[keep.index(ia)] = 1.0
        v = _solve(G[np.ix_(keep, keep)], rhs)
        z = complex(v[keep.index(ia)])
    else:
        Y = system.admittance_matrix(omega)
        rhs = np.zeros(system.node_count, dtype=complex)
        rhs[ia] = 1.0
        rhs[ib] = -1.0
        v = _solve(Y, rhs)
        z = v[ia] - v[ib]
    z += 2.0 * system.contact_impedance(omega)
    return ComplexZ.from_complex(z)


def impedance(system: AdmittanceSystem, pair, freq_hz: float) -> ComplexZ:
    """Two-terminal complex impedance of the network at ``freq_hz``."""
    if freq_hz < 0:
        raise DomainError("frequency must be >= 0")
    return impedance_at_omega(system, pair, 2.0 * math.pi * freq_hz)


def sweep(system: AdmittanceSystem, pair, freqs) -> list[tuple[float, ComplexZ]]:
    """Impedance at each frequency, in the order given."""
    freqs = list(freqs)
    if not freqs:
        raise DomainError("frequency list must be non-empty")
    out = []
    for f in freqs:
        try:
            out.append((f, impedance(system, pair, f)))
        except (DomainError, SingularSystemError) as exc:
            raise type(exc)(f"at {f} Hz: {exc}") from exc
    return out


def dc_iv(system: AdmittanceSystem, pair, voltages) -> list[tuple[float, float]]:
    """Ohmic DC current response: I = V / R_dc, exactly linear through zero."""
    r = impedance(system, pair, 0.0).resistance
    out = []
    for v in voltages:
        if not math.isfinite(v):
            raise DomainError(f"voltage {v} is not finite")
        out.append((v, v / r))
    return out


def log_sweep_frequencies(f_lo: float = 20.0, f_hi: float = 2e6, count: int = 50) -> list[float]:
    """Logarithmically spaced sweep frequencies, LCR-meter style."""
    return list(np.geomspace(f_lo, f_hi, count))
