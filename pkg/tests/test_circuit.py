import dataclasses
import math

import numpy as np
import pytest

from liquidskin.circuit import (
    AdmittanceSystem,
    EdgeElement,
    MaterialParams,
    channel_element,
    dc_iv,
    impedance,
    impedance_at_omega,
    log_sweep_frequencies,
    sweep,
)
from liquidskin.errors import DomainError, SingularSystemError


def random_resistive_system(rng, n_nodes):
    """A connected random resistor network with terminals at 0 and n-1."""
    edges = [(i, i + 1) for i in range(n_nodes - 1)]  # spanning path
    extra = rng.integers(0, n_nodes, size=(n_nodes, 2))
    for a, b in extra:
        if a != b:
            edges.append((min(a, b), max(a, b)))
    elements = tuple(
        EdgeElement(float(rng.uniform(1.0, 100.0)), 0.0, 0.0) for _ in edges
    )
    return AdmittanceSystem(
        node_count=n_nodes,
        edge_nodes=tuple((int(a), int(b)) for a, b in edges),
        elements=elements,
        electrodes={"A": 0, "B": n_nodes - 1},
        contact_resistance_ohm=0.0,
        contact_capacitance_f=0.0,
    )


def laplacian_effective_resistance(system, a, b):
    lap = np.zeros((system.node_count, system.node_count))
    for (i, j), e in zip(system.edge_nodes, system.elements):
        g = 1.0 / e.series_resistance_ohm
        lap[i, i] += g
        lap[j, j] += g
        lap[i, j] -= g
        lap[j, i] -= g
    pinv = np.linalg.pinv(lap)
    return pinv[a, a] + pinv[b, b] - 2 * pinv[a, b]


def without_contact(system):
    return dataclasses.replace(system, contact_resistance_ohm=0.0, contact_capacitance_f=0.0)


class TestDCOracle:
    def test_matches_laplacian_pseudoinverse(self):
        rng = np.random.default_rng(0)
        for trial in range(100):
            n = int(rng.integers(4, 21))
            system = random_resistive_system(rng, n)
            expected = laplacian_effective_resistance(system, 0, n - 1)
            z = impedance(system, ("A", "B"), 0.0)
            assert z.reactance == 0.0
            assert abs(z.resistance - expected) <= 1e-9 * expected

    def test_contact_resistance_adds_at_dc(self, system, material):
        z0 = impedance(without_contact(system), ("BL", "C"), 0.0).resistance
        z1 = impedance(system, ("BL", "C"), 0.0).resistance
        assert z1 == pytest.approx(z0 + 2 * material.contact_resistance_ohm, rel=1e-12)


class TestSweepProperties:
    def test_reciprocity_and_passivity(self, system):
        for f, z in sweep(system, ("BL", "C"), log_sweep_frequencies()):
            swapped = impedance(system, ("C", "BL"), f)
            assert abs(z.as_complex - swapped.as_complex) <= 1e-12 * z.modulus
            assert z.resistance >= 0.0

    def test_spectral_crossover(self, system):
        assert impedance(system, ("BL", "C"), 100.0).reactance < 0.0
        assert impedance(system, ("BL", "C"), 1e6).reactance > 0.0

    def test_single_reactance_sign_change(self, system):
        for pair in (("BL", "C"), ("BL", "TR"), ("C", "TR")):
            xs = np.array([z.reactance for _, z in sweep(system, pair, log_sweep_frequencies())])
            changes = np.sum(np.sign(xs)[:-1] != np.sign(xs)[1:])
            assert changes == 1

    def test_hermitian_symmetry(self, system):
        # Z(-w) = conj(Z(w)): the response to a real signal is real.
        w = 2 * math.pi * 1_000.0
        z_pos = impedance_at_omega(system, ("BL", "C"), w).as_complex
        z_neg = impedance_at_omega(system, ("BL", "C"), -w).as_complex
        assert z_neg == pytest.approx(np.conj(z_pos), rel=1e-12)

    def test_conductivity_scaling_without_contact(self, network, material):
        def zero_contact(scale):
            scaled = dataclasses.replace(
                material, conductivity_s_per_m=material.conductivity_s_per_m * scale
            )
            return without_contact(AdmittanceSystem.from_network(network, scaled))

        r1 = impedance(zero_contact(1.0), ("BL", "C"), 0.0).resistance
        r2 = impedance(zero_contact(2.0), ("BL", "C"), 0.0).resistance
        assert r2 == pytest.approx(r1 / 2.0, rel=1e-12)


class TestChannelElement:
    def test_resistance_from_geometry(self):
        # R = L / (sigma * w * d) with everything in metres.
        e = channel_element(100.0, 4.0, 2.0, MaterialParams())
        assert e.series_resistance_ohm == pytest.approx(
            0.1 / (100.0 * 0.004 * 0.002), rel=1e-12
        )

    def test_inductance_and_capacitance_scale_with_length(self):
        m = MaterialParams()
        e1 = channel_element(50.0, 4.0, 2.0, m)
        e2 = channel_element(100.0, 4.0, 2.0, m)
        assert e2.series_inductance_h == pytest.approx(2 * e1.series_inductance_h, rel=1e-12)
        assert e2.shunt_capacitance_f == pytest.approx(2 * e1.shunt_capacitance_f, rel=1e-12)

    def test_rejects_nonpositive_dimensions(self):
        with pytest.raises(DomainError):
            channel_element(0.0, 4.0, 2.0, MaterialParams())

    def test_rejects_nonpositive_resistance(self):
        with pytest.raises(DomainError):
            EdgeElement(0.0, 0.0, 0.0)


class TestDCIV:
    def test_linear_and_through_origin(self, system):
        vs = np.linspace(-0.5, 0.5, 11)
        rows = dc_iv(system, ("BL", "C"), vs)
        r0 = impedance(system, ("BL", "C"), 0.0).resistance
        for v, i in rows:
            assert i == pytest.approx(v / r0, rel=1e-12, abs=1e-15)


class TestErrors:
    def test_negative_frequency_rejected(self, system):
        with pytest.raises(DomainError):
            impedance(system, ("BL", "C"), -1.0)

    def test_disconnected_terminals_raise(self):
        system = AdmittanceSystem(
            node_count=4,
            edge_nodes=((0, 1), (2, 3)),
            elements=(EdgeElement(10.0, 0.0, 0.0), EdgeElement(10.0, 0.0, 0.0)),
            electrodes={"A": 0, "B": 3},
            contact_resistance_ohm=0.0,
            contact_capacitance_f=0.0,
        )
        with pytest.raises(SingularSystemError):
            impedance(system, ("A", "B"), 0.0)

    def test_same_terminal_twice_rejected(self, system):
        with pytest.raises(DomainError):
            impedance(system, ("BL", "BL"), 100.0)

    def test_unknown_terminal_rejected(self, system):
        with pytest.raises(DomainError):
            impedance(system, ("BL", "XX"), 100.0)

    def test_material_rejects_nonpositive_values(self):
        with pytest.raises(DomainError):
            MaterialParams(conductivity_s_per_m=0.0)
