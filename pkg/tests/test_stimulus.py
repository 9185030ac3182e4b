import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from liquidskin.circuit import ComplexZ
from liquidskin.errors import DomainError, InsufficientBaselineError
from liquidskin.geometry import CellId, cell_rectangle, segment_rect_distance
from liquidskin.stimulus import (
    CORRIDOR_HALF_WIDTH_MM,
    DisturbanceSettings,
    Family,
    perturb,
    Press,
    PerturbCoeffs,
    Scenario,
    ScenarioEngine,
    TimeSeries,
    classify_cell_family,
    family_map,
    press_activation,
    press_edge_weights,
    press_signature,
    shortest_conductive_path,
    simulate_scenario,
    subtract_drift,
)


@pytest.fixture(scope="module")
def families(network, pair):
    return family_map(network, pair)


def cells_of(families, family, k=3):
    picked = sorted(c for c, f in families.items() if f is family)
    step = max(len(picked) // k, 1)
    return picked[::step][:k]


class TestFamilyMap:
    def test_covers_all_cells_with_all_families(self, families):
        assert len(families) == 320
        assert set(families.values()) == set(Family)

    def test_corridor_cells_are_gradient(self, network, pair, families):
        e1 = network.electrode_point(pair[0])
        e2 = network.electrode_point(pair[1])
        for cell, fam in families.items():
            d = segment_rect_distance(e1, e2, cell_rectangle(cell))
            if d <= CORRIDOR_HALF_WIDTH_MM:
                assert fam is Family.GRADIENT

    def test_red_cells_touch_the_shortest_path(self, network, pair, families):
        from liquidskin.geometry import edges_under_cell

        path = set(shortest_conductive_path(network, pair))
        for cell, fam in families.items():
            if fam is Family.RED:
                under = {i for i, _ in edges_under_cell(network, cell)}
                assert under & path

    def test_pair_dependence(self, network):
        a = family_map(network, ("BL", "C"))
        b = family_map(network, ("C", "TR"))
        assert any(a[c] is not b[c] for c in a)

    def test_classify_matches_map(self, network, pair, families):
        cell = CellId.parse("H10")
        assert classify_cell_family(network, pair, cell) is families[cell]


class TestPressActivation:
    def test_zero_before_onset(self):
        p = Press(CellId.parse("A1"), 100.0, 2.0, 5.0)
        assert press_activation(p, 0.0, 0.3) == 0.0
        assert press_activation(p, 2.0, 0.3) == 0.0

    def test_rises_toward_one_then_decays(self):
        p = Press(CellId.parse("A1"), 100.0, 0.0, 5.0)
        hold = [press_activation(p, t, 0.3) for t in np.linspace(0.01, 5.0, 50)]
        assert all(b > a for a, b in zip(hold, hold[1:]))
        assert hold[-1] == pytest.approx(1.0, abs=1e-6)
        tail = [press_activation(p, t, 0.3) for t in np.linspace(5.01, 8.0, 20)]
        assert all(b < a for a, b in zip(tail, tail[1:]))

    @given(
        t=st.floats(-5.0, 20.0),
        tau=st.floats(0.05, 2.0),
        t_off=st.floats(0.5, 10.0),
    )
    def test_bounded_unit_interval(self, t, tau, t_off):
        p = Press(CellId.parse("A1"), 100.0, 0.0, t_off)
        assert 0.0 <= press_activation(p, t, tau) <= 1.0


class TestSignatureDirections:
    def test_red_resistance_drops(self, network, material, coeffs, pair, families):
        for cell in cells_of(families, Family.RED):
            fam, dr, dx = press_signature(network, material, coeffs, pair, cell)
            assert fam is Family.RED
            assert dr < 0.0

    def test_green_reactance_drops(self, network, material, coeffs, pair, families):
        for cell in cells_of(families, Family.GREEN):
            fam, dr, dx = press_signature(network, material, coeffs, pair, cell)
            assert fam is Family.GREEN
            assert dx < 0.0

    def test_blue_reactance_rises(self, network, material, coeffs, pair, families):
        for cell in cells_of(families, Family.BLUE):
            fam, dr, dx = press_signature(network, material, coeffs, pair, cell)
            assert fam is Family.BLUE
            assert dx > 0.0

    def test_gradient_moves_both_components_up(self, network, material, coeffs, pair, families):
        for cell in cells_of(families, Family.GRADIENT):
            fam, dr, dx = press_signature(network, material, coeffs, pair, cell)
            assert fam is Family.GRADIENT
            assert dr > 0.0 and dx > 0.0

    def test_heavier_press_moves_further(self, network, material, coeffs, pair, families):
        cell = cells_of(families, Family.GRADIENT, 1)[0]
        _, dr1, dx1 = press_signature(network, material, coeffs, pair, cell, mass_g=50.0)
        _, dr2, dx2 = press_signature(network, material, coeffs, pair, cell, mass_g=200.0)
        assert math.hypot(dr2, dx2) > math.hypot(dr1, dx1)


class TestPerturb:
    def test_identity_before_onset(self, network, coeffs, pair, system):
        press = Press(CellId.parse("C3"), 100.0, 5.0, 8.0)
        out = perturb(list(system.elements), network, pair, press, coeffs, 1.0)
        assert out == list(system.elements)

    def test_press_order_commutes(self, network, coeffs, pair, system):
        pa = Press(CellId.parse("C3"), 100.0, 0.0, 10.0)
        pb = Press(CellId.parse("K15"), 150.0, 0.0, 10.0)
        ab = perturb(
            perturb(list(system.elements), network, pair, pa, coeffs, 5.0),
            network, pair, pb, coeffs, 5.0,
        )
        ba = perturb(
            perturb(list(system.elements), network, pair, pb, coeffs, 5.0),
            network, pair, pa, coeffs, 5.0,
        )
        for x, y in zip(ab, ba):
            assert x.series_resistance_ohm == pytest.approx(y.series_resistance_ohm, rel=1e-12)
            assert x.series_inductance_h == pytest.approx(y.series_inductance_h, rel=1e-12)

    def test_weights_are_local(self, network):
        weights = press_edge_weights(network, CellId.parse("A1"))
        assert weights
        assert all(0.0 < w <= 1.0 for w in weights.values())
        far = press_edge_weights(network, CellId.parse("P20"))
        assert not set(weights) & set(far)


class TestScenario:
    def test_validation(self):
        press = Press(CellId.parse("C3"))
        with pytest.raises(DomainError):
            Scenario(presses=(press,), duration_s=0.0)
        with pytest.raises(DomainError):
            Scenario(presses=(press,), duration_s=10.0, probe_frequency_hz=5.0)
        with pytest.raises(DomainError):
            Scenario(presses=(press,), duration_s=10.0, sample_period_s=0.0)
        with pytest.raises(DomainError):
            Press(CellId.parse("C3"), mass_g=0.0)
        with pytest.raises(DomainError):
            Press(CellId.parse("C3"), t_on_s=3.0, t_off_s=3.0)

    def test_deterministic_replay(self, network, material, coeffs):
        scenario = Scenario(
            presses=(Press(CellId.parse("C3"), 100.0, 1.0, 3.0),),
            duration_s=5.0,
            seed=7,
        )
        a = simulate_scenario(network, material, coeffs, scenario)
        b = simulate_scenario(network, material, coeffs, scenario)
        assert a == b

    def test_seed_changes_noise_only(self, network, material, coeffs):
        def run(seed):
            return simulate_scenario(
                network, material, coeffs,
                Scenario(
                    presses=(),
                    duration_s=2.0,
                    seed=seed,
                    disturbances=DisturbanceSettings(noise_sigma_ohm=0.01,
                                                     drift_slope_ohm_per_s=0.0),
                ),
            )

        a, b = run(1), run(2)
        assert a != b
        assert np.allclose(np.mean(a.resistances()), np.mean(b.resistances()), atol=0.05)

    def test_engine_matches_batch_run(self, network, material, coeffs):
        scenario = Scenario(
            presses=(Press(CellId.parse("D4"), 100.0, 0.5, 2.0),),
            duration_s=3.0,
            seed=3,
        )
        batch = simulate_scenario(network, material, coeffs, scenario)
        engine = ScenarioEngine(network, material, coeffs, scenario)
        for k, z in enumerate(batch.samples):
            assert engine.sample(k) == z

    def test_press_raises_impedance_during_hold(self, network, material, coeffs):
        scenario = Scenario(
            presses=(Press(CellId.parse("D4"), 100.0, 1.0, 4.0),),
            duration_s=6.0,
            disturbances=DisturbanceSettings.none(),
        )
        series = simulate_scenario(network, material, coeffs, scenario)
        r = series.resistances()
        t = series.times()
        assert np.max(np.abs(r[t >= 3.0][:5] - r[0])) > 10 * np.abs(r[1] - r[0])


class TestSubtractDrift:
    def make_series(self, slope, n=50, dt=0.2):
        t = dt * np.arange(n)
        samples = tuple(ComplexZ(48.0 + slope * tt, -20.0 + 0.5 * slope * tt) for tt in t)
        return TimeSeries(t0_s=0.0, sample_period_s=dt, samples=samples)

    def test_removes_linear_drift(self):
        series = self.make_series(0.01)
        out = subtract_drift(series, [(0.0, 3.0), (7.0, 9.8)])
        assert np.max(np.abs(out.resistances())) < 1e-9
        assert np.max(np.abs(out.reactances())) < 1e-9

    def test_idempotent(self):
        series = self.make_series(0.02)
        once = subtract_drift(series, [(0.0, 3.0)])
        twice = subtract_drift(once, [(0.0, 3.0)])
        assert np.allclose(once.resistances(), twice.resistances(), atol=1e-12)

    def test_requires_windows_with_samples(self):
        series = self.make_series(0.0)
        with pytest.raises(InsufficientBaselineError):
            subtract_drift(series, [])
        with pytest.raises(InsufficientBaselineError):
            subtract_drift(series, [(100.0, 101.0)])
        with pytest.raises(InsufficientBaselineError):
            subtract_drift(series, [(2.0, 2.0)])
