"""Tests for Lie-closure computation and the configuration scan."""

import numpy as np
import pytest
from numpy.testing import assert_allclose

from spinctl import controllability as ctl
from spinctl import spin_algebra as sa
from spinctl.hamiltonians import ChannelSpec, ControlConfiguration, quadrature_operators
from spinctl.presets import cesium_baseline, cesium_two_microwave


def random_traceless_hermitian(dim: int, rng: np.random.Generator) -> np.ndarray:
    A = rng.normal(size=(dim, dim)) + 1j * rng.normal(size=(dim, dim))
    H = (A + A.conj().T) / 2
    return H - np.trace(H) / dim * np.eye(dim)


class TestGeneratorSetConstruction:
    def test_identity_component_projected(self):
        jx, _, jz = sa.angular_momentum(1)
        shifted = jz + 2.0 * np.eye(3)
        gens = ctl.GeneratorSet.from_matrices([jx, shifted])
        for op in gens.operators:
            assert abs(np.trace(op)) < 1e-12

    def test_non_hermitian_rejected(self):
        bad = np.array([[0.0, 1.0], [0.0, 0.0]], dtype=complex)
        with pytest.raises(ValueError):
            ctl.GeneratorSet.from_matrices([bad])

    def test_duplicates_removed(self):
        jx, jy, _ = sa.angular_momentum(1)
        gens = ctl.GeneratorSet.from_matrices([jx, jy, 2.0 * jx], ["a", "b", "c"])
        assert len(gens) == 2
        assert gens.labels == ("a", "b")

    def test_pure_identity_rejected(self):
        with pytest.raises(ValueError):
            ctl.GeneratorSet.from_matrices([np.eye(3)])


class TestLieClosure:
    def test_su2_fragment(self):
        jx, jy, _ = sa.angular_momentum(1)
        result = ctl.lie_closure(ctl.GeneratorSet.from_matrices([jx, jy]))
        assert result.dimension == 3
        assert result.max_dimension == 8
        assert not result.controllable

    def test_single_quadrature_is_abelian(self, cesium):
        config = cesium_baseline()
        A, _ = quadrature_operators(cesium, config.channels[0])
        result = ctl.lie_closure(ctl.GeneratorSet.from_matrices([A]))
        assert result.dimension == 1
        assert not result.controllable

    def test_rf_only_closes_to_two_block_rotations(self):
        config = cesium_baseline()
        ops = []
        for channel in config.channels[:2]:
            ops.extend(quadrature_operators(config.system, channel))
        result = ctl.lie_closure(ctl.GeneratorSet.from_matrices(ops))
        assert result.dimension == 6  # su(2) ⊕ su(2)
        assert not result.controllable

    @pytest.mark.parametrize("dim", [3, 4, 5, 6])
    def test_rank2_extension_completes_su_d(self, dim):
        # {Jx, Jy, T(2,0)} generates the full traceless algebra.
        j = (dim - 1) / 2
        jx, jy, _ = sa.angular_momentum(j)
        t20 = sa.spherical_tensor(j, 2, 0)
        result = ctl.lie_closure(ctl.GeneratorSet.from_matrices([jx, jy, t20]))
        assert result.dimension == dim * dim - 1
        assert result.controllable

    @pytest.mark.parametrize("dim", [3, 4, 5])
    def test_random_rank2_witness_implies_full_closure(self, dim):
        # Random Hermitian h with a nonzero rank-2 component alongside Jx, Jy.
        j = (dim - 1) / 2
        jx, jy, _ = sa.angular_momentum(j)
        rank2 = [sa.spherical_tensor(j, 2, q) for q in range(-2, 3)]
        rng = np.random.default_rng(100 + dim)
        for _ in range(3):
            h = random_traceless_hermitian(dim, rng)
            witness = max(abs(np.trace(t.conj().T @ h)) for t in rank2)
            assert witness > 1e-6 * np.linalg.norm(h)
            result = ctl.lie_closure(ctl.GeneratorSet.from_matrices([jx, jy, h]))
            assert result.controllable

    def test_basis_orthonormal(self):
        jx, jy, _ = sa.angular_momentum(1.5)
        t20 = sa.spherical_tensor(1.5, 2, 0)
        result = ctl.lie_closure(ctl.GeneratorSet.from_matrices([jx, jy, t20]))
        G = result.basis @ result.basis.T
        assert_allclose(G, np.eye(result.dimension), atol=1e-10)

    def test_dimension_invariant_under_order_and_mixing(self):
        j = 1.5
        jx, jy, _ = sa.angular_momentum(j)
        t20 = sa.spherical_tensor(j, 2, 0)
        ops = [jx, jy, t20]
        baseline = ctl.lie_closure(ctl.GeneratorSet.from_matrices(ops)).dimension
        assert (
            ctl.lie_closure(ctl.GeneratorSet.from_matrices(ops[::-1])).dimension
            == baseline
        )
        rng = np.random.default_rng(5)
        for _ in range(3):
            M = rng.normal(size=(3, 3))
            while abs(np.linalg.det(M)) < 0.1:
                M = rng.normal(size=(3, 3))
            mixed = [sum(M[i, k] * ops[k] for k in range(3)) for i in range(3)]
            assert (
                ctl.lie_closure(ctl.GeneratorSet.from_matrices(mixed)).dimension
                == baseline
            )

    def test_scaling_invariance(self):
        jx, jy, _ = sa.angular_momentum(1)
        a = ctl.lie_closure(ctl.GeneratorSet.from_matrices([jx, jy]))
        b = ctl.lie_closure(
            ctl.GeneratorSet.from_matrices([1e-3 * jx, 1e3 * jy])
        )
        assert a.dimension == b.dimension


class TestConfigurationGenerators:
    def test_baseline_has_six(self):
        gens = ctl.generator_set(cesium_baseline())
        assert len(gens) == 6
        assert gens.labels == (
            "rf_x.cos", "rf_x.sin", "rf_y.cos", "rf_y.sin",
            "mw(-3->-4).cos", "mw(-3->-4).sin",
        )

    def test_fixed_phase_channel_contributes_one(self):
        base = cesium_baseline()
        channels = (
            ChannelSpec(
                kind="rf_x", max_rabi=base.channels[0].max_rabi,
                slew_time=10.0, phase_mode="fixed",
            ),
        )
        config = ControlConfiguration(system=base.system, channels=channels)
        gens = ctl.generator_set(config)
        assert len(gens) == 1
        assert gens.labels == ("rf_x.fixed-phase",)

    def test_phase_only_control_equivalent_to_full(self):
        base = cesium_baseline()
        mw = base.channels[2]
        frozen_amp = ChannelSpec(
            kind="microwave", max_rabi=mw.max_rabi, slew_time=mw.slew_time,
            amplitude_mode="fixed_at_max", phase_mode="controlled",
            transition=mw.transition,
        )
        config = ControlConfiguration(
            system=base.system, channels=base.channels[:2] + (frozen_amp,)
        )
        gens = ctl.generator_set(config)
        assert len(gens) == 6  # same generator set as the fully controlled case

    def test_fully_fixed_channel_becomes_drift(self):
        base = cesium_baseline()
        mw = base.channels[2]
        frozen = ChannelSpec(
            kind="microwave", max_rabi=mw.max_rabi, slew_time=mw.slew_time,
            amplitude_mode="fixed_at_max", phase_mode="fixed",
            transition=mw.transition,
        )
        config = ControlConfiguration(
            system=base.system, channels=base.channels[:2] + (frozen,)
        )
        gens = ctl.generator_set(config)
        assert gens.labels[-1] == "drift"
        assert len(gens) == 5

    def test_resonant_controlled_has_no_drift(self):
        gens = ctl.generator_set(cesium_baseline())
        assert "drift" not in gens.labels

    def test_detuned_adds_drift(self):
        base = cesium_baseline()
        config = ControlConfiguration(
            system=base.system, channels=base.channels, rf_detuning=0.01
        )
        gens = ctl.generator_set(config)
        assert gens.labels[-1] == "drift"

    def test_block_bridge_structure(self):
        # Diagonal-block rf generators plus one two-entry pseudospin bridge.
        config = cesium_baseline()
        gens = ctl.generator_set(config)
        plus, minus = config.system.block(4), config.system.block(3)
        for op, label in zip(gens.operators, gens.labels):
            off = op.copy()
            off[plus, plus] = 0
            off[minus, minus] = 0
            if label.startswith("rf"):
                assert_allclose(off, 0, atol=1e-14)
            else:
                assert np.count_nonzero(np.abs(off) > 1e-14) == 2


class TestControllabilityVerdicts:
    def test_baseline_fully_controllable(self):
        result = ctl.is_controllable(cesium_baseline())
        assert result.controllable
        assert result.dimension == 255

    def test_two_microwave_fully_controllable(self):
        result = ctl.is_controllable(cesium_two_microwave())
        assert result.controllable

    def test_rf_only_not_controllable(self):
        base = cesium_baseline()
        config = ControlConfiguration(system=base.system, channels=base.channels[:2])
        result = ctl.is_controllable(config)
        assert not result.controllable
        assert result.dimension == 6


class TestClassification:
    def test_all_classes_reachable(self, cesium):
        every = set(cesium.transitions())
        clock = cesium.clock_transition()
        edges = {
            sa.MicrowaveTransition(3, 4), sa.MicrowaveTransition(-3, -4),
            sa.MicrowaveTransition(3, 2), sa.MicrowaveTransition(-3, -2),
        }
        assert ctl.classify_transition_set(cesium, every) == "all"
        assert ctl.classify_transition_set(cesium, every - {clock}) == "all-but-clock"
        assert ctl.classify_transition_set(cesium, edges) == "edge-only"
        assert ctl.classify_transition_set(cesium, set()) == "none"
        assert ctl.classify_transition_set(cesium, {clock}) == "other"

    def test_scan_axes_grid(self):
        axes = ctl.scan_configuration_axes()
        assert len(axes) == 16
        assert len(ctl.scan_configuration_axes((False,))) == 8


@pytest.fixture(scope="module")
def small_scan(cesium):
    transitions = (
        cesium.clock_transition(),
        sa.MicrowaveTransition(-3, -4),
        sa.MicrowaveTransition(2, 3),
    )
    return ctl.scan_configurations(
        cesium, detuned_values=(False,), transitions=transitions
    )


class TestScan:
    def test_row_count(self, small_scan):
        assert len(small_scan.rows) == 8

    def test_verdicts_cover_transitions(self, small_scan):
        for row in small_scan.rows:
            assert set(row.controllable) == set(small_scan.transitions)
            for t in small_scan.transitions:
                assert row.controllable[t] == (
                    row.dimensions[t] == 255
                )

    def test_clock_hardest(self, small_scan):
        counts = small_scan.transition_counts()
        clock = small_scan.system.clock_transition()
        assert counts[clock] <= min(
            c for t, c in counts.items() if t != clock
        )

    def test_fully_controlled_resonant_cell_controls_everything(self, small_scan):
        row = next(
            r for r in small_scan.rows
            if r.rf_polarizations == 2
            and r.microwave_amplitude == "controlled"
            and r.microwave_phase == "controlled"
            and not r.detuned
        )
        assert all(row.controllable.values())
