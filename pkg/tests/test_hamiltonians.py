"""Tests for the rotating-frame Hamiltonian builders."""

import math

import numpy as np
import pytest
from numpy.testing import assert_allclose

from spinctl import hamiltonians as ham
from spinctl import units
from spinctl.presets import cesium_baseline, cesium_two_microwave, two_level_toy
from spinctl.spin_algebra import (
    MicrowaveTransition,
    SpinSystem,
    projected_operators,
    pseudospin,
)


@pytest.fixture(scope="module")
def baseline():
    return cesium_baseline()


def zero_sample(config) -> ham.ControlSample:
    n = len(config.channels)
    return ham.ControlSample(amplitudes=(0.0,) * n, phases=(0.0,) * n)


class TestUnits:
    def test_khz_gets_two_pi(self):
        assert_allclose(units.parse_frequency("15 kHz"), 2 * math.pi * 0.015)
        assert_allclose(units.parse_frequency("0.04 MHz"), 2 * math.pi * 0.04)
        assert_allclose(units.rad_per_us(40.0), 2 * math.pi * 0.04)

    def test_time_units(self):
        assert units.parse_time("10 us") == 10.0
        assert units.parse_time("1.5 ms") == 1500.0

    def test_phase_units(self):
        assert_allclose(units.parse_phase("0.5 pi"), math.pi / 2)
        assert_allclose(units.parse_phase("1.25 rad"), 1.25)
        assert_allclose(units.parse_phase(2.0), 2.0)

    def test_bare_numbers_rejected(self):
        with pytest.raises(ValueError):
            units.parse_frequency(15.0)
        with pytest.raises(ValueError):
            units.parse_time(10)
        with pytest.raises(ValueError):
            units.parse_frequency("15 parsec")


class TestChannelSpec:
    def test_validation(self):
        with pytest.raises(ValueError):
            ham.ChannelSpec(kind="rf_z", max_rabi=1.0, slew_time=1.0)
        with pytest.raises(ValueError):
            ham.ChannelSpec(kind="rf_x", max_rabi=-1.0, slew_time=1.0)
        with pytest.raises(ValueError):
            ham.ChannelSpec(kind="rf_x", max_rabi=1.0, slew_time=0.0)
        with pytest.raises(ValueError):
            # microwave without a transition
            ham.ChannelSpec(kind="microwave", max_rabi=1.0, slew_time=1.0)
        with pytest.raises(ValueError):
            # rf with a transition
            ham.ChannelSpec(
                kind="rf_x", max_rabi=1.0, slew_time=1.0,
                transition=MicrowaveTransition(0, 0),
            )

    def test_mode_flags(self):
        ch = ham.ChannelSpec(
            kind="rf_x", max_rabi=1.0, slew_time=1.0,
            amplitude_mode="fixed_at_max", phase_mode="controlled",
        )
        assert not ch.controls_amplitude
        assert ch.controls_phase
        assert ch.is_time_dependent
        off = ham.ChannelSpec(
            kind="rf_x", max_rabi=1.0, slew_time=1.0, amplitude_mode="off"
        )
        assert off.is_off and not off.is_time_dependent


class TestControlConfiguration:
    def test_baseline_shape(self, baseline):
        assert baseline.system.dim == 16
        assert [c.kind for c in baseline.channels] == ["rf_x", "rf_y", "microwave"]
        assert baseline.is_resonant
        assert_allclose(baseline.channels[0].max_rabi, 2 * math.pi * 0.015)
        assert_allclose(baseline.channels[2].max_rabi, 2 * math.pi * 0.04)
        assert baseline.channels[2].transition == MicrowaveTransition(-3, -4)

    def test_duplicate_rf_rejected(self, baseline):
        rf = baseline.channels[0]
        with pytest.raises(ValueError):
            ham.ControlConfiguration(system=baseline.system, channels=(rf, rf))

    def test_duplicate_microwave_rejected(self, baseline):
        mw = baseline.channels[2]
        with pytest.raises(ValueError):
            ham.ControlConfiguration(system=baseline.system, channels=(mw, mw))

    def test_invalid_transition_rejected(self, baseline):
        bad = ham.ChannelSpec(
            kind="microwave", max_rabi=1.0, slew_time=1.0,
            transition=MicrowaveTransition(3, 1),
        )
        with pytest.raises(ValueError):
            ham.ControlConfiguration(system=baseline.system, channels=(bad,))

    def test_two_microwave_variant(self):
        config = cesium_two_microwave()
        transitions = [c.transition for c in config.microwave_channels()]
        assert transitions == [MicrowaveTransition(-3, -4), MicrowaveTransition(3, 4)]


class TestStaticHamiltonian:
    def test_resonant_is_zero(self, baseline):
        assert_allclose(ham.static_hamiltonian(baseline), 0.0, atol=1e-15)

    def test_rf_detuning_diagonal(self, baseline):
        config = ham.ControlConfiguration(
            system=baseline.system, channels=baseline.channels, rf_detuning=1.0
        )
        H = ham.static_hamiltonian(config)
        labels = baseline.system.basis_labels()
        expected = np.diag([m if f == 4 else -m for f, m in labels])
        assert_allclose(H, expected, atol=1e-14)

    def test_microwave_detuning_splits_blocks(self, baseline):
        config = ham.ControlConfiguration(
            system=baseline.system, channels=baseline.channels,
            microwave_detuning=2 * math.pi * 0.01,
        )
        H = ham.static_hamiltonian(config)
        P = projected_operators(baseline.system)
        assert_allclose(
            H, 0.5 * 2 * math.pi * 0.01 * (P.p_plus - P.p_minus), atol=1e-14
        )


class TestRfHamiltonian:
    def test_quarter_phase_picks_sine_quadrature(self, baseline):
        # phase pi/2 kills the cosine terms and leaves (Omega/2)(Fy+ + Fy-).
        system = baseline.system
        omega = 2 * math.pi * 0.015
        H = ham.rf_hamiltonian(system, x=(omega, math.pi / 2))
        P = projected_operators(system)
        assert_allclose(H, 0.5 * omega * (P.fy_plus + P.fy_minus), atol=1e-12)

    def test_zero_phase_x(self, baseline):
        system = baseline.system
        H = ham.rf_hamiltonian(system, x=(1.0, 0.0))
        P = projected_operators(system)
        assert_allclose(H, 0.5 * (P.fx_plus - P.fx_minus), atol=1e-14)

    def test_zero_phase_y(self, baseline):
        system = baseline.system
        H = ham.rf_hamiltonian(system, y=(1.0, 0.0))
        P = projected_operators(system)
        assert_allclose(H, 0.5 * (P.fy_plus - P.fy_minus), atol=1e-14)

    def test_y_sine_quadrature_sign(self, baseline):
        system = baseline.system
        H = ham.rf_hamiltonian(system, y=(1.0, math.pi / 2))
        P = projected_operators(system)
        assert_allclose(H, -0.5 * (P.fx_plus + P.fx_minus), atol=1e-12)


class TestMicrowaveHamiltonian:
    def test_sigma_x_entries(self, baseline):
        omega = 2 * math.pi * 0.04
        H = ham.microwave_hamiltonian(
            baseline.system, MicrowaveTransition(-3, -4), omega, 0.0
        )
        expected = np.zeros((16, 16), dtype=complex)
        expected[8, 15] = expected[15, 8] = omega / 2
        assert_allclose(H, expected, atol=1e-14)

    def test_pseudospin_subspace_only(self, baseline):
        H = ham.microwave_hamiltonian(
            baseline.system, MicrowaveTransition(0, 1), 1.0, 0.7
        )
        up = baseline.system.basis_index(4, 1)
        dn = baseline.system.basis_index(3, 0)
        mask = np.zeros((16, 16), dtype=bool)
        mask[up, dn] = mask[dn, up] = True
        assert np.all(H[~mask] == 0)

    def test_phase_mixes_quadratures(self, baseline):
        phase = 0.3
        H = ham.microwave_hamiltonian(
            baseline.system, MicrowaveTransition(-3, -4), 2.0, phase
        )
        sx, sy, _ = pseudospin(baseline.system, MicrowaveTransition(-3, -4))
        assert_allclose(H, math.cos(phase) * sx + math.sin(phase) * sy, atol=1e-14)


class TestTotalHamiltonian:
    def test_zero_sample_reduces_to_static(self, baseline):
        config = ham.ControlConfiguration(
            system=baseline.system, channels=baseline.channels,
            rf_detuning=0.1, microwave_detuning=0.2,
        )
        H = ham.total_hamiltonian(config, zero_sample(config))
        assert_allclose(H, ham.static_hamiltonian(config), atol=1e-14)

    def test_sum_structure(self, baseline, rng):
        amps = rng.uniform(0, 0.1, size=3)
        phases = rng.uniform(0, 2 * math.pi, size=3)
        sample = ham.ControlSample(tuple(amps), tuple(phases))
        H = ham.total_hamiltonian(baseline, sample)
        expected = (
            ham.static_hamiltonian(baseline)
            + ham.rf_hamiltonian(baseline.system, x=(amps[0], phases[0]))
            + ham.rf_hamiltonian(baseline.system, y=(amps[1], phases[1]))
            + ham.microwave_hamiltonian(
                baseline.system, baseline.channels[2].transition, amps[2], phases[2]
            )
        )
        assert_allclose(H, expected, atol=1e-13)

    def test_hermitian_for_random_samples(self, baseline, rng):
        for _ in range(10):
            sample = ham.ControlSample(
                tuple(rng.uniform(0, 0.3, size=3)),
                tuple(rng.uniform(-10, 10, size=3)),
            )
            H = ham.total_hamiltonian(baseline, sample)
            assert_allclose(H, H.conj().T, atol=1e-14)

    def test_off_channel_ignored(self, baseline):
        channels = (
            baseline.channels[0],
            ham.ChannelSpec(
                kind="rf_y",
                max_rabi=baseline.channels[1].max_rabi,
                slew_time=10.0,
                amplitude_mode="off",
            ),
            baseline.channels[2],
        )
        config = ham.ControlConfiguration(system=baseline.system, channels=channels)
        sample = ham.ControlSample((0.05, 99.0, 0.1), (0.0, 1.0, 0.5))
        H = ham.total_hamiltonian(config, sample)
        expected = ham.rf_hamiltonian(config.system, x=(0.05, 0.0)) + (
            ham.microwave_hamiltonian(
                config.system, baseline.channels[2].transition, 0.1, 0.5
            )
        )
        assert_allclose(H, expected, atol=1e-13)

    def test_sample_length_mismatch(self, baseline):
        with pytest.raises(ValueError):
            ham.total_hamiltonian(
                baseline, ham.ControlSample((0.0, 0.0), (0.0, 0.0))
            )

    def test_quadrature_decomposition(self, baseline, rng):
        # u A + v B with u = amp cos(phase), v = amp sin(phase) per channel.
        amps = rng.uniform(0, 0.2, size=3)
        phases = rng.uniform(-5, 5, size=3)
        H = ham.total_hamiltonian(baseline, ham.ControlSample(tuple(amps), tuple(phases)))
        rebuilt = np.zeros((16, 16), dtype=complex)
        for channel, amp, phase in zip(baseline.channels, amps, phases):
            A, B = ham.quadrature_operators(baseline.system, channel)
            rebuilt = rebuilt + amp * math.cos(phase) * A + amp * math.sin(phase) * B
        assert_allclose(H, rebuilt, atol=1e-13)

    def test_toy_preset(self):
        config = two_level_toy()
        assert config.system.dim == 4
        sample = ham.ControlSample((0.1,), (0.0,))
        H = ham.total_hamiltonian(config, sample)
        up = config.system.basis_index(1, 1)
        dn = config.system.basis_index(0, 0)
        assert H[up, dn] == 0.05
        assert np.count_nonzero(H) == 2
