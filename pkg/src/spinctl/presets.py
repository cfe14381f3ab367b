"""Ready-made control configurations.

`cesium_baseline` is the workhorse setup used throughout the tests and docs:
Cs-133, two orthogonal rf coils at 15 kHz peak Rabi frequency with 10 µs
slew intervals, and one microwave channel on the stretched transition
|3, -3⟩ ↔ |4, -4⟩ at 40 kHz peak with 1 µs slew intervals, everything
resonant and fully (amplitude + phase) controlled.
"""

from __future__ import annotations

from .hamiltonians import ChannelSpec, ControlConfiguration, MicrowaveTransition
from .spin_algebra import SpinSystem
from .units import rad_per_us

__all__ = ["cesium_baseline", "cesium_two_microwave", "two_level_toy", "PRESETS"]

RF_RABI_KHZ = 15.0
MICROWAVE_RABI_KHZ = 40.0
RF_SLEW_US = 10.0
MICROWAVE_SLEW_US = 1.0


def _rf_channel(kind: str) -> ChannelSpec:
    return ChannelSpec(
        kind=kind,
        max_rabi=rad_per_us(RF_RABI_KHZ),
        slew_time=RF_SLEW_US,
    )


def _microwave_channel(transition: MicrowaveTransition) -> ChannelSpec:
    return ChannelSpec(
        kind="microwave",
        max_rabi=rad_per_us(MICROWAVE_RABI_KHZ),
        slew_time=MICROWAVE_SLEW_US,
        transition=transition,
    )


def cesium_baseline() -> ControlConfiguration:
    """Cs-133 with rf x/y coils and one stretched-transition microwave."""
    return ControlConfiguration(
        system=SpinSystem.cesium(),
        channels=(
            _rf_channel("rf_x"),
            _rf_channel("rf_y"),
            _microwave_channel(MicrowaveTransition(m_minus=-3, m_plus=-4)),
        ),
    )


def cesium_two_microwave() -> ControlConfiguration:
    """Baseline variant driving both stretched transitions simultaneously."""
    return ControlConfiguration(
        system=SpinSystem.cesium(),
        channels=(
            _rf_channel("rf_x"),
            _rf_channel("rf_y"),
            _microwave_channel(MicrowaveTransition(m_minus=-3, m_plus=-4)),
            _microwave_channel(MicrowaveTransition(m_minus=3, m_plus=4)),
        ),
    )


def two_level_toy() -> ControlConfiguration:
    """I = 1/2 atom with a single microwave channel: an effective qubit.

    Drives |0, 0⟩ ↔ |1, 1⟩, so a state starting in the stretched state
    |1, 1⟩ never leaves the two coupled levels.
    """
    return ControlConfiguration(
        system=SpinSystem(0.5),
        channels=(
            ChannelSpec(
                kind="microwave",
                max_rabi=rad_per_us(MICROWAVE_RABI_KHZ),
                slew_time=MICROWAVE_SLEW_US,
                transition=MicrowaveTransition(m_minus=0, m_plus=1),
            ),
        ),
    )


PRESETS = {
    "cs-baseline": cesium_baseline,
    "cs-two-microwave": cesium_two_microwave,
    "two-level-toy": two_level_toy,
}
