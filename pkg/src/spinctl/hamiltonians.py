"""Rotating-frame control Hamiltonians for the hyperfine manifold pair.

All Hamiltonians are rotating-wave approximations expressed in rad/µs.  An rf
magnetic field along x or y drives both manifolds simultaneously (with
opposite Larmor senses, hence the F+ ∓ F- operator combinations), while a
microwave field couples one selected |F-, m-⟩ ↔ |F+, m+⟩ pair through its
pseudospin.  The static part collects the rotating-frame detunings

    H0 = (Δ_mw / 2)(P+ - P-) + Δ_rf (Fz+ - Fz-).

Channel time dependence and discretization live in `waveform`/`simulator`;
this module only evaluates operators at one instant.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .spin_algebra import (
    MicrowaveTransition,
    SpinSystem,
    projected_operators,
    pseudospin,
)

__all__ = [
    "MicrowaveTransition",
    "ChannelSpec",
    "ControlConfiguration",
    "ControlSample",
    "quadrature_operators",
    "static_hamiltonian",
    "rf_hamiltonian",
    "microwave_hamiltonian",
    "total_hamiltonian",
]

RF_KINDS = ("rf_x", "rf_y")
CHANNEL_KINDS = RF_KINDS + ("microwave",)
AMPLITUDE_MODES = ("controlled", "fixed_at_max", "off")
PHASE_MODES = ("controlled", "fixed")


@dataclass(frozen=True)
class ChannelSpec:
    """One control field: polarization/transition, bounds, and control modes.

    ``max_rabi`` is the peak Rabi angular frequency (rad/µs) and ``slew_time``
    (µs) sets both the waveform knot spacing and the per-interval slew limits
    (one full amplitude range and one full 2π of phase per slew interval).
    A stream that is not 'controlled' is frozen: amplitude at ``max_rabi``
    ('fixed_at_max') or zero ('off'), phase at ``fixed_phase``.
    """

    kind: str
    max_rabi: float
    slew_time: float
    amplitude_mode: str = "controlled"
    phase_mode: str = "controlled"
    fixed_phase: float = 0.0
    transition: MicrowaveTransition | None = None

    def __post_init__(self) -> None:
        if self.kind not in CHANNEL_KINDS:
            raise ValueError(f"unknown channel kind {self.kind!r}")
        if self.amplitude_mode not in AMPLITUDE_MODES:
            raise ValueError(f"unknown amplitude mode {self.amplitude_mode!r}")
        if self.phase_mode not in PHASE_MODES:
            raise ValueError(f"unknown phase mode {self.phase_mode!r}")
        if not (math.isfinite(self.max_rabi) and self.max_rabi > 0):
            raise ValueError("max_rabi must be positive and finite")
        if not (math.isfinite(self.slew_time) and self.slew_time > 0):
            raise ValueError("slew_time must be positive and finite")
        if (self.transition is not None) != (self.kind == "microwave"):
            raise ValueError("a transition is required exactly for microwave channels")

    @property
    def is_off(self) -> bool:
        return self.amplitude_mode == "off"

    @property
    def controls_amplitude(self) -> bool:
        return self.amplitude_mode == "controlled"

    @property
    def controls_phase(self) -> bool:
        return self.phase_mode == "controlled" and not self.is_off

    @property
    def is_time_dependent(self) -> bool:
        return (self.controls_amplitude or self.controls_phase) and not self.is_off

    def label(self) -> str:
        if self.kind == "microwave":
            return f"mw{self.transition.label()}"
        return self.kind


@dataclass(frozen=True)
class ControlConfiguration:
    """A control scenario: the atom, its field channels, and the detunings.

    Detunings are rotating-frame offsets in rad/µs; a resonant configuration
    has both equal to zero.
    """

    system: SpinSystem
    channels: tuple[ChannelSpec, ...]
    rf_detuning: float = 0.0
    microwave_detuning: float = 0.0

    def __post_init__(self) -> None:
        object.__setattr__(self, "channels", tuple(self.channels))
        kinds = [c.kind for c in self.channels if c.kind in RF_KINDS]
        if len(kinds) != len(set(kinds)):
            raise ValueError("at most one rf channel per polarization axis")
        transitions = [c.transition for c in self.channels if c.kind == "microwave"]
        if len(transitions) != len(set(transitions)):
            raise ValueError("microwave channels must have distinct transitions")
        for t in transitions:
            t.validate_for(self.system)
        for name in ("rf_detuning", "microwave_detuning"):
            if not math.isfinite(getattr(self, name)):
                raise ValueError(f"{name} must be finite")

    @property
    def active_channels(self) -> tuple[ChannelSpec, ...]:
        return tuple(c for c in self.channels if not c.is_off)

    @property
    def is_resonant(self) -> bool:
        return self.rf_detuning == 0.0 and self.microwave_detuning == 0.0

    def microwave_channels(self) -> tuple[ChannelSpec, ...]:
        return tuple(c for c in self.channels if c.kind == "microwave")

    def channel_labels(self) -> list[str]:
        return [c.label() for c in self.channels]


@dataclass(frozen=True)
class ControlSample:
    """Instantaneous (amplitude, phase) per channel, aligned with the config."""

    amplitudes: tuple[float, ...]
    phases: tuple[float, ...]

    def __post_init__(self) -> None:
        if len(self.amplitudes) != len(self.phases):
            raise ValueError("amplitudes and phases must have equal length")


def quadrature_operators(
    system: SpinSystem, channel: ChannelSpec
) -> tuple[np.ndarray, np.ndarray]:
    """Cosine/sine quadrature generators (A, B) of one channel.

    The channel's instantaneous Hamiltonian is Ω cos(φ) A + Ω sin(φ) B:
    rf_x has (A, B) = ((Fx+ - Fx-)/2, (Fy+ + Fy-)/2), rf_y has
    ((Fy+ - Fy-)/2, -(Fx+ + Fx-)/2), and a microwave channel has
    (σx/2, σy/2) on its transition.
    """
    if channel.kind == "microwave":
        sx, sy, _ = pseudospin(system, channel.transition)
        return sx / 2, sy / 2
    P = projected_operators(system)
    if channel.kind == "rf_x":
        return (P.fx_plus - P.fx_minus) / 2, (P.fy_plus + P.fy_minus) / 2
    if channel.kind == "rf_y":
        return (P.fy_plus - P.fy_minus) / 2, -(P.fx_plus + P.fx_minus) / 2
    raise ValueError(f"unknown channel kind {channel.kind!r}")


def static_hamiltonian(config: ControlConfiguration) -> np.ndarray:
    """Rotating-frame drift H0 from the rf and microwave detunings."""
    P = projected_operators(config.system)
    H = 0.5 * config.microwave_detuning * (P.p_plus - P.p_minus)
    H = H + config.rf_detuning * (P.fz_plus - P.fz_minus)
    return H


def rf_hamiltonian(
    system: SpinSystem,
    x: tuple[float, float] | None = None,
    y: tuple[float, float] | None = None,
) -> np.ndarray:
    """rf Hamiltonian for instantaneous (amplitude, phase) per polarization.

    With Ω, φ for the x coil and Ω', φ' for the y coil:

        (Ω/2)[cos φ (Fx+ - Fx-) + sin φ (Fy+ + Fy-)]
      + (Ω'/2)[cos φ' (Fy+ - Fy-) - sin φ' (Fx+ + Fx-)]
    """
    P = projected_operators(system)
    H = np.zeros((system.dim, system.dim), dtype=complex)
    if x is not None:
        amp, phase = x
        H += 0.5 * amp * (
            math.cos(phase) * (P.fx_plus - P.fx_minus)
            + math.sin(phase) * (P.fy_plus + P.fy_minus)
        )
    if y is not None:
        amp, phase = y
        H += 0.5 * amp * (
            math.cos(phase) * (P.fy_plus - P.fy_minus)
            - math.sin(phase) * (P.fx_plus + P.fx_minus)
        )
    return H


def microwave_hamiltonian(
    system: SpinSystem,
    transition: MicrowaveTransition,
    amplitude: float,
    phase: float,
) -> np.ndarray:
    """Microwave Hamiltonian (Ω/2)(cos φ σx + sin φ σy) on one transition."""
    sx, sy, _ = pseudospin(system, transition)
    return 0.5 * amplitude * (math.cos(phase) * sx + math.sin(phase) * sy)


def total_hamiltonian(config: ControlConfiguration, sample: ControlSample) -> np.ndarray:
    """Static part plus every non-off channel evaluated at one sample.

    The sample is aligned with ``config.channels``; entries for 'off'
    channels are ignored.  Fixed streams are expected to carry their frozen
    values in the sample (the waveform layer resolves them).
    """
    if len(sample.amplitudes) != len(config.channels):
        raise ValueError(
            f"sample has {len(sample.amplitudes)} channels, config has {len(config.channels)}"
        )
    H = static_hamiltonian(config)
    for channel, amp, phase in zip(config.channels, sample.amplitudes, sample.phases):
        if channel.is_off:
            continue
        if channel.kind == "rf_x":
            H = H + rf_hamiltonian(config.system, x=(amp, phase))
        elif channel.kind == "rf_y":
            H = H + rf_hamiltonian(config.system, y=(amp, phase))
        else:
            H = H + microwave_hamiltonian(config.system, channel.transition, amp, phase)
    return H
