"""Time evolution under piecewise-constant rotating-frame Hamiltonians.

States advance step by step with ``U = exp(-i H τ)`` built from the batched
Hermitian eigendecomposition of the per-step Hamiltonians; controls for each
step come from averaging the two adjacent grid samples (midpoint sampling,
second-order accurate for splined streams).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .hamiltonians import (
    ControlConfiguration,
    quadrature_operators,
    static_hamiltonian,
)
from .waveform import SampledControls

_HERMITICITY_TOL = 1e-12
_NORM_TOL = 1e-8


def _check_normalized(psi: np.ndarray, name: str) -> np.ndarray:
    psi = np.asarray(psi, dtype=complex).reshape(-1)
    if abs(np.linalg.norm(psi) - 1.0) > _NORM_TOL:
        raise ValueError(f"{name} is not normalized")
    return psi


def step_propagator(hamiltonian: np.ndarray, dt: float) -> np.ndarray:
    """Unitary ``exp(-i H dt)`` for one Hermitian step Hamiltonian."""
    H = np.asarray(hamiltonian, dtype=complex)
    scale = max(1.0, float(np.linalg.norm(H)))
    if np.linalg.norm(H - H.conj().T) > _HERMITICITY_TOL * scale:
        raise ValueError("step Hamiltonian must be Hermitian")
    evals, evecs = np.linalg.eigh(H)
    return (evecs * np.exp(-1j * evals * dt)) @ evecs.conj().T


@dataclass(frozen=True)
class StepHamiltonians:
    """Per-interval Hamiltonians and the control values that built them.

    ``hamiltonians`` has shape ``(n_steps, dim, dim)``; ``durations`` is the
    grid spacing per step (the final interval absorbs any remainder).  The
    midpoint amplitude and phase arrays have shape ``(n_channels, n_steps)``
    and are kept for gradient computations.
    """

    hamiltonians: np.ndarray
    durations: np.ndarray
    amplitudes: np.ndarray
    phases: np.ndarray


def step_hamiltonians(
    config: ControlConfiguration, controls: SampledControls
) -> StepHamiltonians:
    """Assemble one Hamiltonian per grid interval from midpoint controls."""
    n_ch = len(config.channels)
    if controls.amplitudes.shape[0] != n_ch:
        raise ValueError("controls do not match the configuration's channels")
    amps = 0.5 * (controls.amplitudes[:, :-1] + controls.amplitudes[:, 1:])
    phases = 0.5 * (controls.phases[:, :-1] + controls.phases[:, 1:])
    durations = np.diff(controls.times)
    u = amps * np.cos(phases)
    v = amps * np.sin(phases)
    dim = config.system.dim
    ops = np.zeros((2 * n_ch, dim, dim), dtype=complex)
    for row, spec in enumerate(config.channels):
        if spec.is_off:
            continue
        a, b = quadrature_operators(config.system, spec)
        ops[2 * row] = a
        ops[2 * row + 1] = b
    coeffs = np.empty((durations.size, 2 * n_ch))
    coeffs[:, 0::2] = u.T
    coeffs[:, 1::2] = v.T
    H = np.tensordot(coeffs, ops, axes=(1, 0))
    H += static_hamiltonian(config)
    return StepHamiltonians(
        hamiltonians=H, durations=durations, amplitudes=amps, phases=phases
    )


def step_propagators(steps: StepHamiltonians) -> np.ndarray:
    """Batched unitaries ``exp(-i H_k τ_k)`` for every interval."""
    evals, evecs = np.linalg.eigh(steps.hamiltonians)
    phases = np.exp(-1j * evals * steps.durations[:, None])
    return (evecs * phases[:, None, :]) @ evecs.conj().swapaxes(-1, -2)


@dataclass(frozen=True)
class Trajectory:
    """States along the integration grid plus optional snapshots."""

    times: np.ndarray
    states: np.ndarray  # (n_times, dim)
    snapshot_times: np.ndarray
    snapshot_states: np.ndarray  # (n_snapshots, dim)

    @property
    def final_state(self) -> np.ndarray:
        return self.states[-1]

    def snapshot_density_matrices(self) -> np.ndarray:
        psi = self.snapshot_states
        return psi[:, :, None] * psi.conj()[:, None, :]


def propagate(
    config: ControlConfiguration,
    controls: SampledControls,
    psi0: np.ndarray,
    snapshots: tuple[float, ...] = (),
) -> Trajectory:
    """Evolve ``psi0`` across the whole control grid.

    Snapshot times snap to the nearest grid sample.  Every stored state is
    unitary-evolved, so norms are preserved to machine precision.
    """
    psi0 = _check_normalized(psi0, "psi0")
    if psi0.size != config.system.dim:
        raise ValueError("psi0 dimension does not match the system")
    steps = step_hamiltonians(config, controls)
    unitaries = step_propagators(steps)
    states = np.empty((controls.times.size, psi0.size), dtype=complex)
    states[0] = psi0
    psi = psi0
    for k, U in enumerate(unitaries):
        psi = U @ psi
        states[k + 1] = psi
    snap_idx = [int(np.argmin(np.abs(controls.times - t))) for t in snapshots]
    return Trajectory(
        times=controls.times.copy(),
        states=states,
        snapshot_times=controls.times[snap_idx].copy(),
        snapshot_states=states[snap_idx].copy(),
    )


def fidelity(target: np.ndarray, final: np.ndarray) -> float:
    """Squared overlap ``|⟨target|final⟩|²`` of two normalized states."""
    target = _check_normalized(target, "target")
    final = _check_normalized(final, "final")
    return float(abs(np.vdot(target, final)) ** 2)
