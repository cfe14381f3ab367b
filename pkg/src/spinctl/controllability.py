"""Lie-algebraic controllability tests and the configuration scan.

A control setup is controllable when the real Lie algebra generated by its
Hamiltonian terms spans the full traceless Hermitian space, dimension d² - 1
for a d-level system (identity components are irrelevant global phase).  The
closure is computed numerically: operators are vectorized into real
coordinates, kept orthonormal by twice-applied classical Gram-Schmidt, and
new directions are harvested from commutators until nothing new appears or
the span is already complete.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .hamiltonians import (
    ChannelSpec,
    ControlConfiguration,
    MicrowaveTransition,
    quadrature_operators,
    static_hamiltonian,
)
from .spin_algebra import SpinSystem
from .units import rad_per_us

__all__ = [
    "GeneratorSet",
    "LieClosureResult",
    "generator_set",
    "lie_closure",
    "is_controllable",
    "ScanRow",
    "ScanResult",
    "scan_configurations",
    "classify_transition_set",
    "SCAN_CLASSES",
]

DEFAULT_TOL = 1e-10
#: Representative detuning for 'detuned' scan cells, as a fraction of max_rabi.
DETUNING_FRACTION = 0.1


class _Vectorizer:
    """Real coordinates for Hermitian d x d matrices, isometric for Tr(AB)."""

    def __init__(self, dim: int):
        self.dim = dim
        self.iu, self.ju = np.triu_indices(dim, k=1)

    def forward(self, mats: np.ndarray) -> np.ndarray:
        """(n, d, d) Hermitian stack -> (n, d*d) real coordinates."""
        mats = np.asarray(mats)
        squeeze = mats.ndim == 2
        if squeeze:
            mats = mats[None]
        diag = np.einsum("nii->ni", mats).real
        upper = mats[:, self.iu, self.ju]
        out = np.concatenate(
            [diag, np.sqrt(2.0) * upper.real, np.sqrt(2.0) * upper.imag], axis=1
        )
        return out[0] if squeeze else out

    def backward(self, vec: np.ndarray) -> np.ndarray:
        """(d*d,) real coordinates -> Hermitian matrix."""
        d = self.dim
        n_up = self.iu.size
        H = np.zeros((d, d), dtype=complex)
        H[np.arange(d), np.arange(d)] = vec[:d]
        upper = (vec[d : d + n_up] + 1j * vec[d + n_up :]) / np.sqrt(2.0)
        H[self.iu, self.ju] = upper
        H[self.ju, self.iu] = upper.conj()
        return H


@dataclass(frozen=True)
class GeneratorSet:
    """Traceless Hermitian control generators with human-readable labels."""

    dim: int
    operators: tuple[np.ndarray, ...]
    labels: tuple[str, ...]

    @classmethod
    def from_matrices(
        cls, matrices, labels: list[str] | None = None
    ) -> "GeneratorSet":
        """Project out identity components, check Hermiticity, drop duplicates."""
        matrices = [np.asarray(m, dtype=complex) for m in matrices]
        if not matrices:
            raise ValueError("at least one generator is required")
        dim = matrices[0].shape[0]
        if labels is None:
            labels = [f"g{i}" for i in range(len(matrices))]
        if len(labels) != len(matrices):
            raise ValueError("labels and matrices must have equal length")
        vec = _Vectorizer(dim)
        kept_ops, kept_labels, kept_unit = [], [], []
        for op, lab in zip(matrices, labels):
            if op.shape != (dim, dim):
                raise ValueError("generators must share one square shape")
            scale = max(1.0, float(np.linalg.norm(op)))
            if np.linalg.norm(op - op.conj().T) > 1e-10 * scale:
                raise ValueError(f"generator {lab!r} is not Hermitian")
            op = (op + op.conj().T) / 2
            op = op - (np.trace(op) / dim) * np.eye(dim)
            norm = np.linalg.norm(op)
            if norm < 1e-13:
                continue  # pure identity or zero: no control direction
            unit = vec.forward(op) / norm
            if any(abs(unit @ u) > 1 - 1e-10 for u in kept_unit):
                continue  # duplicate direction
            kept_ops.append(op)
            kept_labels.append(lab)
            kept_unit.append(unit)
        if not kept_ops:
            raise ValueError("all generators vanish after identity projection")
        return cls(dim=dim, operators=tuple(kept_ops), labels=tuple(kept_labels))

    def __len__(self) -> int:
        return len(self.operators)


@dataclass(frozen=True)
class LieClosureResult:
    """Outcome of a Lie-closure computation."""

    dimension: int
    max_dimension: int
    controllable: bool
    basis: np.ndarray  # (dimension, d*d) orthonormal real coordinates
    commutator_count: int


def generator_set(config: ControlConfiguration) -> GeneratorSet:
    """Control generators of a configuration.

    Per non-off channel: both quadrature operators when amplitude or phase is
    controlled (phase-only control at fixed amplitude reaches the same set),
    or the single fixed-phase direction when only the amplitude is controlled.
    Fully frozen channels join the detunings in a single always-on drift
    generator.
    """
    system = config.system
    ops: list[np.ndarray] = []
    labels: list[str] = []
    drift = static_hamiltonian(config)
    for channel in config.channels:
        if channel.is_off:
            continue
        A, B = quadrature_operators(system, channel)
        name = channel.label()
        if channel.controls_phase:
            ops += [A, B]
            labels += [f"{name}.cos", f"{name}.sin"]
        elif channel.controls_amplitude:
            direction = np.cos(channel.fixed_phase) * A + np.sin(channel.fixed_phase) * B
            ops.append(direction)
            labels.append(f"{name}.fixed-phase")
        else:
            drift = drift + channel.max_rabi * (
                np.cos(channel.fixed_phase) * A + np.sin(channel.fixed_phase) * B
            )
    drift = drift - (np.trace(drift) / system.dim) * np.eye(system.dim)
    if np.linalg.norm(drift) > 1e-12:
        ops.append(drift)
        labels.append("drift")
    return GeneratorSet.from_matrices(ops, labels)


def lie_closure(generators: GeneratorSet, tol: float = DEFAULT_TOL) -> LieClosureResult:
    """Dimension and orthonormal basis of the generated real Lie algebra.

    Hermitian representatives are used throughout (K = -i[A, B] is Hermitian
    when A, B are), which is equivalent to closing the anti-Hermitian algebra.
    A commutator's residual is kept when its norm exceeds ``tol`` times the
    commutator's own norm; the iteration stops as soon as the basis reaches
    d² - 1 (the algebra cannot be larger) or no pair yields anything new.
    """
    dim = generators.dim
    max_dim = dim * dim - 1
    vec = _Vectorizer(dim)

    basis = np.zeros((max_dim, dim * dim))
    mats = np.zeros((max_dim, dim, dim), dtype=complex)
    n = 0
    commutators = 0

    def orthonormalize_rows(rows: np.ndarray, input_norms: np.ndarray) -> None:
        """Twice-projected Gram-Schmidt; append surviving directions."""
        nonlocal n
        if n:
            for _ in range(2):
                rows = rows - (rows @ basis[:n].T) @ basis[:n]
        batch_start = n
        for row, ref in zip(rows, input_norms):
            if n >= max_dim:
                return
            if n > batch_start:
                # Rows appended within this batch were not in the library yet.
                newly = basis[batch_start:n]
                for _ in range(2):
                    row = row - (newly @ row) @ newly
            residual = np.linalg.norm(row)
            if residual > tol * ref and residual > 1e-13:
                basis[n] = row / residual
                mats[n] = vec.backward(basis[n])
                n += 1

    # Seed the library with the (normalized) generators themselves.
    seed = np.stack([op / np.linalg.norm(op) for op in generators.operators])
    orthonormalize_rows(vec.forward(seed), np.ones(len(generators)))

    # March one operator at a time against everything before it; every
    # unordered pair is visited exactly once, new operators join the queue.
    a = 1
    while a < n and n < max_dim:
        A = mats[a]
        earlier = mats[:a]
        comm = A @ earlier - earlier @ A
        commutators += a
        cand = vec.forward(-1j * comm)
        norms = np.linalg.norm(cand, axis=1)
        keep = norms > 1e-12
        if np.any(keep):
            orthonormalize_rows(cand[keep], norms[keep])
        a += 1

    return LieClosureResult(
        dimension=n,
        max_dimension=max_dim,
        controllable=n == max_dim,
        basis=basis[:n].copy(),
        commutator_count=commutators,
    )


def is_controllable(
    config: ControlConfiguration, tol: float = DEFAULT_TOL
) -> LieClosureResult:
    """Closure result for a configuration's generator set."""
    return lie_closure(generator_set(config), tol=tol)


# ---------------------------------------------------------------------------
# Configuration scan

SCAN_CLASSES = ("all", "all-but-clock", "edge-only", "none", "other")


def _edge_transitions(system: SpinSystem) -> set[MicrowaveTransition]:
    """The four sign-matched edge transitions (±f- -> ±(f-±1))."""
    fm = system.f_minus
    return {
        MicrowaveTransition(fm, fm + 1),
        MicrowaveTransition(-fm, -(fm + 1)),
        MicrowaveTransition(fm, fm - 1),
        MicrowaveTransition(-fm, -(fm - 1)),
    }


def classify_transition_set(
    system: SpinSystem, controllable: set[MicrowaveTransition]
) -> str:
    """Name the set of controllable transitions of one scanned configuration."""
    everything = set(system.transitions())
    clock = system.clock_transition()
    if controllable == everything:
        return "all"
    if controllable == everything - {clock}:
        return "all-but-clock"
    if controllable == _edge_transitions(system):
        return "edge-only"
    if not controllable:
        return "none"
    return "other"


@dataclass(frozen=True)
class ScanRow:
    """One scanned configuration: its axes, verdicts, and outcome class."""

    rf_polarizations: int
    microwave_amplitude: str  # 'controlled' | 'fixed'
    microwave_phase: str  # 'controlled' | 'fixed'
    detuned: bool
    dimensions: dict[MicrowaveTransition, int]
    controllable: dict[MicrowaveTransition, bool]
    class_name: str

    def axes_label(self) -> str:
        return (
            f"rf={self.rf_polarizations} "
            f"mw_amp={self.microwave_amplitude} mw_phase={self.microwave_phase} "
            f"{'detuned' if self.detuned else 'resonant'}"
        )


@dataclass(frozen=True)
class ScanResult:
    """All scanned cells plus the transition list they were scanned over."""

    system: SpinSystem
    transitions: tuple[MicrowaveTransition, ...]
    rows: tuple[ScanRow, ...]

    def transition_counts(self) -> dict[MicrowaveTransition, int]:
        """How many scanned configurations control each transition."""
        return {
            t: sum(row.controllable[t] for row in self.rows) for t in self.transitions
        }


def scan_configuration_axes(
    detuned_values: tuple[bool, ...] = (False, True),
) -> list[tuple[int, str, str, bool]]:
    """The scan grid: rf polarizations x mw amplitude x mw phase x detuning."""
    axes = []
    for n_rf in (2, 1):
        for mw_amp in ("controlled", "fixed"):
            for mw_phase in ("controlled", "fixed"):
                for detuned in detuned_values:
                    axes.append((n_rf, mw_amp, mw_phase, detuned))
    return axes


def build_scan_configuration(
    system: SpinSystem,
    transition: MicrowaveTransition,
    n_rf: int,
    mw_amplitude: str,
    mw_phase: str,
    detuned: bool,
    rf_rabi: float | None = None,
    microwave_rabi: float | None = None,
) -> ControlConfiguration:
    """Concrete configuration for one scan cell."""
    rf_rabi = rad_per_us(15.0) if rf_rabi is None else rf_rabi
    microwave_rabi = rad_per_us(40.0) if microwave_rabi is None else microwave_rabi
    channels = [
        ChannelSpec(kind="rf_x", max_rabi=rf_rabi, slew_time=10.0),
    ]
    if n_rf == 2:
        channels.append(ChannelSpec(kind="rf_y", max_rabi=rf_rabi, slew_time=10.0))
    elif n_rf != 1:
        raise ValueError("rf polarization count must be 1 or 2")
    channels.append(
        ChannelSpec(
            kind="microwave",
            max_rabi=microwave_rabi,
            slew_time=1.0,
            amplitude_mode="controlled" if mw_amplitude == "controlled" else "fixed_at_max",
            phase_mode="controlled" if mw_phase == "controlled" else "fixed",
            transition=transition,
        )
    )
    return ControlConfiguration(
        system=system,
        channels=tuple(channels),
        rf_detuning=DETUNING_FRACTION * rf_rabi if detuned else 0.0,
        microwave_detuning=DETUNING_FRACTION * microwave_rabi if detuned else 0.0,
    )


def scan_configurations(
    system: SpinSystem,
    detuned_values: tuple[bool, ...] = (False, True),
    transitions: tuple[MicrowaveTransition, ...] | None = None,
    tol: float = DEFAULT_TOL,
) -> ScanResult:
    """Controllability verdict for every (configuration, transition) cell.

    The full grid covers one or two rf polarizations (always amplitude and
    phase controlled), microwave amplitude/phase each controlled or fixed,
    and resonant vs. detuned drift; restricting ``detuned_values`` or
    ``transitions`` gives the reduced smoke scan.
    """
    if transitions is None:
        transitions = tuple(system.transitions())
    rows = []
    for n_rf, mw_amp, mw_phase, detuned in scan_configuration_axes(detuned_values):
        dims: dict[MicrowaveTransition, int] = {}
        verdicts: dict[MicrowaveTransition, bool] = {}
        for transition in transitions:
            config = build_scan_configuration(
                system, transition, n_rf, mw_amp, mw_phase, detuned
            )
            result = is_controllable(config, tol=tol)
            dims[transition] = result.dimension
            verdicts[transition] = result.controllable
        controllable = {t for t, ok in verdicts.items() if ok}
        rows.append(
            ScanRow(
                rf_polarizations=n_rf,
                microwave_amplitude=mw_amp,
                microwave_phase=mw_phase,
                detuned=detuned,
                dimensions=dims,
                controllable=verdicts,
                class_name=classify_transition_set(system, controllable),
            )
        )
    return ScanResult(system=system, transitions=transitions, rows=tuple(rows))
