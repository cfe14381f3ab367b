"""Figure rendering for CLI reports (file output only, Agg backend).

Every function takes already-computed data plus an output path, writes one
PNG, and returns the path; nothing here opens windows or recomputes
physics.  Frequencies are displayed in kHz (cycle frequency) and phases in
units of π, matching the config-file conventions.
"""

from __future__ import annotations

import math

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

from .units import TWO_PI

__all__ = [
    "plot_waveform",
    "plot_fidelity_trace",
    "plot_benchmark",
    "plot_scan",
    "plot_wigner",
    "plot_populations",
]

_KHZ = TWO_PI * 1e-3  # rad/µs per kHz


def plot_waveform(config, controls, path, knots=None):
    """Amplitude and phase of every channel versus time.

    ``controls`` is a SampledControls; ``knots``, when given, adds the knot
    points on top of the interpolated curves.
    """
    n = len(config.channels)
    fig, axes = plt.subplots(n, 2, figsize=(9, 2.2 * n), squeeze=False, sharex=True)
    for i, spec in enumerate(config.channels):
        ax_amp, ax_phase = axes[i]
        ax_amp.plot(controls.times, controls.amplitudes[i] / _KHZ, lw=1.2)
        ax_phase.plot(controls.times, controls.phases[i] / math.pi, lw=1.2)
        if knots is not None:
            ck = knots.channels[i]
            if ck.amplitude is not None:
                ax_amp.plot(ck.times, ck.amplitude / _KHZ, ".", ms=4, color="k")
            if ck.phase is not None:
                ax_phase.plot(ck.times, ck.phase / math.pi, ".", ms=4, color="k")
        ax_amp.set_ylabel(f"{spec.label()}\namplitude (kHz)")
        ax_phase.set_ylabel("phase (π)")
        ax_amp.axhline(spec.max_rabi / _KHZ, color="0.7", lw=0.8, ls="--")
        ax_amp.set_ylim(bottom=0)
    axes[-1][0].set_xlabel("time (µs)")
    axes[-1][1].set_xlabel("time (µs)")
    fig.suptitle("control waveform")
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)
    return path


def plot_fidelity_trace(history, path):
    """Infidelity versus iteration for the winning seed (log scale)."""
    history = np.asarray(history, dtype=float)
    fig, ax = plt.subplots(figsize=(6, 4))
    infidelity = np.clip(1.0 - history, 1e-16, None)
    ax.semilogy(infidelity, lw=1.4)
    ax.set_xlabel("iteration")
    ax.set_ylabel("1 − fidelity")
    ax.set_title(f"gradient ascent: final fidelity {history[-1]:.6f}")
    ax.grid(True, which="both", alpha=0.3)
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)
    return path


def plot_benchmark(table, path):
    """Mean best-of-seeds fidelity versus duration, one series per variant."""
    fig, ax = plt.subplots(figsize=(6, 4))
    variants = []
    for cell in table.cells:
        if cell.variant not in variants:
            variants.append(cell.variant)
    for variant in variants:
        cells = [c for c in table.cells if c.variant == variant]
        cells.sort(key=lambda c: c.total_time)
        times = [c.total_time for c in cells]
        means = [c.mean_fidelity for c in cells]
        errs = [c.std_error for c in cells]
        ax.errorbar(times, means, yerr=errs, marker="o", capsize=3, label=variant)
    ax.set_xlabel("total time (µs)")
    ax.set_ylabel("mean fidelity (best of seeds)")
    ax.set_title(
        f"random-target benchmark ({table.n_states} states × {table.n_seeds} seeds)"
    )
    ax.legend()
    ax.grid(alpha=0.3)
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)
    return path


def plot_scan(scan, path):
    """Heatmap of closure dimension per (configuration, transition) cell."""
    labels = [t.label() for t in scan.transitions]
    dims = np.array(
        [[row.dimensions[t] for t in scan.transitions] for row in scan.rows]
    )
    full = scan.system.dim**2 - 1
    fig, ax = plt.subplots(
        figsize=(1.1 * len(labels) + 4, 0.42 * len(scan.rows) + 2)
    )
    im = ax.imshow(dims, cmap="viridis", vmin=0, vmax=full, aspect="auto")
    ax.set_xticks(range(len(labels)), labels, rotation=45, ha="right")
    ax.set_yticks(
        range(len(scan.rows)),
        [f"{row.axes_label()}  [{row.class_name}]" for row in scan.rows],
        fontsize=7,
    )
    for i, row in enumerate(scan.rows):
        for j, t in enumerate(scan.transitions):
            ok = row.controllable[t]
            ax.text(
                j,
                i,
                str(row.dimensions[t]),
                ha="center",
                va="center",
                fontsize=7,
                color="white" if not ok else "yellow",
                fontweight="bold" if ok else "normal",
            )
    fig.colorbar(im, ax=ax, label=f"closure dimension (full = {full})")
    ax.set_title("controllability scan")
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)
    return path


def plot_wigner(grid, path):
    """The four sphere fields as θ–φ maps with their radii in the titles."""
    r = grid.radii
    panels = [
        (grid.field_plus, f"upper manifold (radius {r.r_plus:.3f})"),
        (grid.field_minus, f"lower manifold (radius {r.r_minus:.3f})"),
        (grid.coherence_real, f"coherence, real (radius {r.r_real:.3f})"),
        (grid.coherence_imag, f"coherence, imag (radius {r.r_imag:.3f})"),
    ]
    vmax = max(np.abs(field).max() for field, _ in panels) or 1.0
    fig, axes = plt.subplots(2, 2, figsize=(10, 7), sharex=True, sharey=True)
    for ax, (field, title) in zip(axes.ravel(), panels):
        im = ax.pcolormesh(
            grid.phi,
            grid.theta,
            field,
            cmap="RdBu_r",
            vmin=-vmax,
            vmax=vmax,
            shading="nearest",
        )
        ax.set_title(title, fontsize=10)
        ax.invert_yaxis()
    for ax in axes[-1]:
        ax.set_xlabel("φ (rad)")
    for ax in axes[:, 0]:
        ax.set_ylabel("θ (rad)")
    fig.colorbar(im, ax=axes, shrink=0.85, label="field value")
    fig.suptitle(f"four-sphere representation (coherence weight {r.coherence:.3f})")
    fig.savefig(path, dpi=150)
    plt.close(fig)
    return path


def plot_populations(times, states, labels, path):
    """Basis-state populations along a trajectory.

    ``labels`` are (F, m) pairs aligned with the state components; the upper
    manifold is drawn solid, the lower dashed.
    """
    populations = np.abs(np.asarray(states)) ** 2
    f_max = max(f for f, _ in labels)
    fig, ax = plt.subplots(figsize=(8, 4.5))
    cmap = plt.get_cmap("tab20")
    for idx, (f, m) in enumerate(labels):
        style = "-" if f == f_max else "--"
        ax.plot(
            times,
            populations[:, idx],
            style,
            color=cmap(idx % 20),
            lw=1.1,
            label=f"|{f:g},{m:g}⟩",
        )
    ax.set_xlabel("time (µs)")
    ax.set_ylabel("population")
    ax.set_ylim(-0.02, 1.02)
    ax.legend(ncol=4, fontsize=7, loc="upper center")
    ax.grid(alpha=0.3)
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)
    return path
