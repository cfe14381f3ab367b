"""Run records and delimited result files, all with versioned headers.

A run record is a JSON document that makes a command reproducible from the
record alone: it embeds the exact configuration (float-level), the target,
the waveform knots, and every seed outcome.  The only fields that differ
between identical reruns are the volatile ones listed in
:data:`VOLATILE_KEYS` (creation timestamp and wall time).

CSV outputs (fidelity traces, controllability scans, benchmark tables)
start with a ``# <format>/<version>`` line followed by a column-name line.
"""

from __future__ import annotations

import json
from datetime import datetime, timezone

import numpy as np

from . import __version__
from . import waveform as wf
from .controllability import ScanResult

__all__ = [
    "RUN_FORMAT",
    "TRACE_FORMAT",
    "TRAJECTORY_FORMAT",
    "SCAN_FORMAT",
    "BENCHMARK_FORMAT",
    "BENCHMARK_LONG_FORMAT",
    "VOLATILE_KEYS",
    "state_to_payload",
    "payload_to_state",
    "knots_to_payload",
    "payload_to_knots",
    "write_record",
    "read_record",
    "strip_volatile",
    "write_trace_csv",
    "read_trace_csv",
    "write_trajectory_csv",
    "write_scan_csv",
    "write_scan_json",
    "write_benchmark_csv",
    "write_benchmark_long_csv",
]

RUN_FORMAT = "spinctl-run/1"
TRACE_FORMAT = "spinctl-trace/1"
TRAJECTORY_FORMAT = "spinctl-trajectory/1"
SCAN_FORMAT = "spinctl-scan/1"
BENCHMARK_FORMAT = "spinctl-benchmark/1"
BENCHMARK_LONG_FORMAT = "spinctl-benchmark-long/1"

VOLATILE_KEYS = ("created", "wall_time_s")


def state_to_payload(psi: np.ndarray) -> list[list[float]]:
    """Complex vector as [[re, im], ...] (JSON has no complex numbers)."""
    return [[float(z.real), float(z.imag)] for z in np.asarray(psi, dtype=complex)]


def payload_to_state(payload) -> np.ndarray:
    return np.array([complex(re, im) for re, im in payload])


def knots_to_payload(config, knots: wf.WaveformKnots) -> dict:
    """Waveform knots as a JSON-safe dict keyed by channel label."""
    channels = []
    for spec, ck in zip(config.channels, knots.channels):
        channels.append(
            {
                "label": spec.label(),
                "times": [float(t) for t in ck.times],
                "amplitude": (
                    None if ck.amplitude is None else [float(v) for v in ck.amplitude]
                ),
                "phase": None if ck.phase is None else [float(v) for v in ck.phase],
            }
        )
    return {"total_time": float(knots.total_time), "channels": channels}


def payload_to_knots(payload: dict) -> wf.WaveformKnots:
    channels = []
    for entry in payload["channels"]:
        times = np.array(entry["times"], dtype=float)
        amplitude = entry["amplitude"]
        phase = entry["phase"]
        channels.append(
            wf.ChannelKnots(
                times=times,
                amplitude=None if amplitude is None else np.array(amplitude),
                phase=None if phase is None else np.array(phase),
            )
        )
    return wf.WaveformKnots(
        total_time=float(payload["total_time"]), channels=tuple(channels)
    )


def write_record(path, record: dict, wall_time_s: float) -> dict:
    """Write a run record, adding format/version and the volatile fields.

    Returns the full dict as written.  Keys are sorted and floats use their
    shortest exact representation, so reruns produce byte-identical files
    except for the volatile fields.
    """
    full = dict(record)
    full["format"] = RUN_FORMAT
    full["tool_version"] = __version__
    full["created"] = datetime.now(timezone.utc).isoformat()
    full["wall_time_s"] = float(wall_time_s)
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(full, fh, indent=2, sort_keys=True)
        fh.write("\n")
    return full


def read_record(path) -> dict:
    with open(path, "r", encoding="utf-8") as fh:
        record = json.load(fh)
    if record.get("format") != RUN_FORMAT:
        raise ValueError(
            f"{path}: unsupported record format {record.get('format')!r}"
        )
    return record


def strip_volatile(record: dict) -> dict:
    """Copy of a record without the fields that legitimately vary per run."""
    return {k: v for k, v in record.items() if k not in VOLATILE_KEYS}


def write_trace_csv(path, history) -> None:
    """Fidelity-vs-iteration trace of the winning seed."""
    lines = [f"# {TRACE_FORMAT}", "iteration,fidelity"]
    lines += [f"{i},{f:.17g}" for i, f in enumerate(history)]
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("\n".join(lines) + "\n")


def read_trace_csv(path) -> list[float]:
    with open(path, "r", encoding="utf-8") as fh:
        lines = fh.read().splitlines()
    if not lines or lines[0] != f"# {TRACE_FORMAT}":
        raise ValueError(f"{path}: missing {TRACE_FORMAT} header")
    return [float(line.split(",")[1]) for line in lines[2:]]


def write_trajectory_csv(path, times, states, labels) -> None:
    """Basis-state populations along a propagated trajectory.

    ``labels`` are (F, m) pairs aligned with the state components.
    """
    states = np.asarray(states)
    # colon separator: a comma inside a label would break the CSV columns
    header = ["time_us"] + [f"pop({f:g}:{m:g})" for f, m in labels] + ["norm"]
    lines = [f"# {TRAJECTORY_FORMAT}", ",".join(header)]
    for t, psi in zip(times, states):
        pops = np.abs(psi) ** 2
        cells = [f"{t:.17g}"] + [f"{p:.17g}" for p in pops]
        cells.append(f"{float(np.linalg.norm(psi)):.17g}")
        lines.append(",".join(cells))
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("\n".join(lines) + "\n")


def _scan_columns(scan: ScanResult) -> list[str]:
    labels = [t.label() for t in scan.transitions]
    head = ["rf_polarizations", "microwave_amplitude", "microwave_phase", "drift"]
    return (
        head
        + [f"dim{lab}" for lab in labels]
        + [f"controllable{lab}" for lab in labels]
        + ["class"]
    )


def write_scan_csv(path, scan: ScanResult) -> None:
    """Wide controllability table: one row per configuration cell."""
    lines = [f"# {SCAN_FORMAT}", ",".join(_scan_columns(scan))]
    for row in scan.rows:
        cells = [
            str(row.rf_polarizations),
            row.microwave_amplitude,
            row.microwave_phase,
            "detuned" if row.detuned else "resonant",
        ]
        cells += [str(row.dimensions[t]) for t in scan.transitions]
        cells += [str(row.controllable[t]).lower() for t in scan.transitions]
        cells.append(row.class_name)
        lines.append(",".join(cells))
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("\n".join(lines) + "\n")


def write_scan_json(path, scan: ScanResult) -> None:
    """Structured scan result (same content as the CSV, easier to reload)."""
    payload = {
        "format": SCAN_FORMAT,
        "nuclear_spin": scan.system.nuclear_spin,
        "transitions": [t.label() for t in scan.transitions],
        "rows": [
            {
                "rf_polarizations": row.rf_polarizations,
                "microwave_amplitude": row.microwave_amplitude,
                "microwave_phase": row.microwave_phase,
                "detuned": row.detuned,
                "dimensions": {t.label(): row.dimensions[t] for t in scan.transitions},
                "controllable": {
                    t.label(): row.controllable[t] for t in scan.transitions
                },
                "class": row.class_name,
            }
            for row in scan.rows
        ],
    }
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(payload, fh, indent=2, sort_keys=True)
        fh.write("\n")


def write_benchmark_csv(path, table) -> None:
    """Wide benchmark table: one row per (variant, duration) cell."""
    n = table.n_states
    header = ["variant", "total_time_us", "mean_fidelity", "std_error"]
    header += [f"state_{i}" for i in range(n)]
    lines = [f"# {BENCHMARK_FORMAT}", ",".join(header)]
    for cell in table.cells:
        cells = [
            cell.variant,
            f"{cell.total_time:.17g}",
            f"{cell.mean_fidelity:.17g}",
            f"{cell.std_error:.17g}",
        ]
        cells += [f"{v:.17g}" for v in cell.state_fidelities]
        lines.append(",".join(cells))
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("\n".join(lines) + "\n")


def write_benchmark_long_csv(path, table) -> None:
    """Plot-ready long format: one row per underlying ascent."""
    header = "variant,total_time_us,state_index,seed,fidelity,iterations"
    lines = [f"# {BENCHMARK_LONG_FORMAT}", header]
    for run in table.runs:
        lines.append(
            ",".join(
                [
                    run.variant,
                    f"{run.total_time:.17g}",
                    str(run.state_index),
                    str(run.seed),
                    f"{run.fidelity:.17g}",
                    str(run.iterations),
                ]
            )
        )
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("\n".join(lines) + "\n")
