"""Slew-limited control waveforms: knot vectors and spline-sampled streams.

Each time-dependent channel is parameterized by knot values on a uniform grid
whose spacing equals the channel's slew time.  Between adjacent knots the
amplitude may traverse at most its full range ``[0, max_rabi]`` and the phase
at most 2π; fine-grained samples for propagation come from natural cubic
splines through the knots.  Phases live on the real line (unwrapped) so that
the slew constraint cannot be aliased away by modular jumps.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field

import numpy as np
from scipy.interpolate import CubicSpline

from .hamiltonians import ChannelSpec, ControlConfiguration, ControlSample

TWO_PI = 2.0 * np.pi

#: Default integration-grid spacing (µs): 10× finer than the required
#: ``min slew_time / 10`` bound for the fastest standard channel (1 µs).
DEFAULT_DT = 0.1

#: Fractional tolerance used when checking grid commensurability.
_GRID_RTOL = 1e-9

#: Absolute slack allowed on bound and slew checks (values exactly at a limit
#: are legal; this absorbs roundoff from serialization and projection).
_LIMIT_TOL = 1e-9

WAVEFORM_FORMAT = "spinctl-waveform/1"


def knot_count(total_time: float, slew_time: float) -> int:
    """Number of knots (both endpoints included) for a uniform slew grid.

    Raises ``ValueError`` unless ``total_time`` is a positive integer multiple
    of ``slew_time``.
    """
    if total_time <= 0:
        raise ValueError("total_time must be positive")
    ratio = total_time / slew_time
    n = round(ratio)
    if n < 1 or abs(ratio - n) > _GRID_RTOL * max(1.0, ratio):
        raise ValueError(
            f"total_time {total_time} µs is not a multiple of the "
            f"slew time {slew_time} µs"
        )
    return n + 1


def knot_times(total_time: float, slew_time: float) -> np.ndarray:
    """Uniform knot grid from 0 to ``total_time`` with slew-time spacing."""
    n = knot_count(total_time, slew_time)
    return np.linspace(0.0, total_time, n)


@dataclass(frozen=True)
class ChannelKnots:
    """Knot streams for one channel; frozen streams carry ``None``."""

    times: np.ndarray
    amplitude: np.ndarray | None = None
    phase: np.ndarray | None = None

    def __post_init__(self) -> None:
        object.__setattr__(self, "times", np.asarray(self.times, dtype=float))
        for name in ("amplitude", "phase"):
            values = getattr(self, name)
            if values is not None:
                values = np.asarray(values, dtype=float)
                object.__setattr__(self, name, values)
                if values.shape != self.times.shape:
                    raise ValueError(f"{name} knots must match the knot grid")


@dataclass(frozen=True)
class WaveformKnots:
    """A full control waveform: one ``ChannelKnots`` per configured channel."""

    total_time: float
    channels: tuple[ChannelKnots, ...]

    def __post_init__(self) -> None:
        object.__setattr__(self, "channels", tuple(self.channels))
        if self.total_time <= 0:
            raise ValueError("total_time must be positive")


@dataclass(frozen=True)
class Violation:
    """One bound or slew-limit violation at a specific knot."""

    channel: str
    stream: str  # "amplitude" or "phase"
    index: int
    magnitude: float  # amount by which the limit is exceeded

    def __str__(self) -> str:
        return (
            f"{self.channel}.{self.stream} knot {self.index}: "
            f"limit exceeded by {self.magnitude:.3g}"
        )


@dataclass(frozen=True)
class SampledControls:
    """Control streams evaluated on the integration grid.

    ``amplitudes`` and ``phases`` have shape ``(n_channels, n_times)`` with
    rows aligned to the configuration's channel list (off channels are zero
    rows).  ``clamp_events`` counts, per channel, the samples whose splined
    amplitude left ``[0, max_rabi]`` before clamping.
    """

    times: np.ndarray
    amplitudes: np.ndarray
    phases: np.ndarray
    clamp_events: tuple[int, ...] = field(default=())

    @property
    def total_time(self) -> float:
        return float(self.times[-1])

    def __len__(self) -> int:
        return self.times.size

    def sample_at(self, index: int) -> ControlSample:
        return ControlSample(
            amplitudes=tuple(self.amplitudes[:, index]),
            phases=tuple(self.phases[:, index]),
        )

    def quadratures(self) -> tuple[np.ndarray, np.ndarray]:
        """In-phase and quadrature components Ω·cos φ and Ω·sin φ."""
        return (
            self.amplitudes * np.cos(self.phases),
            self.amplitudes * np.sin(self.phases),
        )


def _check_match(config: ControlConfiguration, knots: WaveformKnots) -> None:
    """Structural consistency of a knot set with its configuration."""
    if len(knots.channels) != len(config.channels):
        raise ValueError(
            f"waveform has {len(knots.channels)} channels, "
            f"configuration has {len(config.channels)}"
        )
    for spec, ck in zip(config.channels, knots.channels):
        expected = knot_times(knots.total_time, spec.slew_time)
        if ck.times.size != expected.size or not np.allclose(
            ck.times, expected, atol=_GRID_RTOL * max(1.0, knots.total_time)
        ):
            raise ValueError(f"channel {spec.label()}: knot grid mismatch")
        if spec.controls_amplitude != (ck.amplitude is not None):
            raise ValueError(
                f"channel {spec.label()}: amplitude knots "
                f"{'missing' if spec.controls_amplitude else 'unexpected'}"
            )
        if spec.controls_phase != (ck.phase is not None):
            raise ValueError(
                f"channel {spec.label()}: phase knots "
                f"{'missing' if spec.controls_phase else 'unexpected'}"
            )


def random_knots(
    config: ControlConfiguration, total_time: float, rng_seed: int
) -> WaveformKnots:
    """Draw a random feasible waveform, reproducible from ``rng_seed``.

    Amplitudes are uniform on ``[0.2, 1.0]·max_rabi`` (never seeding a dead
    channel); phases start uniform on ``[0, 2π)`` and take uniform steps
    within ±π/2 per interval — well inside the ±2π reachable window, so the
    slew constraints hold by construction.  The narrow step window matters:
    a walk that wound a full turn per interval would make the channel's
    quadratures self-average to nearly zero, seeding the search in a flat,
    effectively drive-less region.
    """
    for spec in config.active_channels:
        if total_time < spec.slew_time:
            raise ValueError(
                f"total_time {total_time} µs is shorter than the "
                f"{spec.label()} slew time {spec.slew_time} µs"
            )
    rng = np.random.default_rng(rng_seed)
    channels = []
    for spec in config.channels:
        times = knot_times(total_time, spec.slew_time)
        n = times.size
        amplitude = None
        phase = None
        if spec.controls_amplitude:
            amplitude = spec.max_rabi * rng.uniform(0.2, 1.0, size=n)
        if spec.controls_phase:
            steps = rng.uniform(-np.pi / 2, np.pi / 2, size=n)
            steps[0] = rng.uniform(0.0, TWO_PI)
            phase = np.cumsum(steps)
        channels.append(ChannelKnots(times=times, amplitude=amplitude, phase=phase))
    return WaveformKnots(total_time=total_time, channels=tuple(channels))


def validate(config: ControlConfiguration, knots: WaveformKnots) -> list[Violation]:
    """Check amplitude bounds and per-interval slew limits on every stream.

    Returns one :class:`Violation` per offending knot (empty when feasible).
    Values exactly at a limit pass; a small absolute tolerance absorbs
    roundoff.  Structural mismatches with the configuration raise instead.
    """
    _check_match(config, knots)
    violations: list[Violation] = []
    for spec, ck in zip(config.channels, knots.channels):
        name = spec.label()
        if ck.amplitude is not None:
            low = ck.amplitude < -_LIMIT_TOL
            high = ck.amplitude > spec.max_rabi + _LIMIT_TOL
            for i in np.flatnonzero(low | high):
                excess = max(-ck.amplitude[i], ck.amplitude[i] - spec.max_rabi)
                violations.append(Violation(name, "amplitude", int(i), float(excess)))
            jumps = np.abs(np.diff(ck.amplitude))
            for i in np.flatnonzero(jumps > spec.max_rabi + _LIMIT_TOL):
                violations.append(
                    Violation(
                        name, "amplitude", int(i + 1), float(jumps[i] - spec.max_rabi)
                    )
                )
        if ck.phase is not None:
            jumps = np.abs(np.diff(ck.phase))
            for i in np.flatnonzero(jumps > TWO_PI + _LIMIT_TOL):
                violations.append(
                    Violation(name, "phase", int(i + 1), float(jumps[i] - TWO_PI))
                )
    return violations


def interpolation_matrix(knot_grid: np.ndarray, sample_times: np.ndarray) -> np.ndarray:
    """Dense linear map from knot values to natural-cubic-spline samples.

    ``samples = M @ knot_values`` with ``M`` of shape
    ``(len(sample_times), len(knot_grid))``; the spline solve is a fixed
    linear system, so the map is exact.
    """
    knot_grid = np.asarray(knot_grid, dtype=float)
    if knot_grid.size < 2:
        return np.ones((np.asarray(sample_times).size, 1))
    spline = CubicSpline(knot_grid, np.eye(knot_grid.size), bc_type="natural")
    return spline(np.asarray(sample_times, dtype=float))


def sample_times(total_time: float, dt: float) -> np.ndarray:
    """Integration grid 0, dt, 2dt, …, T with ``floor(T/dt)+1`` samples.

    When ``dt`` does not divide ``total_time`` the remainder is absorbed
    into the final interval.
    """
    if dt <= 0:
        raise ValueError("dt must be positive")
    n_intervals = int(np.floor(total_time / dt + _GRID_RTOL))
    if n_intervals < 1:
        raise ValueError("dt exceeds the waveform duration")
    times = np.arange(n_intervals, dtype=float) * dt
    return np.append(times, total_time)


def interpolate(
    config: ControlConfiguration, knots: WaveformKnots, dt: float = DEFAULT_DT
) -> SampledControls:
    """Spline-evaluate every stream on the integration grid.

    Natural cubic splines run through the knots of each controlled stream;
    frozen streams are constant.  Splined amplitudes are clamped back into
    ``[0, max_rabi]`` and the clamp count per channel is reported.
    """
    _check_match(config, knots)
    smallest = min(
        (c.slew_time for c in config.active_channels), default=knots.total_time
    )
    if dt > smallest / 10 + _LIMIT_TOL:
        raise ValueError(
            f"dt = {dt} µs is too coarse; require dt ≤ min slew time / 10 "
            f"= {smallest / 10} µs"
        )
    times = sample_times(knots.total_time, dt)
    n_ch = len(config.channels)
    amplitudes = np.zeros((n_ch, times.size))
    phases = np.zeros((n_ch, times.size))
    clamp_events = []
    for row, (spec, ck) in enumerate(zip(config.channels, knots.channels)):
        clamped = 0
        if spec.is_off:
            clamp_events.append(0)
            continue
        if ck.amplitude is not None:
            raw = CubicSpline(ck.times, ck.amplitude, bc_type="natural")(times)
            outside = (raw < 0.0) | (raw > spec.max_rabi)
            clamped = int(np.count_nonzero(outside))
            amplitudes[row] = np.clip(raw, 0.0, spec.max_rabi)
        else:
            amplitudes[row] = spec.max_rabi
        if ck.phase is not None:
            phases[row] = CubicSpline(ck.times, ck.phase, bc_type="natural")(times)
        else:
            phases[row] = spec.fixed_phase
        clamp_events.append(clamped)
    return SampledControls(
        times=times,
        amplitudes=amplitudes,
        phases=phases,
        clamp_events=tuple(clamp_events),
    )


# ---------------------------------------------------------------------------
# Free-variable packing (optimizer interface)
# ---------------------------------------------------------------------------


def free_variable_count(config: ControlConfiguration, total_time: float) -> int:
    """Number of scalar degrees of freedom in a waveform for this config."""
    total = 0
    for spec in config.channels:
        n = knot_count(total_time, spec.slew_time)
        if spec.controls_amplitude:
            total += n
        if spec.controls_phase:
            total += n
    return total


def knots_to_vector(config: ControlConfiguration, knots: WaveformKnots) -> np.ndarray:
    """Concatenate all controlled knot streams (config order, amp then phase)."""
    _check_match(config, knots)
    parts: list[np.ndarray] = []
    for ck in knots.channels:
        if ck.amplitude is not None:
            parts.append(ck.amplitude)
        if ck.phase is not None:
            parts.append(ck.phase)
    if not parts:
        return np.zeros(0)
    return np.concatenate(parts)


def vector_to_knots(
    config: ControlConfiguration, total_time: float, vector: np.ndarray
) -> WaveformKnots:
    """Inverse of :func:`knots_to_vector` for a given duration."""
    vector = np.asarray(vector, dtype=float)
    expected = free_variable_count(config, total_time)
    if vector.size != expected:
        raise ValueError(f"expected {expected} free variables, got {vector.size}")
    channels = []
    cursor = 0
    for spec in config.channels:
        times = knot_times(total_time, spec.slew_time)
        n = times.size
        amplitude = None
        phase = None
        if spec.controls_amplitude:
            amplitude = vector[cursor : cursor + n].copy()
            cursor += n
        if spec.controls_phase:
            phase = vector[cursor : cursor + n].copy()
            cursor += n
        channels.append(ChannelKnots(times=times, amplitude=amplitude, phase=phase))
    return WaveformKnots(total_time=total_time, channels=tuple(channels))


def project_feasible(
    config: ControlConfiguration, knots: WaveformKnots
) -> WaveformKnots:
    """Project a knot set onto the feasible bound-and-slew region.

    Amplitudes are clipped into ``[0, max_rabi]`` (with full-range-per-interval
    slew, the box alone is the feasible set).  Phase streams keep their first
    knot and clip each subsequent step into the ±2π window, sweeping forward
    once; the result always validates cleanly.
    """
    _check_match(config, knots)
    channels = []
    for spec, ck in zip(config.channels, knots.channels):
        amplitude = ck.amplitude
        phase = ck.phase
        if amplitude is not None:
            amplitude = np.clip(amplitude, 0.0, spec.max_rabi)
        if phase is not None:
            steps = np.clip(np.diff(phase), -TWO_PI, TWO_PI)
            phase = np.concatenate(([phase[0]], phase[0] + np.cumsum(steps)))
        channels.append(ChannelKnots(times=ck.times, amplitude=amplitude, phase=phase))
    return WaveformKnots(total_time=knots.total_time, channels=tuple(channels))


# ---------------------------------------------------------------------------
# Serialization
# ---------------------------------------------------------------------------


def _stream_columns(config: ControlConfiguration) -> list[tuple[int, str, str]]:
    """(channel row, stream, column name) for every controlled stream."""
    columns = []
    for row, spec in enumerate(config.channels):
        if spec.controls_amplitude:
            columns.append((row, "amplitude", f"{spec.label()}.amplitude"))
        if spec.controls_phase:
            columns.append((row, "phase", f"{spec.label()}.phase"))
    return columns


def write_knots_csv(
    config: ControlConfiguration, knots: WaveformKnots, path
) -> None:
    """Write knot streams as delimited text.

    One row per knot time in the union of channel grids; cells are empty
    where a stream has no knot at that time.  Values carry 17 significant
    digits so that a read-back is bit-exact.  Times are µs, amplitudes
    rad/µs, phases rad.
    """
    _check_match(config, knots)
    columns = _stream_columns(config)
    union = np.unique(np.concatenate([ck.times for ck in knots.channels]))
    lines = [f"# {WAVEFORM_FORMAT} time=us amplitude=rad_per_us phase=rad"]
    lines.append(",".join(["time"] + [name for _, _, name in columns]))
    for t in union:
        cells = [f"{t:.17g}"]
        for row, stream, _ in columns:
            ck = knots.channels[row]
            hits = np.flatnonzero(np.abs(ck.times - t) < _LIMIT_TOL)
            if hits.size:
                value = getattr(ck, stream)[hits[0]]
                cells.append(f"{value:.17g}")
            else:
                cells.append("")
        lines.append(",".join(cells))
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("\n".join(lines) + "\n")


def read_knots_csv(config: ControlConfiguration, path) -> WaveformKnots:
    """Parse a waveform file written by :func:`write_knots_csv`."""
    with open(path, encoding="utf-8") as fh:
        lines = [line.rstrip("\n") for line in fh if line.strip()]
    if not lines or not re.match(rf"#\s*{re.escape(WAVEFORM_FORMAT)}\b", lines[0]):
        raise ValueError(f"{path}: not a {WAVEFORM_FORMAT} file")
    header = lines[1].split(",")
    if header[0] != "time":
        raise ValueError(f"{path}: first column must be 'time'")
    by_name: dict[str, list[tuple[float, float]]] = {name: [] for name in header[1:]}
    times_seen: list[float] = []
    for line in lines[2:]:
        cells = line.split(",")
        t = float(cells[0])
        times_seen.append(t)
        for name, cell in zip(header[1:], cells[1:]):
            if cell:
                by_name[name].append((t, float(cell)))
    if not times_seen:
        raise ValueError(f"{path}: waveform has no knots")
    total_time = max(times_seen)
    channels = []
    for spec in config.channels:
        grid = knot_times(total_time, spec.slew_time)
        amplitude = None
        phase = None
        for stream in ("amplitude", "phase"):
            wanted = (spec.controls_amplitude if stream == "amplitude"
                      else spec.controls_phase)
            name = f"{spec.label()}.{stream}"
            if not wanted:
                continue
            if name not in by_name:
                raise ValueError(f"{path}: missing column {name}")
            pairs = by_name[name]
            if len(pairs) != grid.size:
                raise ValueError(
                    f"{path}: column {name} has {len(pairs)} knots, "
                    f"expected {grid.size}"
                )
            values = np.empty(grid.size)
            for t, v in pairs:
                hits = np.flatnonzero(np.abs(grid - t) < _LIMIT_TOL)
                if not hits.size:
                    raise ValueError(f"{path}: column {name} has an off-grid knot at {t}")
                values[hits[0]] = v
            if stream == "amplitude":
                amplitude = values
            else:
                phase = values
        channels.append(ChannelKnots(times=grid, amplitude=amplitude, phase=phase))
    return WaveformKnots(total_time=total_time, channels=tuple(channels))
