"""Versioned YAML configuration files with presets and explicit units.

A config file either names a preset (``preset: cs-baseline``) or describes
the system and channels in full; explicit sections override what the preset
provides.  All frequencies and times are unit strings ("15 kHz", "10 us") —
bare numbers are rejected so the cycles-vs-radians ambiguity never reaches a
user file — and the 2π convention is applied on parse.

Separately from the human-facing schema, :func:`config_to_dict` /
:func:`config_from_dict` give an exact float-level round trip of a
:class:`ControlConfiguration` for embedding in run records.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, replace

import yaml

from . import waveform as wf
from .hamiltonians import ChannelSpec, ControlConfiguration, MicrowaveTransition
from .optimizer import OptimizerSettings
from .presets import PRESETS
from .spin_algebra import SpinSystem
from .units import parse_frequency, parse_phase, parse_time

__all__ = [
    "CONFIG_FORMAT",
    "BenchmarkPlan",
    "ConfigBundle",
    "load_config",
    "parse_config_data",
    "resolve_config",
    "parse_transition",
    "config_to_dict",
    "config_from_dict",
]

CONFIG_FORMAT = "spinctl-config/1"

DEFAULT_THRESHOLD = 0.98
DEFAULT_BENCHMARK_VARIANTS = ("cs-baseline", "cs-two-microwave")
DEFAULT_BENCHMARK_TIMES = (50.0, 100.0, 150.0)
DEFAULT_BENCHMARK_STATES = 5
DEFAULT_BENCHMARK_SEEDS = 5
DEFAULT_BENCHMARK_ITERATIONS = 150
DEFAULT_BENCHMARK_STATE_SEED = 2017

_AMPLITUDE_MODES = {
    "controlled": "controlled",
    "fixed-at-max": "fixed_at_max",
    "fixed_at_max": "fixed_at_max",
    "off": "off",
}
_PHASE_MODES = {"controlled": "controlled", "fixed": "fixed"}
_TRANSITION = re.compile(
    r"^\s*([+-]?\d+(?:\.\d+)?)\s*->\s*([+-]?\d+(?:\.\d+)?)\s*$"
)


@dataclass(frozen=True)
class BenchmarkPlan:
    """Benchmark sweep parameters resolved from a config file (or defaults)."""

    variants: tuple[tuple[str, ControlConfiguration], ...]
    times: tuple[float, ...]
    n_states: int
    n_seeds: int
    max_iterations: int
    state_seed: int


@dataclass(frozen=True)
class ConfigBundle:
    """Everything a command needs: the physics plus run-control settings."""

    config: ControlConfiguration
    source: str
    settings: OptimizerSettings
    dt: float
    threshold: float
    benchmark: BenchmarkPlan


class ConfigError(ValueError):
    """Malformed configuration; the message names the offending key."""


def _fail(source: str, key: str, message: str) -> None:
    raise ConfigError(f"{source}: config key '{key}': {message}")


def _require_mapping(source: str, key: str, value) -> dict:
    if not isinstance(value, dict):
        _fail(source, key, f"expected a mapping, got {type(value).__name__}")
    return value


def _reject_unknown(source: str, key: str, mapping: dict, allowed: set[str]) -> None:
    for name in mapping:
        if name not in allowed:
            where = f"{key}.{name}" if key else str(name)
            _fail(source, where, "unknown key")


def parse_transition(text, source: str = "<config>", key: str = "transition"):
    """Parse a transition spec: 'clock' or 'm_minus -> m_plus' (e.g. '-3 -> -4')."""
    if isinstance(text, str) and text.strip().lower() == "clock":
        return MicrowaveTransition(m_minus=0, m_plus=0)
    match = _TRANSITION.match(text) if isinstance(text, str) else None
    if not match:
        _fail(source, key, f"expected 'clock' or 'm- -> m+', got {text!r}")
    return MicrowaveTransition(
        m_minus=float(match.group(1)), m_plus=float(match.group(2))
    )


def _parse_channel(source: str, key: str, data) -> ChannelSpec:
    data = _require_mapping(source, key, data)
    allowed = {"kind", "rabi", "slew", "amplitude", "phase", "fixed_phase", "transition"}
    _reject_unknown(source, key, data, allowed)
    for required in ("kind", "rabi", "slew"):
        if required not in data:
            _fail(source, f"{key}.{required}", "missing required key")
    try:
        max_rabi = parse_frequency(data["rabi"])
    except ValueError as exc:
        _fail(source, f"{key}.rabi", str(exc))
    try:
        slew_time = parse_time(data["slew"])
    except ValueError as exc:
        _fail(source, f"{key}.slew", str(exc))
    amplitude = data.get("amplitude", "controlled")
    if amplitude not in _AMPLITUDE_MODES:
        _fail(source, f"{key}.amplitude", f"expected one of {sorted(_AMPLITUDE_MODES)}")
    phase = data.get("phase", "controlled")
    if phase not in _PHASE_MODES:
        _fail(source, f"{key}.phase", f"expected one of {sorted(_PHASE_MODES)}")
    try:
        fixed_phase = parse_phase(data.get("fixed_phase", 0.0))
    except ValueError as exc:
        _fail(source, f"{key}.fixed_phase", str(exc))
    transition = None
    if data["kind"] == "microwave":
        if "transition" not in data:
            _fail(source, f"{key}.transition", "microwave channels need a transition")
        transition = parse_transition(
            data["transition"], source, f"{key}.transition"
        )
    elif "transition" in data:
        _fail(source, f"{key}.transition", "only microwave channels take a transition")
    try:
        return ChannelSpec(
            kind=data["kind"],
            max_rabi=max_rabi,
            slew_time=slew_time,
            amplitude_mode=_AMPLITUDE_MODES[amplitude],
            phase_mode=_PHASE_MODES[phase],
            fixed_phase=fixed_phase,
            transition=transition,
        )
    except ValueError as exc:
        _fail(source, key, str(exc))


def _parse_system_config(source: str, data: dict) -> ControlConfiguration:
    preset_name = data.get("preset")
    base: ControlConfiguration | None = None
    if preset_name is not None:
        if preset_name not in PRESETS:
            _fail(source, "preset", f"unknown preset {preset_name!r}; choose from {sorted(PRESETS)}")
        base = PRESETS[preset_name]()

    if "system" in data:
        system_data = _require_mapping(source, "system", data["system"])
        _reject_unknown(source, "system", system_data, {"nuclear_spin"})
        if "nuclear_spin" not in system_data:
            _fail(source, "system.nuclear_spin", "missing required key")
        try:
            system = SpinSystem(float(system_data["nuclear_spin"]))
        except (TypeError, ValueError) as exc:
            _fail(source, "system.nuclear_spin", str(exc))
    elif base is not None:
        system = base.system
    else:
        _fail(source, "system", "required unless a preset is named")

    if "channels" in data:
        if not isinstance(data["channels"], list) or not data["channels"]:
            _fail(source, "channels", "expected a non-empty list")
        channels = tuple(
            _parse_channel(source, f"channels[{i}]", entry)
            for i, entry in enumerate(data["channels"])
        )
    elif base is not None:
        channels = base.channels
    else:
        _fail(source, "channels", "required unless a preset is named")

    rf_detuning = base.rf_detuning if base is not None else 0.0
    microwave_detuning = base.microwave_detuning if base is not None else 0.0
    if "detuning" in data:
        det = _require_mapping(source, "detuning", data["detuning"])
        _reject_unknown(source, "detuning", det, {"rf", "microwave"})
        try:
            if "rf" in det:
                rf_detuning = parse_frequency(det["rf"])
            if "microwave" in det:
                microwave_detuning = parse_frequency(det["microwave"])
        except ValueError as exc:
            _fail(source, "detuning", str(exc))

    try:
        return ControlConfiguration(
            system=system,
            channels=channels,
            rf_detuning=rf_detuning,
            microwave_detuning=microwave_detuning,
        )
    except ValueError as exc:
        _fail(source, "channels", str(exc))


def _parse_optimize(source: str, data) -> tuple[OptimizerSettings, float | None, float]:
    """Returns (settings, dt override or None, exit-code fidelity threshold)."""
    settings = OptimizerSettings()
    dt = None
    threshold = DEFAULT_THRESHOLD
    if data is None:
        return settings, dt, threshold
    data = _require_mapping(source, "optimize", data)
    allowed = {
        "max_iterations",
        "fidelity_target",
        "gradient_tolerance",
        "stop_fidelity",
        "step_size",
        "seeds",
        "line_search",
        "dt",
        "threshold",
    }
    _reject_unknown(source, "optimize", data, allowed)
    kwargs = {}
    # Coerce explicitly: YAML reads e.g. '1e-7' (no dot) as a string, and a
    # string tolerance would only explode deep inside the optimizer.
    coercers = {
        "max_iterations": int,
        "seeds": int,
        "fidelity_target": float,
        "gradient_tolerance": float,
        "stop_fidelity": float,
        "step_size": float,
    }
    for name, coerce in coercers.items():
        if name in data and data[name] is not None:
            try:
                kwargs[name] = coerce(data[name])
            except (TypeError, ValueError):
                _fail(
                    source,
                    f"optimize.{name}",
                    f"expected a number, got {data[name]!r}",
                )
    if "line_search" in data:
        if not isinstance(data["line_search"], bool):
            _fail(source, "optimize.line_search", "expected true or false")
        kwargs["line_search"] = data["line_search"]
    try:
        settings = OptimizerSettings(**kwargs)
    except (TypeError, ValueError) as exc:
        _fail(source, "optimize", str(exc))
    if "dt" in data:
        try:
            dt = parse_time(data["dt"])
        except ValueError as exc:
            _fail(source, "optimize.dt", str(exc))
    if "threshold" in data:
        try:
            threshold = float(data["threshold"])
        except (TypeError, ValueError):
            _fail(
                source,
                "optimize.threshold",
                f"expected a number, got {data['threshold']!r}",
            )
        if not 0.0 < threshold <= 1.0:
            _fail(source, "optimize.threshold", "must lie in (0, 1]")
    return settings, dt, threshold


def _parse_benchmark(source: str, data) -> BenchmarkPlan:
    variants_spec: list = list(DEFAULT_BENCHMARK_VARIANTS)
    times = DEFAULT_BENCHMARK_TIMES
    n_states = DEFAULT_BENCHMARK_STATES
    n_seeds = DEFAULT_BENCHMARK_SEEDS
    max_iterations = DEFAULT_BENCHMARK_ITERATIONS
    state_seed = DEFAULT_BENCHMARK_STATE_SEED
    if data is not None:
        data = _require_mapping(source, "benchmark", data)
        allowed = {"variants", "times", "states", "seeds", "max_iterations", "state_seed"}
        _reject_unknown(source, "benchmark", data, allowed)
        if "variants" in data:
            if not isinstance(data["variants"], list) or not data["variants"]:
                _fail(source, "benchmark.variants", "expected a non-empty list")
            variants_spec = data["variants"]
        if "times" in data:
            if not isinstance(data["times"], list) or not data["times"]:
                _fail(source, "benchmark.times", "expected a non-empty list of times")
            try:
                times = tuple(parse_time(t) for t in data["times"])
            except ValueError as exc:
                _fail(source, "benchmark.times", str(exc))
        for name, target in (("states", "n_states"), ("seeds", "n_seeds")):
            if name in data:
                value = data[name]
                if not isinstance(value, int) or value < 1:
                    _fail(source, f"benchmark.{name}", "expected a positive integer")
                if target == "n_states":
                    n_states = value
                else:
                    n_seeds = value
        if "max_iterations" in data:
            value = data["max_iterations"]
            if not isinstance(value, int) or value < 1:
                _fail(source, "benchmark.max_iterations", "expected a positive integer")
            max_iterations = value
        if "state_seed" in data:
            if not isinstance(data["state_seed"], int):
                _fail(source, "benchmark.state_seed", "expected an integer")
            state_seed = data["state_seed"]

    variants = []
    for i, spec in enumerate(variants_spec):
        key = f"benchmark.variants[{i}]"
        if isinstance(spec, str):
            if spec not in PRESETS:
                _fail(source, key, f"unknown preset {spec!r}; choose from {sorted(PRESETS)}")
            variants.append((spec, PRESETS[spec]()))
        elif isinstance(spec, dict):
            name = spec.get("name")
            if not name:
                _fail(source, f"{key}.name", "inline variants need a name")
            body = {k: v for k, v in spec.items() if k != "name"}
            _reject_unknown(source, key, body, {"preset", "system", "channels", "detuning"})
            variants.append((name, _parse_system_config(source, body)))
        else:
            _fail(source, key, "expected a preset name or an inline mapping")
    return BenchmarkPlan(
        variants=tuple(variants),
        times=times,
        n_states=n_states,
        n_seeds=n_seeds,
        max_iterations=max_iterations,
        state_seed=state_seed,
    )


def parse_config_data(data, source: str = "<config>") -> ConfigBundle:
    """Build a :class:`ConfigBundle` from already-loaded YAML data."""
    data = _require_mapping(source, "<root>", data)
    allowed = {"format", "preset", "system", "channels", "detuning", "optimize", "benchmark"}
    _reject_unknown(source, "", data, allowed)
    version = data.get("format")
    if version != CONFIG_FORMAT:
        _fail(source, "format", f"expected {CONFIG_FORMAT!r}, got {version!r}")
    config = _parse_system_config(source, data)
    settings, dt, threshold = _parse_optimize(source, data.get("optimize"))
    plan = _parse_benchmark(source, data.get("benchmark"))
    return ConfigBundle(
        config=config,
        source=source,
        settings=settings,
        dt=wf.DEFAULT_DT if dt is None else dt,
        threshold=threshold,
        benchmark=plan,
    )


def load_config(path) -> ConfigBundle:
    """Parse a config file from disk."""
    with open(path, "r", encoding="utf-8") as fh:
        try:
            data = yaml.safe_load(fh)
        except yaml.YAMLError as exc:
            raise ConfigError(f"{path}: invalid YAML: {exc}") from exc
    return parse_config_data(data, source=str(path))


def resolve_config(name_or_path: str) -> ConfigBundle:
    """Accept either a preset name ('cs-baseline') or a config file path."""
    if name_or_path in PRESETS:
        return ConfigBundle(
            config=PRESETS[name_or_path](),
            source=f"<preset:{name_or_path}>",
            settings=OptimizerSettings(),
            dt=wf.DEFAULT_DT,
            threshold=DEFAULT_THRESHOLD,
            benchmark=_parse_benchmark(f"<preset:{name_or_path}>", None),
        )
    return load_config(name_or_path)


def with_overrides(
    bundle: ConfigBundle,
    seeds: int | None = None,
    dt: float | None = None,
) -> ConfigBundle:
    """Apply command-line overrides on top of a parsed bundle."""
    settings = bundle.settings
    if seeds is not None:
        settings = replace(settings, seeds=seeds)
    return ConfigBundle(
        config=bundle.config,
        source=bundle.source,
        settings=settings,
        dt=bundle.dt if dt is None else dt,
        threshold=bundle.threshold,
        benchmark=bundle.benchmark,
    )


def config_to_dict(config: ControlConfiguration) -> dict:
    """Exact (float-level) dictionary form of a configuration, for records."""
    channels = []
    for c in config.channels:
        channels.append(
            {
                "kind": c.kind,
                "max_rabi": c.max_rabi,
                "slew_time": c.slew_time,
                "amplitude_mode": c.amplitude_mode,
                "phase_mode": c.phase_mode,
                "fixed_phase": c.fixed_phase,
                "transition": (
                    None
                    if c.transition is None
                    else {"m_minus": c.transition.m_minus, "m_plus": c.transition.m_plus}
                ),
            }
        )
    return {
        "system": {"nuclear_spin": config.system.nuclear_spin},
        "channels": channels,
        "rf_detuning": config.rf_detuning,
        "microwave_detuning": config.microwave_detuning,
    }


def config_from_dict(data: dict) -> ControlConfiguration:
    """Inverse of :func:`config_to_dict`."""
    channels = []
    for entry in data["channels"]:
        transition = entry.get("transition")
        channels.append(
            ChannelSpec(
                kind=entry["kind"],
                max_rabi=entry["max_rabi"],
                slew_time=entry["slew_time"],
                amplitude_mode=entry["amplitude_mode"],
                phase_mode=entry["phase_mode"],
                fixed_phase=entry["fixed_phase"],
                transition=(
                    None
                    if transition is None
                    else MicrowaveTransition(
                        m_minus=transition["m_minus"], m_plus=transition["m_plus"]
                    )
                ),
            )
        )
    return ControlConfiguration(
        system=SpinSystem(data["system"]["nuclear_spin"]),
        channels=tuple(channels),
        rf_detuning=data["rf_detuning"],
        microwave_detuning=data["microwave_detuning"],
    )
