"""Unit handling: internal units are rad/µs for angular frequency and µs for time.

User-facing frequencies are ordinary (cycle) frequencies; a value entered in
kHz or MHz is multiplied by 2π on the way in.  Phases are radians.
"""

from __future__ import annotations

import math
import re

TWO_PI = 2.0 * math.pi

# rad/µs per unit of ordinary frequency
_FREQUENCY_UNITS = {
    "hz": TWO_PI * 1e-6,
    "khz": TWO_PI * 1e-3,
    "mhz": TWO_PI,
}

# µs per unit of time
_TIME_UNITS = {
    "us": 1.0,
    "µs": 1.0,
    "ms": 1e3,
    "s": 1e6,
    "ns": 1e-3,
}

_QUANTITY = re.compile(r"^\s*([-+0-9.eE]+)\s*([a-zA-Zµ]+)\s*$")


def rad_per_us(frequency_khz: float) -> float:
    """Angular frequency (rad/µs) of an ordinary frequency given in kHz."""
    return frequency_khz * _FREQUENCY_UNITS["khz"]


def _split(text: str, kind: str) -> tuple[float, str]:
    match = _QUANTITY.match(text)
    if not match:
        raise ValueError(f"cannot parse {kind} quantity {text!r}; expected e.g. '15 kHz'")
    try:
        value = float(match.group(1))
    except ValueError as exc:
        raise ValueError(f"bad numeric value in {kind} quantity {text!r}") from exc
    return value, match.group(2).lower()


def parse_frequency(text: str | float) -> float:
    """Parse a frequency with explicit unit ('15 kHz') into rad/µs."""
    if isinstance(text, (int, float)):
        raise ValueError(
            f"frequency {text!r} needs an explicit unit string, e.g. '15 kHz'"
        )
    value, unit = _split(text, "frequency")
    if unit not in _FREQUENCY_UNITS:
        raise ValueError(f"unknown frequency unit {unit!r} in {text!r}")
    return value * _FREQUENCY_UNITS[unit]


def parse_time(text: str | float) -> float:
    """Parse a time with explicit unit ('10 us') into µs."""
    if isinstance(text, (int, float)):
        raise ValueError(f"time {text!r} needs an explicit unit string, e.g. '10 us'")
    value, unit = _split(text, "time")
    if unit not in _TIME_UNITS:
        raise ValueError(f"unknown time unit {unit!r} in {text!r}")
    return value * _TIME_UNITS[unit]


def parse_phase(text: str | float) -> float:
    """Parse a phase into radians; accepts '0.5 pi', '1.2 rad', or a bare number."""
    if isinstance(text, (int, float)):
        return float(text)
    stripped = text.strip()
    match = _QUANTITY.match(stripped)
    if match:
        value, unit = float(match.group(1)), match.group(2).lower()
        if unit == "pi":
            return value * math.pi
        if unit == "rad":
            return value
        raise ValueError(f"unknown phase unit {unit!r} in {text!r}")
    try:
        return float(stripped)
    except ValueError as exc:
        raise ValueError(f"cannot parse phase {text!r}") from exc


def format_frequency_khz(omega: float) -> str:
    """Render an internal angular frequency (rad/µs) as a kHz string."""
    return f"{omega / _FREQUENCY_UNITS['khz']:g} kHz"
