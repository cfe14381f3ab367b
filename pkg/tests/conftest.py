"""Shared fixtures and the acceptance-criteria summary hook."""

import time
from contextlib import contextmanager

import numpy as np
import pytest

from spinctl.spin_algebra import SpinSystem


@pytest.fixture(scope="session")
def cesium() -> SpinSystem:
    return SpinSystem.cesium()


@pytest.fixture()
def rng() -> np.random.Generator:
    return np.random.default_rng(1234)


# ---------------------------------------------------------------------------
# Acceptance reporting: tests/test_acceptance.py wraps each criterion in
# `with criterion(n, "..."):`; the summary below prints one line per criterion
# at the end of the pytest run regardless of output capture.

_CRITERIA: list[tuple[int, str, str, float]] = []


@contextmanager
def criterion(number: int, title: str):
    start = time.perf_counter()
    try:
        yield
    except BaseException:
        _CRITERIA.append((number, title, "FAIL", time.perf_counter() - start))
        raise
    _CRITERIA.append((number, title, "PASS", time.perf_counter() - start))


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    if not _CRITERIA:
        return
    terminalreporter.section("acceptance criteria")
    for number, title, status, elapsed in sorted(_CRITERIA):
        terminalreporter.write_line(
            f"[{status}] criterion {number:2d}: {title} ({elapsed:.1f} s)"
        )
