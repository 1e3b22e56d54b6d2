"""Fixtures for the external-runtime test suite."""

from __future__ import annotations

import random
from contextlib import contextmanager

import pytest

from pyruntime.gridio import GridImage, write_grid

# Criterion verdicts recorded by the acceptance-marked tests, printed after
# the run by the hook below so they stay visible under output capturing.
SECONDARY_RESULTS: list[tuple[str, str]] = []


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    if not SECONDARY_RESULTS:
        return
    terminalreporter.section("acceptance criteria (external runtime)")
    for label, outcome in SECONDARY_RESULTS:
        terminalreporter.write_line(f"{label}: {outcome}")


@pytest.fixture
def record_criterion():
    @contextmanager
    def recorder(label: str):
        try:
            yield
        except BaseException:
            SECONDARY_RESULTS.append((label, "FAIL"))
            raise
        SECONDARY_RESULTS.append((label, "PASS"))

    return recorder


@pytest.fixture
def workdir(tmp_path):
    root = tmp_path / "work"
    root.mkdir()
    return root


@pytest.fixture
def seeded_grid(workdir):
    """Write a deterministic 8x8 grid into the workdir and return its image."""
    rng = random.Random(8181)
    image = GridImage(8, 8, [round(rng.uniform(-100.0, 100.0), 3)
                             for _ in range(64)])
    write_grid(workdir / "obs1.ms", image)
    return image
