"""Shared fixtures and the acceptance-summary reporter."""

from __future__ import annotations

import os
import time
from concurrent.futures import ProcessPoolExecutor

import pytest

DEPTH_STREAMS = ("sea_a", "agr_a")
DEPTH_LAYERS = (1, 2, 3)
DEPTH_SEEDS = (1, 2, 3)
DEPTH_LENGTH = 100_000
DEPTH_TREES = 10


def pytest_configure(config):
    config.addinivalue_line(
        "markers", "slow: multi-minute experiment (deselect with -m 'not slow')"
    )


class GridRows(list):
    """Result rows plus the wall time the grid took to compute."""

    elapsed: float = 0.0


@pytest.fixture(scope="session")
def depth_grid():
    """Accuracy grid for the layer ablation: stream x seed x depth.

    One prequential run per cell at 100k instances with 4x10-tree
    cascades; runs are independent, so they execute in parallel.  Shared
    session-wide because both the depth-trend and the accuracy-floor
    checks read it.
    """
    from grid_helper import depth_cell

    tasks = [
        (name, seed, n_layers, DEPTH_LENGTH, DEPTH_TREES)
        for name in DEPTH_STREAMS
        for seed in DEPTH_SEEDS
        for n_layers in DEPTH_LAYERS
    ]
    start = time.perf_counter()
    with ProcessPoolExecutor(max_workers=min(os.cpu_count() or 1, len(tasks))) as ex:
        rows = GridRows(ex.map(depth_cell, tasks))
    rows.elapsed = time.perf_counter() - start
    return rows


def grid_accuracy(rows, stream, layers=None, seed=None):
    """Accuracies filtered from the depth grid, in task order."""
    return [
        r["accuracy"]
        for r in rows
        if r["stream"] == stream
        and (layers is None or r["layers"] == layers)
        and (seed is None or r["seed"] == seed)
    ]


# ---------------------------------------------------------------------------
# Acceptance reporting: one pass/fail line per criterion at the end.

_CRITERIA: dict[str, dict] = {}


def pytest_runtest_logreport(report):
    name = report.nodeid.rsplit("::", 1)[-1]
    if "test_acceptance.py" not in report.nodeid or not name.startswith(
        "test_criterion_"
    ):
        return
    entry = _CRITERIA.setdefault(name, {"outcome": "passed"})
    if report.outcome == "failed":
        entry["outcome"] = "failed"
    elif report.outcome == "skipped":
        entry["outcome"] = "skipped"


def pytest_terminal_summary(terminalreporter):
    if not _CRITERIA:
        return
    tr = terminalreporter
    tr.section("acceptance criteria")
    for name in sorted(_CRITERIA, key=lambda n: int(n.split("_")[2])):
        number = name.split("_")[2]
        label = name.split("_", 3)[3].replace("_", " ") if name.count("_") >= 3 else ""
        outcome = _CRITERIA[name]["outcome"]
        word = {"passed": "PASS", "failed": "FAIL", "skipped": "SKIP"}[outcome]
        tr.write_line(
            "criterion %2s  %s  %s" % (number, word, label),
            green=outcome == "passed",
            red=outcome == "failed",
            yellow=outcome == "skipped",
        )
