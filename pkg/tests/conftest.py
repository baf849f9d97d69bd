from __future__ import annotations

from pathlib import Path

import pytest

from fairpool.causal_core import CausalDiagram
from fairpool.fairness import FairnessPartition

DATA = Path(__file__).parent / "data"

VARIABLES = ["Age", "Cvr", "Dpt", "Gnd", "Job", "Mrk", "Y"]
ALICE_EDGES = [
    ("Gnd", "Job"), ("Gnd", "Dpt"), ("Dpt", "Mrk"), ("Age", "Job"),
    ("Cvr", "Y"), ("Job", "Y"), ("Dpt", "Y"), ("Mrk", "Y"),
]
BOB_EDGES = [
    ("Gnd", "Job"), ("Dpt", "Mrk"), ("Age", "Job"),
    ("Cvr", "Y"), ("Job", "Y"), ("Dpt", "Y"), ("Mrk", "Y"), ("Age", "Y"),
]


@pytest.fixture
def alice() -> CausalDiagram:
    return CausalDiagram.from_edges(ALICE_EDGES, VARIABLES)


@pytest.fixture
def bob() -> CausalDiagram:
    return CausalDiagram.from_edges(BOB_EDGES, VARIABLES)


@pytest.fixture
def gender_partition() -> FairnessPartition:
    return FairnessPartition.from_protected(VARIABLES, "Y", ["Gnd"])


@pytest.fixture
def data_dir() -> Path:
    return DATA


# one summary line per acceptance criterion
_acceptance: list[tuple[str, str]] = []


def pytest_runtest_logreport(report):
    if report.when == "call" and "test_acceptance.py" in report.nodeid:
        _acceptance.append((report.nodeid.split("::")[-1], report.outcome))
    elif report.when == "setup" and report.failed and "test_acceptance.py" in report.nodeid:
        _acceptance.append((report.nodeid.split("::")[-1], "error"))


def pytest_terminal_summary(terminalreporter):
    if not _acceptance:
        return
    terminalreporter.section("acceptance criteria")
    for name, outcome in _acceptance:
        mark = "PASS" if outcome == "passed" else "FAIL"
        terminalreporter.write_line(f"{mark}  {name}")
