"""Session fixtures over the dataset builders in trainer_cases.py.

The terminal-summary hook prints one verdict line per gate test so the
criteria checks are visible at the end of a run.
"""

from __future__ import annotations

from pathlib import Path

import pytest

from trainer_cases import contrast_sources, export_sources, separable_sources


@pytest.fixture(scope="session")
def separable_dataset(tmp_path_factory) -> Path:
    return export_sources(
        separable_sources(), tmp_path_factory.mktemp("separable"), seed=11
    )


@pytest.fixture(scope="session")
def contrast_dataset(tmp_path_factory) -> Path:
    return export_sources(
        contrast_sources(), tmp_path_factory.mktemp("contrast"), seed=5
    )


_GATE_RESULTS: list[tuple[str, str]] = []


def pytest_runtest_logreport(report):
    if "test_trainer_gate.py" not in report.nodeid:
        return
    name = report.nodeid.split("::")[-1]
    if report.when == "call":
        _GATE_RESULTS.append((name, report.outcome))
    elif report.when == "setup" and report.outcome == "failed":
        _GATE_RESULTS.append((name, "error"))


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    if not _GATE_RESULTS:
        return
    verdicts = {"passed": "PASS", "failed": "FAIL", "skipped": "SKIP"}
    terminalreporter.write_sep("-", "trainer gate")
    for name, outcome in _GATE_RESULTS:
        verdict = verdicts.get(outcome, outcome.upper())
        terminalreporter.write_line(f"{verdict}  {name}")
