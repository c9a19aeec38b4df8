"""Fixtures over the shared sources and builders in corpus_cases.py.

Also prints the acceptance gate verdicts: one PASS/FAIL line per test in
test_acceptance.py at the end of the run.
"""

from __future__ import annotations

import pytest

from proofrank import Corpus, SourceFile, parse_file

from corpus_cases import (
    BRANCHING_SOURCE,
    CHAIN_SOURCE,
    DISSIMILAR_PAIR_SOURCE,
    decorrelated_records,
    synthetic_records,
)


@pytest.fixture
def branching_source() -> SourceFile:
    return SourceFile("branching.v", BRANCHING_SOURCE)


@pytest.fixture
def branching_record(branching_source):
    records, diagnostics = parse_file(branching_source)
    assert len(records) == 1 and not diagnostics
    return records[0]


@pytest.fixture
def chain_source() -> SourceFile:
    return SourceFile("chain.v", CHAIN_SOURCE)


@pytest.fixture
def chain_record(chain_source):
    records, _ = parse_file(chain_source)
    assert len(records) == 1
    return records[0]


@pytest.fixture
def dissimilar_pair():
    records, _ = parse_file(SourceFile("ext_sb.v", DISSIMILAR_PAIR_SOURCE))
    assert len(records) == 2
    return records


@pytest.fixture
def small_corpus() -> Corpus:
    return Corpus(synthetic_records(20, seed=3, files=4))


@pytest.fixture
def decorrelated_corpus() -> Corpus:
    return Corpus(decorrelated_records())


# ---------------------------------------------------------------------------
# Acceptance gate reporting

_ACCEPTANCE_RESULTS: list[tuple[str, str]] = []


def pytest_runtest_logreport(report):
    if "test_acceptance.py" not in report.nodeid:
        return
    name = report.nodeid.split("::")[-1]
    if report.when == "call":
        _ACCEPTANCE_RESULTS.append((name, report.outcome))
    elif report.when == "setup" and report.outcome == "failed":
        _ACCEPTANCE_RESULTS.append((name, "error"))


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    if not _ACCEPTANCE_RESULTS:
        return
    verdicts = {"passed": "PASS", "failed": "FAIL", "skipped": "SKIP"}
    terminalreporter.write_sep("-", "acceptance gate")
    for name, outcome in _ACCEPTANCE_RESULTS:
        verdict = verdicts.get(outcome, outcome.upper())
        terminalreporter.write_line(f"{verdict}  {name}")
