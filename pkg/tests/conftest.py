import pytest

_acceptance = []


def pytest_runtest_logreport(report):
    if report.when == "call" and "test_acceptance.py" in report.nodeid:
        _acceptance.append((report.nodeid.split("::")[-1], report.outcome, report.duration))


def pytest_terminal_summary(terminalreporter):
    if not _acceptance:
        return
    terminalreporter.section("acceptance criteria")
    for name, outcome, dur in _acceptance:
        terminalreporter.write_line(f"{'PASS' if outcome == 'passed' else 'FAIL'}  {name}  ({dur:.2f} s)")


@pytest.fixture
def rng():
    import numpy as np

    return np.random.default_rng(20261016)
