from pathlib import Path

import pytest

DATA = Path(__file__).parent / "data"

_acceptance = []


def record_acceptance(number, name, passed, detail=""):
    _acceptance.append((number, name, passed, detail))


@pytest.fixture
def fines_path():
    return DATA / "fines.csv"


@pytest.fixture
def fines_events(fines_path):
    from procmap.ingest import Order, replay
    return list(replay(fines_path, Order.BY_TIMESTAMP))


def pytest_terminal_summary(terminalreporter):
    if not _acceptance:
        return
    terminalreporter.section("acceptance criteria")
    for number, name, passed, detail in sorted(_acceptance, key=lambda r: (r[0], r[1])):
        status = "PASS" if passed else "FAIL"
        line = f"[{status}] criterion {number}: {name}"
        if detail:
            line += f" ({detail})"
        terminalreporter.write_line(line)
