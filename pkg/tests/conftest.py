from datetime import date, datetime, timedelta

import pytest

from lifemotif.ingest import DayLog, Entity
from lifemotif.temporal import apply_granularity


def make_day(d: date, entries, user="u", precision=None) -> DayLog:
    """Build a DayLog from ``(HH:MM, sensor, data)`` triples."""
    ents = []
    for hhmm, sensor, data in entries:
        h, m = map(int, hhmm.split(":"))
        ents.append(Entity(datetime(d.year, d.month, d.day, h, m), sensor, data))
    ents.sort(key=lambda e: e.timestamp)
    day = DayLog(user, d, tuple(ents), d.weekday() == 4)
    return apply_granularity(day, precision) if precision else day


@pytest.fixture
def day_factory():
    return make_day


def consecutive_dates(n, start=date(2014, 1, 6)):
    return [start + timedelta(days=i) for i in range(n)]


# one summary line per acceptance criterion, printed at the end of the run
ACCEPTANCE_LINES: list[str] = []


def record_acceptance(tag: str, ok: bool, detail: str) -> None:
    line = f"{tag} {'PASS' if ok else 'FAIL'}: {detail}"
    ACCEPTANCE_LINES.append(line)
    print(line)


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
