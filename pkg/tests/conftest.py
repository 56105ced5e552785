from __future__ import annotations

import pytest
from hypothesis import HealthCheck, settings

from homonymy.corpus import Corpus, NameKey, PublicationRecord

settings.register_profile(
    "default",
    max_examples=60,
    deadline=None,
    suppress_health_check=[HealthCheck.too_slow],
)
settings.load_profile("default")


def key(s: str) -> NameKey:
    """'LEE,H' -> NameKey('LEE', 'H')."""
    last, _, initials = s.partition(",")
    return NameKey.normalized(last, initials)


def rec(pid: str, authors: str, cites: str = "", year: int = 2000) -> PublicationRecord:
    """Compact record builder: authors and cites are space separated."""
    return PublicationRecord(
        id=pid,
        year=year,
        authors=tuple(dict.fromkeys(key(a) for a in authors.split())),
        cites=frozenset(cites.split()),
    )


def corpus(*records: PublicationRecord) -> Corpus:
    return Corpus.from_records(records)


@pytest.fixture
def tmp_out(tmp_path):
    out = tmp_path / "out"
    out.mkdir()
    return out


# acceptance criteria record one line each; echoed at the end of the run
ACCEPTANCE_LINES: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
