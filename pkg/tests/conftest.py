import json
from pathlib import Path

import pytest

from nlv.constructions import build, ket_from_notation
from nlv.partitions import Grouping, coarse_grain
from nlv.states import proportional

DATA = Path(__file__).parent / "data"

# criterion key -> (passed, description); filled by test_acceptance
ACCEPTANCE_RESULTS: dict = {}


@pytest.fixture(scope="session")
def forcing_tables():
    return json.loads((DATA / "forcing_tables.json").read_text())


@pytest.fixture(scope="session")
def coarse_bc():
    """Sets merged as A|BC, by name."""
    cache = {}

    def get(name):
        if name not in cache:
            cache[name] = coarse_grain(build(name), Grouping.parse("0|1,2"))
        return cache[name]

    return get


def find_state(s, notation: str) -> int:
    """Position of the unique state proportional to a 1-based product notation."""
    k = ket_from_notation(s.profile, notation)
    hits = [i for i, x in enumerate(s.states) if proportional(x, k)]
    assert len(hits) == 1, (notation, hits)
    return hits[0]


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for key in sorted(ACCEPTANCE_RESULTS, key=str):
        ok, text = ACCEPTANCE_RESULTS[key]
        terminalreporter.write_line(f"{'PASS' if ok else 'FAIL'}  criterion {key}: {text}")
