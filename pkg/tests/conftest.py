from pathlib import Path

import pytest

from mcskit.parser import parse_mcs, parse_program

FIXTURES = Path(__file__).parent / "fixtures"
MCS_FIXTURES = sorted(p.name for p in FIXTURES.glob("*.mcs"))

# criterion number -> (passed, description), filled by test_acceptance
ACCEPTANCE: dict[int, tuple[bool, str]] = {}


def load(name: str):
    return parse_mcs((FIXTURES / name).read_text(encoding="utf-8"))


def load_program(name: str):
    return parse_program((FIXTURES / name).read_text(encoding="utf-8"))


@pytest.fixture
def hospital():
    return load("hospital.mcs")


@pytest.fixture
def oddloop():
    return load("oddloop.mcs")


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(ACCEPTANCE):
        passed, text = ACCEPTANCE[number]
        terminalreporter.write_line(f"criterion {number}: {'PASS' if passed else 'FAIL'} - {text}")
