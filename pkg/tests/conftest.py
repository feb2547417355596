from pathlib import Path

import pytest

from neusoc.data import find_optdigits, load_optdigits

FIXTURES = Path(__file__).parent / "fixtures"


@pytest.fixture
def synth_path():
    return FIXTURES / "optdigits_synth.tra"


@pytest.fixture(scope="session")
def optdigits():
    """(train, test) from the real files; skipped when they are not present."""
    try:
        tra, tes = find_optdigits()
    except FileNotFoundError as exc:
        pytest.skip(str(exc))
    return load_optdigits(tra), load_optdigits(tes)


# --- acceptance report ------------------------------------------------------

_ACCEPTANCE: list[str] = []


@pytest.fixture
def accept():
    """Record one PASS/FAIL line for the acceptance summary."""

    def record(name: str, ok: bool, detail: str = "") -> bool:
        _ACCEPTANCE.append(f"{'PASS' if ok else 'FAIL'}  {name}" + (f"  [{detail}]" if detail else ""))
        return ok

    return record


def pytest_terminal_summary(terminalreporter):
    if _ACCEPTANCE:
        terminalreporter.section("acceptance criteria")
        for line in _ACCEPTANCE:
            terminalreporter.write_line(line)
