import pytest

from trfoci.fixtures import FIXTURES, load_fixture
from trfoci.pulsegen import design_pulse

_ACCEPTANCE_LINES: list[str] = []


@pytest.fixture
def criterion():
    """Record one PASS/FAIL line per acceptance criterion."""
    def record(label: str, ok: bool, detail: str = "") -> bool:
        _ACCEPTANCE_LINES.append(f"[{'PASS' if ok else 'FAIL'}] {label}: {detail}")
        return ok
    return record


def pytest_terminal_summary(terminalreporter):
    if _ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in _ACCEPTANCE_LINES:
            terminalreporter.write_line(line)


_DESIGNED = {}


@pytest.fixture(scope="session")
def designed():
    """Calibrated waveforms for a fixture name (cached per session)."""
    def get(name, slice_thickness=None):
        key = (name, slice_thickness)
        if key not in _DESIGNED:
            fx = load_fixture(name, slice_thickness)
            wf, cal = design_pulse(fx.params, fx.sequence)
            _DESIGNED[key] = (fx, wf, cal)
        return _DESIGNED[key]
    return get


ALL_FIXTURES = sorted(FIXTURES)
