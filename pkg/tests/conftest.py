import pytest

from dotphase import REFERENCE_PARAMS


@pytest.fixture
def reference():
    return REFERENCE_PARAMS


@pytest.fixture
def closed(reference):
    """Detector decoupled: s2 == s1."""
    return reference.replace(s2=reference.s1)


def pytest_terminal_summary(terminalreporter):
    lines = []
    for outcome in ("passed", "failed"):
        for rep in terminalreporter.stats.get(outcome, []):
            if rep.when != "call":
                continue
            props = dict(rep.user_properties)
            if "criterion" in props:
                lines.append((props["criterion"], outcome.upper(), props.get("summary", "")))
    if lines:
        terminalreporter.section("acceptance criteria")
        for n, outcome, summary in sorted(lines):
            terminalreporter.write_line(f"criterion {n:2d}: {'PASS' if outcome == 'PASSED' else 'FAIL'}  {summary}")
