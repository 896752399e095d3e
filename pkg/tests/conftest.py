from __future__ import annotations

import pytest

from wsvg_infer import MixtureProposal, SpanUnit, TemporalSpan

_ACCEPTANCE: list[tuple[str, bool, str]] = []


@pytest.fixture
def criterion():
    """Record one acceptance criterion outcome; printed in the terminal summary."""

    def record(name: str, passed: bool, detail: str = "") -> None:
        _ACCEPTANCE.append((name, bool(passed), detail))
        assert passed, f"{name}: {detail}"

    return record


def pytest_terminal_summary(terminalreporter):
    if not _ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for name, passed, detail in _ACCEPTANCE:
        line = f"[{'PASS' if passed else 'FAIL'}] {name}"
        terminalreporter.write_line(f"{line}  ({detail})" if detail else line)


@pytest.fixture
def worked_proposal() -> MixtureProposal:
    return MixtureProposal.from_arrays([0.5, 0.3, 0.7], [0.2, 0.2, 0.2], [0.5, 0.3, 0.2], 1.0)


@pytest.fixture
def three_spans() -> list[TemporalSpan]:
    return [
        TemporalSpan(0.2, 0.6, SpanUnit.NORMALIZED),
        TemporalSpan(0.25, 0.65, SpanUnit.NORMALIZED),
        TemporalSpan(0.55, 0.9, SpanUnit.NORMALIZED),
    ]
