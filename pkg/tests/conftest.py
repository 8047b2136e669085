import pytest

_CRITERIA: dict[int, list[tuple[str, bool, str]]] = {}
_TITLES = {
    1: "unbiasedness",
    2: "oracle agreement",
    3: "flat distribution",
    4: "flat moments",
    5: "Y_n coverage",
    6: "worst-case constants",
    7: "concentration",
    8: "upper tail",
    9: "tail statistic bound",
    10: "linear-algebra identities",
    11: "Laguerre density",
    12: "small-eigenvalue integral scan",
    13: "reproducibility",
}


@pytest.fixture
def criterion():
    """Record one checked part of an acceptance criterion; returns ``passed``."""

    def record(number: int, part: str, passed: bool, detail: str = "") -> bool:
        _CRITERIA.setdefault(number, []).append((part, bool(passed), detail))
        return bool(passed)

    return record


def pytest_terminal_summary(terminalreporter):
    if not _CRITERIA:
        return
    tr = terminalreporter
    tr.section("acceptance criteria")
    for number in sorted(_TITLES):
        parts = _CRITERIA.get(number)
        if parts is None:
            tr.write_line(f"FAIL  criterion {number:2d} ({_TITLES[number]}): not evaluated")
            continue
        ok = all(p for _, p, _ in parts)
        tr.write_line(f"{'PASS' if ok else 'FAIL'}  criterion {number:2d} ({_TITLES[number]})")
        for part, passed, detail in parts:
            tr.write_line(f"        {'ok  ' if passed else 'FAIL'} {part}: {detail}")
