import pytest

from vmwarmup.model import AnalysisConfig, BenchKey


@pytest.fixture
def cfg():
    return AnalysisConfig()


@pytest.fixture
def fast_cfg():
    """Default analysis with a bootstrap small enough for unit tests."""
    return AnalysisConfig(bootstrap_iters=2000)


@pytest.fixture
def key():
    return BenchKey("Linux_4790", "HotSpot", "binarytrees")


_CRITERIA = []


@pytest.fixture
def criterion():
    """Record one acceptance line; returns whether it passed."""

    def record(number, name, passed, detail="", status=None):
        status = status or ("PASS" if passed else "FAIL")
        line = f"criterion {number} {status}: {name}"
        if detail:
            line += f" ({detail})"
        print(line)
        _CRITERIA.append((number, line))
        return passed

    return record


def pytest_terminal_summary(terminalreporter):
    if _CRITERIA:
        terminalreporter.section("acceptance criteria")
        for _, line in sorted(_CRITERIA, key=lambda t: str(t[0])):
            terminalreporter.write_line(line)
