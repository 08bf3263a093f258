import numpy as np
import pytest

from rateregion.rate_core import GeneralRateModel

_ACCEPTANCE_LINES = []


def interference_model(cross, direction):
    """alpha = (5, 10), self-interference 1, cross interference ``cross``."""
    return GeneralRateModel(5.0, 10.0, 1.0, cross, cross, 1.0, direction)


def random_models(n, seed, lo=0.01, hi=100.0, directions=("dl", "ul")):
    rng = np.random.default_rng(seed)
    out = []
    for i in range(n):
        c = 10.0 ** rng.uniform(np.log10(lo), np.log10(hi), 6)
        out.append(GeneralRateModel(*c, direction=directions[i % len(directions)]))
    return out


@pytest.fixture
def acceptance_report():
    def report(criterion, ok, detail):
        _ACCEPTANCE_LINES.append(f"{'PASS' if ok else 'FAIL'}  criterion {criterion}: {detail}")

    return report


def pytest_terminal_summary(terminalreporter):
    if _ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(_ACCEPTANCE_LINES, key=lambda s: int(s.split("criterion ")[1].split(":")[0])):
            terminalreporter.write_line(line)
