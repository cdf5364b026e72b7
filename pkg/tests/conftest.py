import numpy as np
import pytest

from flm.model import FlmModel

_ACCEPTANCE_LINES = []


def random_model(rng, m, N, freq_scale=2.0):
    l = 2 ** (m - 1)
    return FlmModel(rng.uniform(-freq_scale, freq_scale, (N, m)),
                    rng.normal(0.0, 1.0, (N, l)),
                    rng.uniform(-np.pi, np.pi, (N, l)))


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


@pytest.fixture
def criterion(capsys):
    """Record one PASS/FAIL line per acceptance criterion and echo it immediately."""
    def report(number, title, ok, detail):
        line = f"[{'PASS' if ok else 'FAIL'}] criterion {number}: {title} | {detail}"
        _ACCEPTANCE_LINES.append(line)
        with capsys.disabled():
            print("\n" + line, flush=True)
        return ok
    return report


def pytest_terminal_summary(terminalreporter):
    if _ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in _ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
