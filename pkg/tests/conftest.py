import sys

import mpmath
import pytest

mpmath.mp.dps = 40


@pytest.fixture
def mp():
    return mpmath


def pytest_terminal_summary(terminalreporter):
    mod = next((m for name, m in sys.modules.items() if name.endswith("test_acceptance")),
               None)
    rows = [mod.RESULTS[k] for k in sorted(mod.RESULTS)] if mod else []
    if rows:
        terminalreporter.section("acceptance criteria")
        for row in rows:
            terminalreporter.write_line(row)
