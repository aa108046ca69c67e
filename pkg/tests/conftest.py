import os
import sys

import numpy as np
import pytest

sys.path.insert(0, os.path.dirname(__file__))


@pytest.fixture
def rng():
    return np.random.default_rng(20240601)


CRITERIA = {}


def pytest_terminal_summary(terminalreporter):
    if not CRITERIA:
        return
    terminalreporter.section("acceptance criteria")
    for num in sorted(CRITERIA):
        ok, title, detail = CRITERIA[num]
        terminalreporter.write_line(f"{'PASS' if ok else 'FAIL'}  [{num:2d}] {title}{'  -- ' + detail if detail else ''}")
