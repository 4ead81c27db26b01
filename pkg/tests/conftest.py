import os
import sys

import pytest

sys.path.insert(0, os.path.dirname(__file__))

from droplet_qed import qnm  # noqa: E402

N0 = 1.47

# lines collected by the acceptance module, echoed after the run
ACCEPTANCE_LINES = {}


@pytest.fixture(scope="session")
def te_table():
    """TE table for n0 = 1.47 reaching x = 195 (radius 15 um plus the sum window)."""
    return qnm.build_mode_table("TE", N0, 195.0)


@pytest.fixture(scope="session")
def small_table():
    return qnm.build_mode_table("TE", N0, 60.0)


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_LINES:
        return
    terminalreporter.section("acceptance criteria")
    for k in sorted(ACCEPTANCE_LINES):
        terminalreporter.write_line(ACCEPTANCE_LINES[k])
