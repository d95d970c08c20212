import sys
import random

import pytest

from certopt import tape


@pytest.fixture(params=tape.available_backends())
def backend(request):
    """Every importable kernel backend."""
    return request.param


@pytest.fixture
def rng():
    return random.Random(20240611)



def pytest_terminal_summary(terminalreporter):
    mod = sys.modules.get("test_acceptance")
    lines = getattr(mod, "LINES", None)
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in lines:
            terminalreporter.write_line(line)
