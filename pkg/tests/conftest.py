import math

import pytest
from hypothesis import HealthCheck, settings

settings.register_profile(
    "default", deadline=None, max_examples=60, suppress_health_check=[HealthCheck.too_slow]
)
settings.load_profile("default")

# values quoted for the experiment
THETA1 = 62.0
SIGMA = 4.79
DELTA = 2.88
AMPLITUDE = 401.0


@pytest.fixture
def reference_ab():
    t1, t2 = math.radians(THETA1), math.radians(45.0)
    return math.sin(t1) * math.sin(t2), math.cos(t1) * math.cos(t2)


def pytest_terminal_summary(terminalreporter):
    mod = __import__("sys").modules.get("test_acceptance")
    if mod is None or not getattr(mod, "RESULTS", None):
        return
    terminalreporter.section("acceptance criteria")
    for line in mod.RESULTS:
        terminalreporter.write_line(line)
