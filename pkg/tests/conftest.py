import math

import pytest
from hypothesis import HealthCheck, settings

from plasmonprobe.optics import Layer, LayerStack

settings.register_profile(
    "default", deadline=None, max_examples=60, suppress_health_check=[HealthCheck.too_slow]
)
settings.load_profile("default")

GLASS = 1.51
GOLD = 0.18 + 4.9j
WAVELENGTH = 780e-9


@pytest.fixture(scope="session")
def kretschmann():
    """Glass / 40 nm gold / vacuum at 780 nm."""
    return LayerStack((Layer(GLASS), Layer(GOLD, 40e-9), Layer(1.0)), WAVELENGTH)


@pytest.fixture(scope="session")
def theta_sp(kretschmann):
    from plasmonprobe.optics import find_resonance_angle

    return find_resonance_angle(kretschmann)


@pytest.fixture(scope="session")
def flank_angles(kretschmann, theta_sp):
    """Angles on both sides of the dip, away from the zeros of Θ."""
    return (math.radians(42.2), math.radians(43.3))


# one PASS/FAIL line per acceptance criterion in the terminal summary
_criteria = {}


def pytest_runtest_logreport(report):
    marker = "test_acceptance.py::test_criterion_"
    if marker in report.nodeid and report.when == "call":
        number = report.nodeid.split(marker)[1].split("_")[0]
        previous = _criteria.get(number, True)
        _criteria[number] = previous and report.passed
    elif marker in report.nodeid and report.when == "setup" and report.failed:
        _criteria[report.nodeid.split(marker)[1].split("_")[0]] = False


def pytest_terminal_summary(terminalreporter):
    if not _criteria:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(_criteria, key=int):
        terminalreporter.write_line(f"criterion {number}: {'PASS' if _criteria[number] else 'FAIL'}")
