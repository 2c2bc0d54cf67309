import pytest
from hypothesis import settings

from flowcat import catalog_get

settings.register_profile("flowcat", deadline=None, max_examples=50)
settings.load_profile("flowcat")


@pytest.fixture(scope="session")
def phi1():
    return catalog_get("annulus_phi1")


@pytest.fixture(scope="session")
def phi2():
    return catalog_get("annulus_phi2")


@pytest.fixture(scope="session")
def radial():
    return catalog_get("annulus_radial_speed")


@pytest.fixture(scope="session")
def rotation_ode():
    return catalog_get("annulus_rotation_ode")


@pytest.fixture(scope="session")
def circle():
    return catalog_get("circle_rotation")


@pytest.fixture(scope="session")
def interval():
    return catalog_get("interval_identity")


def pytest_terminal_summary(terminalreporter):
    import sys

    mod = sys.modules.get("test_acceptance")
    if mod is not None and mod.LINES:
        terminalreporter.section("acceptance criteria")
        for line in mod.LINES:
            terminalreporter.write_line(line)
