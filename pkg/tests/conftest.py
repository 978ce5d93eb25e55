import pytest
from hypothesis import HealthCheck, settings

from mwindex.constants import CollisionSystem, ParticleSpecies

settings.register_profile(
    "default", deadline=None, max_examples=40, suppress_health_check=[HealthCheck.too_slow]
)
settings.load_profile("default")


@pytest.fixture(scope="session")
def sodium():
    return ParticleSpecies.from_amu("Na", 22.98977)


@pytest.fixture(scope="session")
def argon():
    return ParticleSpecies.from_amu("Ar", 39.948)


@pytest.fixture(scope="session")
def na_ar(sodium, argon):
    return CollisionSystem(sodium, argon)


_ACCEPTANCE = {}


@pytest.fixture
def criterion(request):
    """Record one acceptance line: criterion(number, title, passed, detail)."""
    recorded = []

    def record(number, title, passed, detail=""):
        line = f"[{'PASS' if passed else 'FAIL'}] {number:2d}. {title}: {detail}"
        _ACCEPTANCE[number] = line
        recorded.append(number)
        print(line)
        assert passed, line

    yield record
    if not recorded:
        number = request.node.get_closest_marker("criterion").args[0]
        _ACCEPTANCE[number] = f"[FAIL] {number:2d}. {request.node.name}: raised before reporting"


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(number): acceptance criterion number")


def pytest_terminal_summary(terminalreporter):
    if _ACCEPTANCE:
        terminalreporter.write_sep("=", "acceptance criteria")
        for number in sorted(_ACCEPTANCE):
            terminalreporter.write_line(_ACCEPTANCE[number])
