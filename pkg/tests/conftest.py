import pytest

from src.algebra.ring import RingSpec
from src.verification.catalog import SCENARIO_DIR
from src.verification.scenario import load_scenario


@pytest.fixture
def ring1():
    return RingSpec(1, 8)


@pytest.fixture
def ring2():
    return RingSpec(2, 4)


@pytest.fixture(scope="session")
def example_a():
    return load_scenario(SCENARIO_DIR / "example_a.json")


@pytest.fixture(scope="session")
def example_b():
    return load_scenario(SCENARIO_DIR / "example_b.json")


@pytest.fixture(scope="session")
def example_c():
    return load_scenario(SCENARIO_DIR / "example_c.json")


@pytest.fixture(scope="session")
def rank2_holomorphic():
    return load_scenario(SCENARIO_DIR / "rank2_holomorphic.json")


@pytest.fixture(scope="session")
def negative_flatness():
    return load_scenario(SCENARIO_DIR / "negative_flatness.json")


@pytest.fixture(scope="session")
def rank2_connection():
    return load_scenario(SCENARIO_DIR / "rank2_connection.json")
