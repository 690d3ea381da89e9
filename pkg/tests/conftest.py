import pytest

from fedm import data


@pytest.fixture(scope="session")
def case_model():
    return data.load_case_model()


@pytest.fixture(scope="session")
def revised_model():
    return data.load_revised_model()


@pytest.fixture(scope="session")
def referents():
    return data.load_referents()


@pytest.fixture(scope="session")
def case_scenario():
    return data.load_case_scenarios()[0]


@pytest.fixture(scope="session")
def revised_scenario():
    return data.load_revised_scenarios()[0]
