from pathlib import Path

import pytest
from hypothesis import HealthCheck, settings

from rtk.engine.samples import letter_space, two_bit_system
from rtk.io.theory_file import load_theory

settings.register_profile(
    "rtk",
    deadline=None,
    derandomize=True,
    max_examples=60,
    suppress_health_check=[HealthCheck.too_slow],
)
settings.load_profile("rtk")

THEORIES = Path(__file__).resolve().parent.parent / "theories"


@pytest.fixture(scope="session")
def two_bit():
    return two_bit_system()


@pytest.fixture
def omega4():
    return letter_space(4)


@pytest.fixture
def theory_path():
    def path(name):
        return str(THEORIES / f"{name}.rt")

    return path


@pytest.fixture
def theory_file(theory_path):
    def load(name):
        return load_theory(theory_path(name))

    return load
