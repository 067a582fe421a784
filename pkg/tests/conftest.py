import pytest

from src.catalog import named_group
from src.config import use_config


@pytest.fixture(autouse=True)
def fresh_config():
    """Chaque test repart de la configuration par défaut"""
    previous = use_config(None)
    yield
    use_config(previous)


@pytest.fixture
def s3():
    return named_group("S3")


@pytest.fixture
def s4():
    return named_group("S4")


@pytest.fixture
def d8():
    return named_group("D8")


@pytest.fixture
def q8():
    return named_group("Q8")


@pytest.fixture
def v4():
    return named_group("V4")
