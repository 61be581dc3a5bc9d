import os

import pytest

from phishlens.data import data_path
from phishlens.mock import MockLlmBackend

DATA_DIR = os.path.join(os.path.dirname(os.path.abspath(__file__)), "data")


def read_bytes(name: str) -> bytes:
    with open(os.path.join(DATA_DIR, name), "rb") as f:
        return f.read()


def read_golden(name: str) -> str:
    with open(os.path.join(DATA_DIR, "golden", name), "r", encoding="utf-8") as f:
        text = f.read()
    return text[:-1] if text.endswith("\n") else text


@pytest.fixture
def fixtures_path() -> str:
    return os.path.join(DATA_DIR, "mock_fixtures.json")


@pytest.fixture
def mock_backend(fixtures_path) -> MockLlmBackend:
    return MockLlmBackend.from_file(fixtures_path)


@pytest.fixture
def dataset_path() -> str:
    return data_path("dataset.csv")
