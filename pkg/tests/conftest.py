from pathlib import Path

import pytest

from riskrank import ingest

DATA = Path(__file__).parent / "data"


@pytest.fixture(scope="session")
def fixture_path() -> Path:
    return DATA / "loans_small.csv"


@pytest.fixture(scope="session")
def fixture_records(fixture_path):
    return ingest.parse_records(fixture_path)


@pytest.fixture(scope="session")
def fixture_oracle_path() -> Path:
    return DATA / "loans_small_scores.csv"
