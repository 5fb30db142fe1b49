import pytest

from cartassist.config import default_store_path
from cartassist.store import load_store
from cartassist.templates import Phrasebook


@pytest.fixture(scope="session")
def sample_document() -> str:
    return default_store_path().read_text(encoding="utf-8")


@pytest.fixture()
def sample_store(sample_document):
    return load_store(sample_document)


@pytest.fixture(scope="session")
def phrasebook() -> Phrasebook:
    return Phrasebook()
