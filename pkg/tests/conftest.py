import pathlib

import pytest

from reqlift import load_config, load_corpus
from reqlift.pipeline import compile_corpus

DATA = pathlib.Path(__file__).resolve().parents[1] / "src" / "reqlift" / "data"


@pytest.fixture(scope="session")
def corpus_path():
    return DATA / "isolette.corpus"


@pytest.fixture(scope="session")
def config_path():
    return DATA / "isolette.config.json"


@pytest.fixture(scope="session")
def corpus(corpus_path):
    return load_corpus(corpus_path)


@pytest.fixture(scope="session")
def config(config_path):
    return load_config(config_path)


@pytest.fixture(scope="session")
def glossary(config):
    return config[0]


@pytest.fixture(scope="session")
def partition(config):
    return config[1]


@pytest.fixture(scope="session")
def compiled(corpus, glossary, partition):
    result = compile_corpus(corpus, glossary, partition)
    assert result.ok, result.errors
    return result
