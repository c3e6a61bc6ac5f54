"""Session-wide fixtures: the default synthetic corpus is built once."""

import pytest

from layoutie.synth import generate_corpus


@pytest.fixture(scope="session")
def default_corpus():
    return generate_corpus(root_seed=0)


@pytest.fixture(scope="session")
def movie_sites(default_corpus):
    corpora, gold = default_corpus
    return corpora["movie"], gold["movie"]
