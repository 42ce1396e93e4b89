import pathlib

import pytest

from helpers import random_corpus, story_text
from storysalience.scorer import NGramLM

FIXTURES = pathlib.Path(__file__).parent / "fixtures"


@pytest.fixture(scope="session")
def fixtures_dir():
    return FIXTURES


@pytest.fixture(scope="session")
def small_corpus():
    return random_corpus(seed=7, stories=6, max_sentences=6, max_tokens=10)


@pytest.fixture(scope="session")
def small_model(small_corpus):
    docs = [story_text(s) for s in small_corpus.stories]
    return NGramLM.train(docs, min_count=1)
