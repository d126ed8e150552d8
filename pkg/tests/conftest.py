import sys
from datetime import datetime, timezone
from pathlib import Path

import numpy as np
import pytest
from hypothesis import settings

sys.path.insert(0, str(Path(__file__).parent))

settings.register_profile("ballotbeat", deadline=None, max_examples=60)
settings.load_profile("ballotbeat")


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def make_tweet(i, text, labels=None):
    from ballotbeat.corpus import Tweet
    return Tweet(id=f"t{i}", text=text,
                 timestamp=datetime(2016, 2, 1, 12, 0, tzinfo=timezone.utc),
                 labels=labels)


def make_corpus(texts):
    from ballotbeat.corpus import Corpus
    return Corpus([make_tweet(i, t) for i, t in enumerate(texts)])


@pytest.fixture
def tweet_factory():
    return make_tweet


@pytest.fixture
def corpus_factory():
    return make_corpus
