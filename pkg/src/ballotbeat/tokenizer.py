"""Whitespace tweet tokenizer that keeps hashtags and @handles whole."""

import string
from functools import lru_cache
from importlib import resources

_EDGE_PUNCT = string.punctuation


def tokenize(text: str) -> list[str]:
    """Lowercase, split on whitespace, trim punctuation at token edges.

    A leading ``#`` or ``@`` marks a hashtag or handle and survives the
    trim (only trailing punctuation is stripped from those). Tokens that
    are empty after trimming are dropped.
    """
    tokens = []
    for raw in text.lower().split():
        if raw[0] in "#@":
            tok = raw[0] + raw[1:].strip(_EDGE_PUNCT)
            if len(tok) == 1:
                continue
        else:
            tok = raw.strip(_EDGE_PUNCT)
            if not tok:
                continue
        tokens.append(tok)
    return tokens


def is_url(token: str) -> bool:
    return token.startswith(("http://", "https://", "www."))


def is_pure_punctuation(token: str) -> bool:
    return bool(token) and all(ch in string.punctuation for ch in token)


@lru_cache(maxsize=1)
def stopwords() -> frozenset[str]:
    """Bundled English stopword list (used for noun-phrase boundaries)."""
    text = resources.files("ballotbeat.data").joinpath("stopwords.txt").read_text("utf-8")
    words = set()
    for line in text.splitlines():
        line = line.strip()
        if line and not line.startswith(";"):
            words.add(line.lower())
    return frozenset(words)
