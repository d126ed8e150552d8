"""Corpus ingestion, term matching, distant-supervision labeling, splits.

Tweet files are JSON Lines: one object per line with required keys ``id``
(string), ``text`` (string) and ``timestamp`` (RFC 3339 string), plus an
optional ``labels`` object. Term-list and lexicon files hold one entry
per line with ``;`` comments.
"""

import json
import string
import warnings
from dataclasses import dataclass, field
from datetime import datetime, timezone

import numpy as np

from ballotbeat.errors import (
    ConfigError,
    CorpusError,
    CorpusFormatError,
    DatasetError,
    ParameterError,
)
from ballotbeat.tokenizer import tokenize

MALFORMED_LINE_LIMIT = 0.10


@dataclass(frozen=True)
class Tweet:
    id: str
    text: str
    timestamp: datetime
    labels: dict | None = None


class Corpus:
    """An ordered, id-indexed tweet collection (immutable after load)."""

    def __init__(self, tweets, skipped_lines: int = 0):
        self.tweets = list(tweets)
        self.skipped_lines = skipped_lines
        self.by_id = {}
        for tweet in self.tweets:
            if tweet.id in self.by_id:
                raise CorpusError(f"duplicate tweet id {tweet.id!r}")
            self.by_id[tweet.id] = tweet

    def __len__(self) -> int:
        return len(self.tweets)

    def __iter__(self):
        return iter(self.tweets)

    def __getitem__(self, i):
        return self.tweets[i]


def parse_timestamp(value: str) -> datetime:
    """RFC 3339 instant; a trailing Z means UTC, naive values assume UTC."""
    ts = datetime.fromisoformat(value.replace("Z", "+00:00"))
    if ts.tzinfo is None:
        ts = ts.replace(tzinfo=timezone.utc)
    return ts.astimezone(timezone.utc)


def _parse_tweet_line(line: str) -> Tweet:
    record = json.loads(line)
    if not isinstance(record, dict):
        raise ValueError("line is not a JSON object")
    tweet_id = record["id"]
    text = record["text"]
    if not isinstance(tweet_id, str) or not tweet_id:
        raise ValueError("id must be a nonempty string")
    if not isinstance(text, str) or not text:
        raise ValueError("text must be a nonempty string")
    labels = record.get("labels")
    if labels is not None and not isinstance(labels, dict):
        raise ValueError("labels must be an object")
    return Tweet(id=tweet_id, text=text,
                 timestamp=parse_timestamp(record["timestamp"]), labels=labels)


def load_corpus(path) -> Corpus:
    """Streaming JSONL parse. Malformed lines are skipped and counted (a
    warning reports the total); more than 10% malformed fails the load.
    Duplicate ids fail immediately, naming the id.
    """
    tweets = []
    seen: set[str] = set()
    skipped = 0
    total = 0
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            total += 1
            try:
                tweet = _parse_tweet_line(line)
            except (ValueError, KeyError, TypeError):
                skipped += 1
                continue
            if tweet.id in seen:
                raise CorpusError(f"duplicate tweet id {tweet.id!r} at line {lineno}")
            seen.add(tweet.id)
            tweets.append(tweet)
    if total and skipped / total > MALFORMED_LINE_LIMIT:
        raise CorpusFormatError(
            f"{skipped} of {total} lines are malformed (> {MALFORMED_LINE_LIMIT:.0%})")
    if skipped:
        warnings.warn(f"skipped {skipped} malformed corpus lines")
    return Corpus(tweets, skipped_lines=skipped)


def load_term_file(path) -> list[str]:
    """One term per line, lowercased and deduplicated in file order.
    Lines starting with ';' are comments; a leading '#' marks a hashtag
    term, not a comment."""
    terms: list[str] = []
    seen: set[str] = set()
    with open(path, encoding="utf-8") as fh:
        for line in fh:
            term = line.strip().lower()
            if not term or term.startswith(";"):
                continue
            if term not in seen:
                seen.add(term)
                terms.append(term)
    return terms


def _match_single(tokens: list[str], term: str) -> bool:
    if term.startswith(("#", "@")):
        return term in tokens
    term_tokens = tokenize(term)
    if not term_tokens:
        return False
    if len(term_tokens) == 1:
        return term_tokens[0] in tokens
    span = len(term_tokens)
    return any(tokens[i:i + span] == term_tokens
               for i in range(len(tokens) - span + 1))


def match_terms(tweet_or_text, terms) -> set[str]:
    """Terms present in the tweet, matched case-insensitively.

    Plain terms match at token boundaries (multi-word terms as contiguous
    token runs); '#'/'@' terms must equal a whole token.
    """
    text = tweet_or_text.text if isinstance(tweet_or_text, Tweet) else tweet_or_text
    tokens = tokenize(text)
    return {term for term in terms if _match_single(tokens, term)}


@dataclass(frozen=True)
class LabeledExample:
    """One distant-supervision training record."""

    tweet_id: str
    text: str
    label: str


@dataclass
class ElectionLabeling:
    examples: list[LabeledExample]
    positives: int
    negatives: int

    @property
    def counts(self) -> dict[str, int]:
        return {"election": self.positives, "non_election": self.negatives}


@dataclass
class TopicLabeling:
    examples: list[LabeledExample]
    counts: dict[str, int]
    ambiguous: int
    unmatched: int


@dataclass
class SentimentLabeling:
    examples: list[LabeledExample]
    counts: dict[str, int]
    excluded: int


def distant_label_election(corpus, seeds) -> ElectionLabeling:
    """Tweets matching any seed term are positives; all others negatives."""
    if not seeds:
        raise ParameterError("seed term list is empty")
    examples = []
    positives = 0
    for tweet in corpus:
        hit = bool(match_terms(tweet, seeds))
        positives += hit
        examples.append(LabeledExample(tweet.id, tweet.text,
                                       "election" if hit else "non_election"))
    return ElectionLabeling(examples=examples, positives=positives,
                            negatives=len(examples) - positives)


def distant_label_topic(corpus, topic_terms: dict) -> TopicLabeling:
    """Label tweets that match exactly one topic's term list.

    Multi-topic matches are ambiguous and excluded; zero-match tweets are
    excluded too. Topics with empty term lists only draw a warning.
    """
    for topic, terms in topic_terms.items():
        if not terms:
            warnings.warn(f"topic {topic!r} has an empty term list")
    examples = []
    counts = {topic: 0 for topic in topic_terms}
    ambiguous = 0
    unmatched = 0
    for tweet in corpus:
        hits = [topic for topic, terms in topic_terms.items()
                if terms and match_terms(tweet, terms)]
        if len(hits) == 1:
            topic = hits[0]
            counts[topic] += 1
            examples.append(LabeledExample(tweet.id, tweet.text, topic))
        elif len(hits) > 1:
            ambiguous += 1
        else:
            unmatched += 1
    return TopicLabeling(examples=examples, counts=counts,
                         ambiguous=ambiguous, unmatched=unmatched)


def _strip_edges(token: str) -> str:
    return token.strip(string.punctuation)


def _lexicon_scan(text: str, lexicon: frozenset | set):
    """Whitespace tokens matching the lexicon (exactly, or after trimming
    edge punctuation) plus the text with those tokens removed."""
    kept = []
    hits = set()
    for raw in text.split():
        low = raw.lower()
        if low in lexicon:
            hits.add(low)
        elif _strip_edges(low) in lexicon:
            hits.add(_strip_edges(low))
        else:
            kept.append(raw)
    return hits, " ".join(kept)


def distant_label_sentiment(corpus, positive_lexicon, negative_lexicon) -> SentimentLabeling:
    """Polarity by lexicon: positive-only matches are positive, negative-
    only negative, neither neutral, both excluded. Matched lexicon tokens
    are removed from the training text so the classifier cannot just
    memorize the lexicon."""
    pos = {t.lower() for t in positive_lexicon}
    neg = {t.lower() for t in negative_lexicon}
    if not pos or not neg:
        raise ConfigError("sentiment lexicons must be nonempty")
    overlap = pos & neg
    if overlap:
        raise ConfigError(f"lexicons overlap on {sorted(overlap)}")
    examples = []
    counts = {"positive": 0, "negative": 0, "neutral": 0}
    excluded = 0
    for tweet in corpus:
        pos_hits, text = _lexicon_scan(tweet.text, pos)
        neg_hits, text = _lexicon_scan(text, neg)
        if pos_hits and neg_hits:
            excluded += 1
            continue
        label = "positive" if pos_hits else "negative" if neg_hits else "neutral"
        if label == "neutral":
            text = tweet.text
        counts[label] += 1
        examples.append(LabeledExample(tweet.id, text, label))
    return SentimentLabeling(examples=examples, counts=counts, excluded=excluded)


def split_dataset(examples, test_fraction: float = 0.1, seed: int = 0,
                  label_of=None):
    """Stratified, deterministic train/test split.

    Each class contributes round(n * test_fraction) test examples (classes
    need at least 2 members); original dataset order is preserved inside
    both halves, so train + test is a shuffle-free partition.
    """
    if not 0.0 < test_fraction < 1.0:
        raise ParameterError(f"test fraction must be in (0, 1), got {test_fraction}")
    examples = list(examples)
    if label_of is None:
        label_of = lambda ex: ex.label if hasattr(ex, "label") else ex[1]
    by_label: dict = {}
    for i, ex in enumerate(examples):
        by_label.setdefault(label_of(ex), []).append(i)
    rng = np.random.default_rng(seed)
    test_idx: set[int] = set()
    for label, indices in by_label.items():
        if len(indices) < 2:
            raise DatasetError(
                f"class {label!r} has {len(indices)} example(s); stratified "
                "splitting needs at least 2")
        n_test = int(np.floor(len(indices) * test_fraction + 0.5))
        chosen = rng.permutation(len(indices))[:n_test]
        test_idx.update(indices[c] for c in chosen)
    train = [ex for i, ex in enumerate(examples) if i not in test_idx]
    test = [ex for i, ex in enumerate(examples) if i in test_idx]
    return train, test
