import json

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from ballotbeat import corpus as C
from ballotbeat.errors import (
    ConfigError,
    CorpusError,
    CorpusFormatError,
    DatasetError,
    ParameterError,
)

from conftest import make_corpus


def _write_jsonl(path, records):
    with open(path, "w", encoding="utf-8") as fh:
        for r in records:
            fh.write(json.dumps(r) + "\n")


def _record(i, text="hello world", **extra):
    rec = {"id": f"t{i}", "text": text, "timestamp": "2016-02-01T12:00:00Z"}
    rec.update(extra)
    return rec


class TestLoadCorpus:
    def test_empty_file(self, tmp_path):
        path = tmp_path / "empty.jsonl"
        path.write_text("")
        assert len(C.load_corpus(path)) == 0

    def test_three_valid_lines(self, tmp_path):
        path = tmp_path / "c.jsonl"
        _write_jsonl(path, [_record(i) for i in range(3)])
        corpus = C.load_corpus(path)
        assert len(corpus) == 3
        assert corpus.by_id["t1"].text == "hello world"
        assert corpus[0].timestamp.tzname() == "UTC"

    def test_duplicate_id_names_the_id(self, tmp_path):
        path = tmp_path / "c.jsonl"
        _write_jsonl(path, [_record(1), _record(1)])
        with pytest.raises(CorpusError, match="t1"):
            C.load_corpus(path)

    def test_malformed_lines_skipped_and_counted(self, tmp_path):
        path = tmp_path / "c.jsonl"
        lines = [json.dumps(_record(i)) for i in range(20)]
        lines.insert(3, "{not json")
        path.write_text("\n".join(lines) + "\n")
        with pytest.warns(UserWarning, match="skipped 1"):
            corpus = C.load_corpus(path)
        assert len(corpus) == 20
        assert corpus.skipped_lines == 1

    def test_too_many_malformed_lines(self, tmp_path):
        path = tmp_path / "c.jsonl"
        lines = [json.dumps(_record(0)), "junk", "more junk"]
        path.write_text("\n".join(lines) + "\n")
        with pytest.raises(CorpusFormatError):
            C.load_corpus(path)

    def test_missing_fields_are_malformed(self, tmp_path):
        path = tmp_path / "c.jsonl"
        records = [_record(i) for i in range(18)]
        records.append({"id": "x", "text": "no timestamp"})
        records.append({"id": "y", "timestamp": "2016-02-01T12:00:00Z"})
        _write_jsonl(path, records)
        with pytest.warns(UserWarning):
            corpus = C.load_corpus(path)
        assert len(corpus) == 18

    def test_timestamp_offsets(self, tmp_path):
        path = tmp_path / "c.jsonl"
        _write_jsonl(path, [_record(0, timestamp="2016-02-01T07:00:00-05:00")])
        corpus = C.load_corpus(path)
        assert corpus[0].timestamp.hour == 12

    def test_unreadable_file(self, tmp_path):
        with pytest.raises(OSError):
            C.load_corpus(tmp_path / "missing.jsonl")


class TestTermFile:
    def test_comments_hashtags_dedupe(self, tmp_path):
        path = tmp_path / "terms.txt"
        path.write_text("; a comment\nDonald Trump\n#election2016\n"
                        "donald trump\n\n#Election2016\n", encoding="utf-8")
        assert C.load_term_file(path) == ["donald trump", "#election2016"]


class TestMatchTerms:
    def test_multiword_term(self):
        assert C.match_terms("I love Donald Trump!", ["donald trump"]) == {"donald trump"}

    def test_token_boundary(self):
        assert C.match_terms("playing the trumpet", ["trump"]) == set()

    def test_hashtag_whole_token(self):
        assert C.match_terms("#Election2016 tonight", ["#election2016"]) == {"#election2016"}
        assert C.match_terms("pre#election2016", ["#election2016"]) == set()

    def test_handle(self):
        assert C.match_terms("thanks @RealDonaldTrump!", ["@realdonaldtrump"]) == {"@realdonaldtrump"}

    def test_accepts_tweet_objects(self, tweet_factory):
        tweet = tweet_factory(0, "vote for bernie sanders")
        assert C.match_terms(tweet, ["bernie sanders"]) == {"bernie sanders"}

    @given(st.sampled_from(["Donald Trump rally", "nothing here",
                            "#Election2016 now", "TRUMP speaks"]))
    def test_case_invariance(self, text):
        terms = ["trump", "#election2016"]
        assert C.match_terms(text, terms) == C.match_terms(text.upper(), terms) \
            == C.match_terms(text.lower(), terms)


class TestDistantElection:
    def test_partition_and_counts(self):
        corpus = make_corpus(["vote trump", "cats are fine", "trump 2016", "lunch"])
        labeling = C.distant_label_election(corpus, ["trump"])
        assert labeling.positives == 2
        assert labeling.negatives == 2
        assert labeling.positives + labeling.negatives == len(corpus)
        labels = [ex.label for ex in labeling.examples]
        assert labels == ["election", "non_election", "election", "non_election"]

    def test_empty_seeds_rejected(self):
        with pytest.raises(ParameterError):
            C.distant_label_election(make_corpus(["x"]), [])


class TestDistantTopic:
    def test_unique_match_labels(self):
        corpus = make_corpus(["obamacare is the topic", "nothing political",
                              "guns and obamacare together"])
        labeling = C.distant_label_topic(corpus, {
            "Health Care": ["obamacare"], "Guns": ["guns"]})
        assert [(ex.tweet_id, ex.label) for ex in labeling.examples] == \
            [("t0", "Health Care")]
        assert labeling.ambiguous == 1
        assert labeling.unmatched == 1
        assert labeling.counts == {"Health Care": 1, "Guns": 0}

    def test_empty_term_list_warns(self):
        with pytest.warns(UserWarning, match="empty term list"):
            C.distant_label_topic(make_corpus(["x y"]), {"Other": []})


class TestDistantSentiment:
    def test_polarity_and_token_removal(self):
        corpus = make_corpus([":) great day", "sad news :(", "the meeting is at 5"])
        labeling = C.distant_label_sentiment(corpus, [":)", "great"],
                                             ["sad", ":("])
        by_id = {ex.tweet_id: ex for ex in labeling.examples}
        assert by_id["t0"].label == "positive"
        assert by_id["t0"].text == "day"
        assert by_id["t1"].label == "negative"
        assert by_id["t1"].text == "news"
        assert by_id["t2"].label == "neutral"
        assert by_id["t2"].text == "the meeting is at 5"

    def test_mixed_polarity_excluded(self):
        corpus = make_corpus(["great but sad"])
        labeling = C.distant_label_sentiment(corpus, ["great"], ["sad"])
        assert labeling.excluded == 1
        assert not labeling.examples

    def test_overlapping_lexicons_rejected(self):
        with pytest.raises(ConfigError):
            C.distant_label_sentiment(make_corpus(["x"]), ["fine", "odd"],
                                      ["odd", "bad"])

    def test_edge_punctuation_matches(self):
        corpus = make_corpus(["what a great! day"])
        labeling = C.distant_label_sentiment(corpus, ["great"], ["bad"])
        assert labeling.examples[0].label == "positive"
        assert "great" not in labeling.examples[0].text


class TestSplitDataset:
    def _examples(self, counts):
        out = []
        i = 0
        for label, n in counts.items():
            for _ in range(n):
                out.append(C.LabeledExample(f"t{i}", f"text {i}", label))
                i += 1
        return out

    def test_balanced_binary_split(self):
        examples = self._examples({"a": 50, "b": 50})
        train, test = C.split_dataset(examples, test_fraction=0.1, seed=1)
        assert len(train) == 90 and len(test) == 10
        assert sum(ex.label == "a" for ex in test) == 5

    def test_same_seed_same_split(self):
        examples = self._examples({"a": 30, "b": 20})
        first = C.split_dataset(examples, seed=9)
        second = C.split_dataset(examples, seed=9)
        assert [ex.tweet_id for ex in first[1]] == [ex.tweet_id for ex in second[1]]

    def test_partition(self):
        examples = self._examples({"a": 13, "b": 7})
        train, test = C.split_dataset(examples, test_fraction=0.25, seed=2)
        ids = sorted(ex.tweet_id for ex in train + test)
        assert ids == sorted(ex.tweet_id for ex in examples)
        assert not set(e.tweet_id for e in train) & set(e.tweet_id for e in test)

    def test_small_class_rejected(self):
        examples = self._examples({"a": 5, "b": 1})
        with pytest.raises(DatasetError, match="'b'"):
            C.split_dataset(examples, seed=0)

    def test_per_class_proportions_within_one(self):
        examples = self._examples({"a": 37, "b": 11, "c": 52})
        train, test = C.split_dataset(examples, test_fraction=0.2, seed=3)
        for label, total in (("a", 37), ("b", 11), ("c", 52)):
            got = sum(ex.label == label for ex in test)
            assert abs(got - total * 0.2) <= 1

    def test_fraction_bounds(self):
        with pytest.raises(ParameterError):
            C.split_dataset(self._examples({"a": 4}), test_fraction=0.0)

    def test_tuple_examples_supported(self):
        pairs = [("x", 0), ("y", 0), ("z", 1), ("w", 1)]
        train, test = C.split_dataset(pairs, test_fraction=0.5, seed=4)
        assert len(train) == 2 and len(test) == 2
