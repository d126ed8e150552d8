"""Query expansion: mutual top-k embedding similarity, noun-phrase
harvesting, and the election-significance filter.

A vocabulary term becomes a candidate when it sits in a seed term's top-10
cosine-similarity list *and* the seed sits in the candidate's. Candidates
(and noun phrases containing them) are then scored by election
significance: the fraction of tweets matching the term that also match at
least one seed. Terms at or above the cutoff (0.3 by default) survive.
"""

import warnings
from dataclasses import dataclass

from ballotbeat import embeddings as emb
from ballotbeat.corpus import load_term_file, match_terms
from ballotbeat.errors import (
    DatasetError,
    EmptyInputError,
    ParameterError,
    UndefinedRhoError,
    VocabLookupError,
)
from ballotbeat.tokenizer import is_pure_punctuation, is_url, stopwords, tokenize

SIMILAR_TERM = "similar_term"
NOUN_PHRASE = "noun_phrase"

DEFAULT_RHO_MIN = 0.3
PHRASES_PER_TERM = 5


@dataclass(frozen=True)
class SeedTermList:
    """Ordered, lowercased, deduplicated seed terms."""

    terms: tuple[str, ...]
    source: str | None = None

    def __post_init__(self):
        if not self.terms:
            raise EmptyInputError("seed term list is empty")

    def __iter__(self):
        return iter(self.terms)

    def __len__(self) -> int:
        return len(self.terms)

    @classmethod
    def load(cls, path) -> "SeedTermList":
        return cls(terms=tuple(load_term_file(path)), source=str(path))

    @classmethod
    def from_terms(cls, terms) -> "SeedTermList":
        ordered = []
        seen = set()
        for term in terms:
            term = term.lower()
            if term not in seen:
                seen.add(term)
                ordered.append(term)
        return cls(terms=tuple(ordered))


@dataclass(frozen=True)
class ExpandedTerm:
    term: str
    source_seed: str
    similarity: float
    rho: float
    kind: str  # similar_term | noun_phrase

    def to_dict(self) -> dict:
        return {"term": self.term, "source_seed": self.source_seed,
                "similarity": self.similarity, "rho": self.rho, "kind": self.kind}


def mutual_top10(model: emb.SkipGramModel, seeds, k: int = 10):
    """Candidates mutually top-k similar to some seed.

    Returns (candidate, source_seed, similarity) triples, best similarity
    first; a candidate reachable from several seeds keeps its
    highest-similarity pairing. Seeds missing from the vocabulary are
    skipped with a warning; if none remain, that is an error.
    """
    in_vocab = []
    for seed in seeds:
        if seed in model.vocab:
            in_vocab.append(seed)
        else:
            warnings.warn(f"seed term {seed!r} is not in the embedding vocabulary")
    if not in_vocab:
        raise VocabLookupError("no seed term is present in the embedding vocabulary")

    seed_set = set(seeds)
    best: dict[str, tuple[float, str]] = {}
    for seed in in_vocab:
        for candidate, similarity in emb.top_k_similar(model, seed, k):
            if candidate in seed_set:
                continue
            back = [term for term, _ in emb.top_k_similar(model, candidate, k)]
            if seed not in back:
                continue
            if candidate not in best or similarity > best[candidate][0]:
                best[candidate] = (similarity, seed)
    triples = [(term, seed, sim) for term, (sim, seed) in best.items()]
    triples.sort(key=lambda t: (-t[2], t[0]))
    return triples


def harvest_noun_phrases(corpus, term: str, top_n: int = PHRASES_PER_TERM) -> list[str]:
    """Frequent 2-3 token phrases containing ``term``.

    A phrase qualifies when neither boundary token is a stopword and no
    token is a URL or pure punctuation. The ``top_n`` most frequent come
    back, most frequent first (ties alphabetically).
    """
    if not term:
        raise ParameterError("term must be nonempty")
    stops = stopwords()
    counts: dict[str, int] = {}
    for tweet in corpus:
        tokens = tokenize(tweet.text)
        for size in (2, 3):
            for i in range(len(tokens) - size + 1):
                gram = tokens[i:i + size]
                if term not in gram:
                    continue
                if gram[0] in stops or gram[-1] in stops:
                    continue
                if any(is_url(t) or is_pure_punctuation(t) for t in gram):
                    continue
                phrase = " ".join(gram)
                counts[phrase] = counts.get(phrase, 0) + 1
    ranked = sorted(counts, key=lambda p: (-counts[p], p))
    return ranked[:top_n]


def election_significance(corpus, term: str, seeds) -> float:
    """Fraction of the term's matching tweets that also contain a seed.

    Matching follows :func:`ballotbeat.corpus.match_terms`; unique tweet
    ids are counted. A term matching zero tweets has no defined
    significance and raises (that is not the same as a significance of 0).
    """
    matched_ids = set()
    with_seed = set()
    for tweet in corpus:
        if not match_terms(tweet, (term,)):
            continue
        matched_ids.add(tweet.id)
        if match_terms(tweet, seeds):
            with_seed.add(tweet.id)
    if not matched_ids:
        raise UndefinedRhoError(f"term {term!r} matches no tweets")
    return len(with_seed) / len(matched_ids)


def expand_query(seeds, corpus, model: emb.SkipGramModel,
                 rho_min: float = DEFAULT_RHO_MIN, k: int = 10) -> list[ExpandedTerm]:
    """Full expansion: mutual top-k candidates plus noun phrases containing
    them, filtered to election significance >= ``rho_min`` (inclusive) and
    sorted by significance, best first.

    Terms whose significance is undefined (no matching tweets) are dropped
    with a warning. Deterministic for a fixed model, corpus, and seeds.
    """
    if not 0.0 <= rho_min <= 1.0:
        raise ParameterError(f"rho cutoff must be in [0, 1], got {rho_min}")
    if len(corpus) == 0:
        raise DatasetError("corpus is empty")

    candidates = mutual_top10(model, seeds, k)
    scored: dict[str, ExpandedTerm] = {}

    def consider(term, seed, similarity, kind):
        if term in scored:
            return
        try:
            rho = election_significance(corpus, term, seeds)
        except UndefinedRhoError:
            warnings.warn(f"dropping {term!r}: no matching tweets, significance undefined")
            return
        if rho >= rho_min:
            scored[term] = ExpandedTerm(term=term, source_seed=seed,
                                        similarity=similarity, rho=rho, kind=kind)

    seed_set = set(seeds)
    for term, seed, similarity in candidates:
        consider(term, seed, similarity, SIMILAR_TERM)
        for phrase in harvest_noun_phrases(corpus, term):
            if phrase not in seed_set:
                consider(phrase, seed, similarity, NOUN_PHRASE)

    result = sorted(scored.values(), key=lambda e: (-e.rho, e.term))
    return result
