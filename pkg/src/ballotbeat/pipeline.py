"""End-to-end pipeline: ingest -> term filter -> election filter ->
topic/sentiment annotation -> reports.

Stage 1 keeps tweets matching the seed terms plus any expanded terms;
stage 2 keeps those the election classifier scores at or above the
threshold (the content-aware filter); stage 3 attaches topic and
sentiment labels. Outputs are a labeled JSONL file plus a JSON summary
with per-stage counts and reduction percentages. Everything written is
byte-identical across runs with the same config and seed.
"""

import json
import warnings
from dataclasses import dataclass, field
from pathlib import Path

from ballotbeat import election as election_mod
from ballotbeat import modelio, topic_sentiment
from ballotbeat.corpus import load_corpus, match_terms
from ballotbeat.errors import ConfigError, UsageError
from ballotbeat.expansion import SeedTermList


@dataclass
class PipelineConfig:
    """Paths and knobs for one pipeline run. Relative paths resolve
    against the config file's directory."""

    seeds: str
    corpus: str
    election_model: str
    topic_model: str
    sentiment_model: str
    out_dir: str
    expansion_report: str | None = None
    rho_min: float = 0.3
    threshold: float = 0.5
    seed: int = 0
    training: dict = field(default_factory=dict)

    REQUIRED = ("seeds", "corpus", "election_model", "topic_model",
                "sentiment_model", "out_dir")

    def __post_init__(self):
        if not 0.0 <= self.rho_min <= 1.0:
            raise ConfigError(f"rho_min must be in [0, 1], got {self.rho_min}")
        if not 0.0 < self.threshold < 1.0:
            raise ConfigError(f"threshold must be inside (0, 1), got {self.threshold}")

    @classmethod
    def from_file(cls, path, overrides: dict | None = None) -> "PipelineConfig":
        base = Path(path).resolve().parent
        with open(path, encoding="utf-8") as fh:
            raw = json.load(fh)
        if not isinstance(raw, dict):
            raise ConfigError("pipeline config must be a JSON object")
        raw.update({k: v for k, v in (overrides or {}).items() if v is not None})
        missing = [key for key in cls.REQUIRED if not raw.get(key)]
        if missing:
            raise ConfigError(f"config is missing required keys: {missing}")
        known = {f for f in cls.__dataclass_fields__}
        unknown = set(raw) - known
        if unknown:
            raise ConfigError(f"unknown config keys: {sorted(unknown)}")

        def resolve(value):
            return str((base / value)) if value else value

        for key in ("seeds", "corpus", "election_model", "topic_model",
                    "sentiment_model", "out_dir", "expansion_report"):
            if raw.get(key):
                raw[key] = resolve(raw[key])
        return cls(**raw)

    def check_inputs(self) -> None:
        paths = {"seeds": self.seeds, "corpus": self.corpus,
                 "election_model": self.election_model,
                 "topic_model": self.topic_model,
                 "sentiment_model": self.sentiment_model}
        if self.expansion_report:
            paths["expansion_report"] = self.expansion_report
        missing = {k: v for k, v in paths.items() if not Path(v).exists()}
        if missing:
            raise UsageError(f"missing pipeline inputs: {missing}")


def dump_json(obj, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(obj, fh, sort_keys=True, ensure_ascii=False, indent=2)
        fh.write("\n")


def jsonl_line(record: dict) -> str:
    return json.dumps(record, sort_keys=True, ensure_ascii=False,
                      separators=(",", ":")) + "\n"


def load_expansion_terms(path) -> list[str]:
    with open(path, encoding="utf-8") as fh:
        report = json.load(fh)
    return [entry["term"] for entry in report]


def run_pipeline(config: PipelineConfig) -> dict:
    """Run all three stages; returns the summary dict it also writes."""
    config.check_inputs()
    corpus = load_corpus(config.corpus)
    seeds = SeedTermList.load(config.seeds)
    expanded = load_expansion_terms(config.expansion_report) if config.expansion_report else []
    query_terms = list(dict.fromkeys(list(seeds) + expanded))

    election_net = modelio.load_model(config.election_model)
    topic_net = modelio.load_model(config.topic_model)
    sentiment_net = modelio.load_model(config.sentiment_model)
    for net, kind in ((election_net, election_mod.ElectionNet),
                      (topic_net, topic_sentiment.TSNet),
                      (sentiment_net, topic_sentiment.TSNet)):
        if not isinstance(net, kind):
            raise ConfigError(f"model {type(net).__name__} is not a {kind.__name__}")

    stage1 = [t for t in corpus if match_terms(t, query_terms)]
    seeds_only = sum(1 for t in corpus if match_terms(t, seeds)) if expanded else len(stage1)

    stage2 = []
    scores = {}
    for tweet in stage1:
        label, score = election_mod.classify_election(
            election_net, tweet.text, threshold=config.threshold)
        scores[tweet.id] = score
        if label == election_mod.ELECTION:
            stage2.append(tweet)

    out_dir = Path(config.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    labeled_path = out_dir / "labeled.jsonl"
    with open(labeled_path, "w", encoding="utf-8") as fh:
        for tweet in stage2:
            topic, _ = topic_sentiment.predict(topic_net, tweet.text)
            sentiment, _ = topic_sentiment.predict(sentiment_net, tweet.text)
            fh.write(jsonl_line({
                "id": tweet.id,
                "text": tweet.text,
                "timestamp": tweet.timestamp.isoformat(),
                "election_score": scores[tweet.id],
                "topic": topic,
                "sentiment": sentiment,
            }))

    if len(corpus) == 0:
        warnings.warn("corpus is empty; pipeline outputs are empty")

    summary = {
        "config": {
            "seeds": str(config.seeds),
            "corpus": str(config.corpus),
            "expansion_report": str(config.expansion_report) if config.expansion_report else None,
            "rho_min": config.rho_min,
            "threshold": config.threshold,
            "seed": config.seed,
        },
        "counts": {
            "ingested": len(corpus),
            "stage1_term_match": len(stage1),
            "stage2_election": len(stage2),
            "stage3_annotated": len(stage2),
        },
        "query_terms": len(query_terms),
        "expanded_terms": len(expanded),
        # observational slots; corpus-dependent, never asserted
        "expansion_volume_increase": (len(stage1) / seeds_only - 1.0) if (expanded and seeds_only) else None,
        "stage2_reduction": (1.0 - len(stage2) / len(stage1)) if stage1 else None,
    }
    dump_json(summary, out_dir / "summary.json")
    return summary
