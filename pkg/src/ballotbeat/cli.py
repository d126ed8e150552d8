"""Command-line interface.

Subcommands cover the whole workflow: ``build-vocab``,
``train-embeddings``, ``expand-query``, ``build-dataset``,
``train-election``, ``train-topic``, ``train-sentiment``, ``classify``,
``evaluate`` and ``pipeline``. Every command is deterministic for a fixed
seed and identical inputs. Exit codes: 0 success, 1 runtime failure,
2 usage or configuration error; failures print one machine-parsable
``ERROR <CODE>: message`` line on stderr.
"""

import argparse
import json
import sys
from importlib import resources
from pathlib import Path

import numpy as np

import ballotbeat
from ballotbeat import election as election_mod
from ballotbeat import embeddings as emb
from ballotbeat import modelio
from ballotbeat import topic_sentiment as ts
from ballotbeat.corpus import (
    LabeledExample,
    distant_label_election,
    distant_label_sentiment,
    distant_label_topic,
    load_corpus,
    load_term_file,
    split_dataset,
)
from ballotbeat.errors import BallotbeatError, DatasetError, UsageError
from ballotbeat.expansion import SeedTermList, expand_query
from ballotbeat.metrics import evaluate
from ballotbeat.pipeline import PipelineConfig, dump_json, jsonl_line, run_pipeline
from ballotbeat.tokenizer import tokenize


def _data_path(name: str):
    return resources.files("ballotbeat.data").joinpath(name)


def _load_config(path) -> dict:
    if path is None:
        return {}
    with open(path, encoding="utf-8") as fh:
        config = json.load(fh)
    if not isinstance(config, dict):
        raise UsageError("config file must hold a JSON object")
    return config


def _setting(args, config: dict, name: str, default, section: str | None = None):
    """Flag value if given, else config value, else default."""
    value = getattr(args, name.replace("-", "_"), None)
    if value is not None:
        return value
    scope = config.get("training", {}).get(section, {}) if section else config
    return scope.get(name, config.get(name, default)) if section else scope.get(name, default)


def _require(value, flag: str):
    if value is None:
        raise UsageError(f"missing required input: {flag}")
    return value


def _check_range(name, value, lo, hi, inclusive: bool = True):
    ok = lo <= value <= hi if inclusive else lo < value < hi
    if not ok:
        bounds = f"[{lo}, {hi}]" if inclusive else f"({lo}, {hi})"
        raise UsageError(f"{name} must be in {bounds}, got {value}")
    return value


def _write_labeled(examples, task: str, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for ex in examples:
            value = ex.label == "election" if task == "election" else ex.label
            fh.write(jsonl_line({"id": ex.tweet_id, "text": ex.text,
                                 "labels": {task: value}}))


def read_labeled_jsonl(path, task: str) -> list[LabeledExample]:
    """Training records: one JSON object per line with ``id``, ``text``
    and ``labels.<task>`` (boolean for election, label string otherwise)."""
    examples = []
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            try:
                record = json.loads(line)
                label = record["labels"][task]
                text = record["text"]
                tweet_id = record.get("id", f"line{lineno}")
            except (ValueError, KeyError, TypeError) as exc:
                raise DatasetError(f"{path}:{lineno}: bad labeled record ({exc})")
            if task == "election":
                label = "election" if label in (True, 1, "election") else "non_election"
            examples.append(LabeledExample(tweet_id, text, str(label)))
    if not examples:
        raise DatasetError(f"{path} holds no labeled examples")
    return examples


def cmd_build_vocab(args) -> int:
    config = _load_config(args.config)
    corpus_path = _require(_setting(args, config, "corpus", None), "--corpus")
    min_count = int(_setting(args, config, "min_count", 1))
    corpus = load_corpus(corpus_path)
    vocab = emb.build_vocab((tokenize(t.text) for t in corpus), min_count=min_count)
    out = _require(args.out, "--out")
    dump_json({"min_count": min_count,
               "terms": [{"term": t, "freq": f}
                         for t, f in zip(vocab.terms, vocab.freqs)]}, out)
    print(f"vocabulary: {len(vocab)} terms -> {out}")
    return 0


def cmd_train_embeddings(args) -> int:
    config = _load_config(args.config)
    corpus_path = _require(_setting(args, config, "corpus", None), "--corpus")
    epochs = int(_setting(args, config, "epochs", 5, section="embeddings"))
    lr = float(_setting(args, config, "lr", 0.025, section="embeddings"))
    dim = int(_setting(args, config, "dim", 100, section="embeddings"))
    window = int(_setting(args, config, "window", 5, section="embeddings"))
    min_count = int(_setting(args, config, "min_count", 1, section="embeddings"))
    seed = int(_setting(args, config, "seed", 0))
    corpus = load_corpus(corpus_path)
    sentences = [tokenize(t.text) for t in corpus]
    model = emb.train_skipgram(sentences, window=window, dim=dim, epochs=epochs,
                               learning_rate=lr, min_count=min_count, seed=seed)
    out = _require(args.out, "--out")
    modelio.save_model(model, out)
    if args.export_text:
        emb.export_embeddings_text(model, args.export_text)
    print(f"skip-gram model: |V|={len(model.vocab)}, dim={dim} -> {out}")
    return 0


def cmd_expand_query(args) -> int:
    config = _load_config(args.config)
    rho_min = float(_setting(args, config, "rho_min", 0.3))
    _check_range("--rho-min", rho_min, 0.0, 1.0)
    seeds_path = _require(_setting(args, config, "seeds", None), "--seeds")
    corpus_path = _require(_setting(args, config, "corpus", None), "--corpus")
    model_path = _require(args.embeddings, "--embeddings")
    k = int(args.k)
    model = modelio.load_model(model_path)
    if not isinstance(model, emb.SkipGramModel):
        raise UsageError(f"{model_path} is not a skip-gram embedding model")
    seeds = SeedTermList.load(seeds_path)
    corpus = load_corpus(corpus_path)
    expanded = expand_query(seeds, corpus, model, rho_min=rho_min, k=k)
    out = _require(args.out, "--out")
    dump_json([e.to_dict() for e in expanded], out)
    print(f"expanded query: {len(seeds)} seeds -> {len(expanded)} new terms -> {out}")
    return 0


def cmd_build_dataset(args) -> int:
    config = _load_config(args.config)
    corpus_path = _require(_setting(args, config, "corpus", None), "--corpus")
    fraction = float(_setting(args, config, "test_fraction", 0.1))
    _check_range("--test-fraction", fraction, 0.0, 1.0, inclusive=False)
    seed = int(_setting(args, config, "seed", 0))
    corpus = load_corpus(corpus_path)

    if args.task == "election":
        seeds_path = _setting(args, config, "seeds", None)
        seeds = load_term_file(seeds_path) if seeds_path else \
            load_term_file(_data_path("seed_terms.txt"))
        labeling = distant_label_election(corpus, seeds)
        summary = {"task": "election", **labeling.counts}
    elif args.task == "topic":
        terms_dir = Path(args.topic_terms) if args.topic_terms else _data_path("topics")
        topic_terms = {}
        for label in ts.TOPIC_LABELS:
            path = terms_dir / f"{ts.topic_slug(label)}.txt"
            topic_terms[label] = load_term_file(path) if Path(str(path)).exists() else []
        labeling = distant_label_topic(corpus, topic_terms)
        summary = {"task": "topic", "counts": labeling.counts,
                   "ambiguous": labeling.ambiguous, "unmatched": labeling.unmatched}
    else:
        pos = load_term_file(args.pos_lexicon or _data_path("lexicon_positive.txt"))
        neg = load_term_file(args.neg_lexicon or _data_path("lexicon_negative.txt"))
        labeling = distant_label_sentiment(corpus, pos, neg)
        summary = {"task": "sentiment", "counts": labeling.counts,
                   "excluded": labeling.excluded}

    train, test = split_dataset(labeling.examples, test_fraction=fraction, seed=seed)
    out_dir = Path(_require(args.out_dir, "--out-dir"))
    out_dir.mkdir(parents=True, exist_ok=True)
    _write_labeled(train, args.task, out_dir / f"{args.task}_train.jsonl")
    _write_labeled(test, args.task, out_dir / f"{args.task}_test.jsonl")
    summary.update(train_examples=len(train), test_examples=len(test))
    print(json.dumps(summary, sort_keys=True))
    return 0


def _train_flags(args, config: dict, section: str, epochs_default: int):
    epochs = int(_setting(args, config, "epochs", epochs_default, section=section))
    batch = int(_setting(args, config, "batch", 32, section=section))
    lr = float(_setting(args, config, "lr", 0.001, section=section))
    seed = int(_setting(args, config, "seed", 0))
    if epochs < 1 or batch < 1:
        raise UsageError("--epochs and --batch must be >= 1")
    if lr < 0:
        raise UsageError(f"--lr must be >= 0, got {lr}")
    return epochs, batch, lr, seed


def cmd_train_election(args) -> int:
    config = _load_config(args.config)
    epochs, batch, lr, seed = _train_flags(args, config, "election", 5)
    examples = read_labeled_jsonl(_require(args.train, "--train"), "election")
    matrices = election_mod.encode_texts([ex.text for ex in examples])
    labels = np.array([ex.label == "election" for ex in examples], dtype=np.float64)
    net = election_mod.build_election_net(seed=seed)
    trace = election_mod.train_election(net, matrices, labels, epochs=epochs,
                                        batch_size=batch, learning_rate=lr,
                                        seed=seed)
    out = _require(args.out, "--out")
    modelio.save_model(net, out)
    report = {"epochs_run": len(trace), "final_loss": trace[-1], "model": str(out)}
    if args.test:
        test = read_labeled_jsonl(args.test, "election")
        scores = election_mod.forward_election_batch(
            net, election_mod.encode_texts([ex.text for ex in test]).astype(np.float64))
        predictions = ["election" if s >= 0.5 else "non_election" for s in scores]
        result = evaluate(predictions, [ex.label for ex in test],
                          labels=("non_election", "election"))
        report["test_weighted_f1"] = result.weighted_f1
    print(json.dumps(report, sort_keys=True))
    return 0


def _cmd_train_ts(args, task: str, labels, cfg: ts.TSNetConfig, epochs_default: int) -> int:
    config = _load_config(args.config)
    epochs, batch, lr, seed = _train_flags(args, config, task, epochs_default)
    examples = read_labeled_jsonl(_require(args.train, "--train"), task)
    bad = {ex.label for ex in examples} - set(labels)
    if bad:
        raise DatasetError(f"labels {sorted(bad)} are not valid {task} labels")
    vocab = ts.TSVocab.from_texts([ex.text for ex in examples])
    net = ts.build_ts_net(cfg, labels, vocab, task=task, seed=seed)
    dataset = [(ex.text, ex.label) for ex in examples]
    trace = ts.train_ts(net, dataset, epochs=epochs, batch_size=batch,
                        learning_rate=lr, seed=seed)
    out = _require(args.out, "--out")
    modelio.save_model(net, out)
    report = {"epochs_run": len(trace), "final_loss": trace[-1], "model": str(out)}
    if args.test:
        test = read_labeled_jsonl(args.test, task)
        predictions = [ts.predict(net, ex.text)[0] for ex in test]
        result = evaluate(predictions, [ex.label for ex in test], labels=labels)
        report["test_weighted_f1"] = result.weighted_f1
    print(json.dumps(report, sort_keys=True))
    return 0


def cmd_train_topic(args) -> int:
    return _cmd_train_ts(args, "topic", ts.TOPIC_LABELS, ts.topic_config(), 10)


def cmd_train_sentiment(args) -> int:
    return _cmd_train_ts(args, "sentiment", ts.SENTIMENT_LABELS,
                         ts.sentiment_config(), 10)


def cmd_classify(args) -> int:
    config = _load_config(args.config)
    threshold = float(_setting(args, config, "threshold", 0.5))
    _check_range("--threshold", threshold, 0.0, 1.0, inclusive=False)
    corpus = load_corpus(_require(_setting(args, config, "corpus", None), "--corpus"))
    model = modelio.load_model(_require(args.model, "--model"))
    out = _require(args.out, "--out")
    with open(out, "w", encoding="utf-8") as fh:
        for tweet in corpus:
            record = {"id": tweet.id, "text": tweet.text,
                      "timestamp": tweet.timestamp.isoformat()}
            if isinstance(model, election_mod.ElectionNet):
                label, score = election_mod.classify_election(model, tweet.text,
                                                              threshold=threshold)
                record["election_score"] = score
                record["election"] = label == election_mod.ELECTION
            elif isinstance(model, ts.TSNet):
                label, _ = ts.predict(model, tweet.text)
                record[model.task] = label
            else:
                raise UsageError(f"{args.model} is not a classifier model")
            fh.write(jsonl_line(record))
    print(f"classified {len(corpus)} tweets -> {out}")
    return 0


def _read_labels_by_id(path, key: str) -> dict:
    labels = {}
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            record = json.loads(line)
            value = record.get(key, record.get("labels", {}).get(key))
            if value is None:
                raise DatasetError(f"{path}:{lineno}: no {key!r} label")
            labels[record.get("id", f"line{lineno}")] = value
    return labels


def cmd_evaluate(args) -> int:
    predictions = _read_labels_by_id(_require(args.pred, "--pred"), args.key)
    gold = _read_labels_by_id(_require(args.gold, "--gold"), args.key)
    if set(predictions) != set(gold):
        raise DatasetError("prediction and gold files cover different tweet ids")
    ids = sorted(gold)
    report = evaluate([predictions[i] for i in ids], [gold[i] for i in ids])
    payload = report.to_dict()
    if args.out:
        dump_json(payload, args.out)
    print(json.dumps(payload, sort_keys=True, indent=2))
    return 0


def cmd_pipeline(args) -> int:
    overrides = {"threshold": args.threshold, "rho_min": args.rho_min,
                 "seed": args.seed, "out_dir": args.out_dir}
    try:
        config = PipelineConfig.from_file(_require(args.config, "--config"),
                                          overrides=overrides)
    except FileNotFoundError as exc:
        raise UsageError(f"config file not found: {exc.filename}") from exc
    _check_range("--threshold", config.threshold, 0.0, 1.0, inclusive=False)
    _check_range("--rho-min", config.rho_min, 0.0, 1.0)
    summary = run_pipeline(config)
    print(json.dumps(summary["counts"], sort_keys=True))
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="ballotbeat",
        description="Detect and categorize election-related tweets.")
    parser.add_argument("--version", action="version",
                        version=f"ballotbeat {ballotbeat.__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, *, config=True, seed=True, out=False):
        if config:
            p.add_argument("--config", help="JSON config file; flags override it")
        if seed:
            p.add_argument("--seed", type=int, default=None)
        if out:
            p.add_argument("--out", default=None, help="output path")

    p = sub.add_parser("build-vocab", help="count corpus terms")
    common(p, out=True)
    p.add_argument("--corpus")
    p.add_argument("--min-count", type=int, default=None)
    p.set_defaults(fn=cmd_build_vocab)

    p = sub.add_parser("train-embeddings", help="train skip-gram embeddings")
    common(p, out=True)
    p.add_argument("--corpus")
    p.add_argument("--dim", type=int, default=None)
    p.add_argument("--window", type=int, default=None)
    p.add_argument("--epochs", type=int, default=None)
    p.add_argument("--lr", type=float, default=None)
    p.add_argument("--min-count", type=int, default=None)
    p.add_argument("--export-text", default=None,
                   help="also write text-format word vectors here")
    p.set_defaults(fn=cmd_train_embeddings)

    p = sub.add_parser("expand-query", help="expand seed terms")
    common(p, out=True)
    p.add_argument("--embeddings", help="skip-gram model container")
    p.add_argument("--seeds")
    p.add_argument("--corpus")
    p.add_argument("--rho-min", type=float, default=None)
    p.add_argument("--k", type=int, default=10)
    p.set_defaults(fn=cmd_expand_query)

    p = sub.add_parser("build-dataset", help="distant-supervision labeling")
    common(p)
    p.add_argument("--task", choices=("election", "topic", "sentiment"), required=True)
    p.add_argument("--corpus")
    p.add_argument("--seeds", help="seed terms (election task)")
    p.add_argument("--topic-terms", help="directory of per-topic term files")
    p.add_argument("--pos-lexicon")
    p.add_argument("--neg-lexicon")
    p.add_argument("--test-fraction", type=float, default=None)
    p.add_argument("--out-dir", required=True)
    p.set_defaults(fn=cmd_build_dataset)

    for name, fn in (("train-election", cmd_train_election),
                     ("train-topic", cmd_train_topic),
                     ("train-sentiment", cmd_train_sentiment)):
        p = sub.add_parser(name, help=f"train the {name.split('-')[1]} classifier")
        common(p, out=True)
        p.add_argument("--train", help="labeled training JSONL")
        p.add_argument("--test", help="labeled test JSONL (optional report)")
        p.add_argument("--epochs", type=int, default=None)
        p.add_argument("--batch", type=int, default=None)
        p.add_argument("--lr", type=float, default=None)
        p.set_defaults(fn=fn)

    p = sub.add_parser("classify", help="apply one trained model to a corpus")
    common(p, seed=False, out=True)
    p.add_argument("--model")
    p.add_argument("--corpus")
    p.add_argument("--threshold", type=float, default=None)
    p.set_defaults(fn=cmd_classify)

    p = sub.add_parser("evaluate", help="precision/recall/F1 against gold labels")
    common(p, seed=False, config=False, out=True)
    p.add_argument("--pred")
    p.add_argument("--gold")
    p.add_argument("--key", required=True,
                   help="label key (e.g. topic, sentiment, election)")
    p.set_defaults(fn=cmd_evaluate)

    p = sub.add_parser("pipeline", help="run ingest -> filter -> classify")
    p.add_argument("--config", required=False)
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--threshold", type=float, default=None)
    p.add_argument("--rho-min", type=float, default=None)
    p.add_argument("--out-dir", default=None)
    p.set_defaults(fn=cmd_pipeline)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.fn(args)
    except UsageError as exc:
        print(f"ERROR {exc.code}: {exc}", file=sys.stderr)
        return 2
    except BallotbeatError as exc:
        print(f"ERROR {exc.code}: {exc}", file=sys.stderr)
        return 1
    except OSError as exc:
        print(f"ERROR E_IO: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
