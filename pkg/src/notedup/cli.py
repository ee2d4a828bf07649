"""Command-line interface.

Subcommands mirror the pipeline stages (ingest, dedup, classify, emit,
stats, ppl, synth) plus `run` for the full pipeline driven by a JSON/TOML
config file with per-flag overrides.

Exit codes: 0 success, 2 configuration error, 3 data error, 4 internal error.
"""

from __future__ import annotations

import argparse
import dataclasses
import json
import sys
from pathlib import Path

from . import FORMAT_VERSION, __version__
from .analysis import (
    cluster_duplicates,
    corpus_dup_stats,
    find_within_note_duplicates,
    read_clusters,
    write_clusters,
)
from .corpus import CorpusError, load_corpus, write_corpus, write_error_report
from .emit import DedupPolicy, emit_config, reduction_report
from .exact_match import build_index, find_duplicate_substrings, split_matches_to_sentences
from .ngram import (
    information_content,
    load_model,
    perplexity,
    perplexity_from_scores,
    save_model,
    train_ngram,
)
from .pipeline import (
    ConfigError,
    PipelineConfig,
    PipelineStageError,
    _write_duplicates_tsv,
    config_from_file,
    run_pipeline,
)
from .preprocess import dump_patterns
from .relevance import (
    LexiconError,
    TopicLexicon,
    apply_external_labels,
    bootstrap_sample,
    classify_clusters,
    default_lexicon,
    write_labels,
)
from .synth import SynthSpec, generate_synthetic_corpus

BN_RULES = {"drop-all": "drop_all", "keep-first": "keep_first_global"}


def _lexicon_arg(value: str | None) -> TopicLexicon | None:
    if value is None or value.lower() == "none":
        return None
    if value == "default":
        return default_lexicon()
    return TopicLexicon.from_file(value)


def _cmd_ingest(args) -> int:
    errors: list[dict] = []
    corpus = load_corpus(
        args.input,
        lenient=args.lenient,
        error_report=errors,
        source_tag=args.source_tag,
    )
    write_corpus(corpus, args.output)
    if args.errors and errors:
        write_error_report(errors, args.errors)
    print(f"ingested {len(corpus)} notes -> {args.output} ({len(errors)} bad lines)")
    return 0


def _cmd_dedup(args) -> int:
    corpus = load_corpus(args.input)
    wn = []
    for note in corpus.notes:
        wn.extend(find_within_note_duplicates(note, args.wn_min_chars))
    index = build_index(corpus)
    matches = find_duplicate_substrings(index, args.min_match_len)
    bn = split_matches_to_sentences(corpus, matches, args.min_sentence_chars)
    _write_duplicates_tsv(Path(args.duplicates), bn)
    clusters = cluster_duplicates(wn, bn, corpus)
    write_clusters(clusters, args.clusters)
    print(
        f"{len(matches)} match spans, {len(bn)} duplicated sentences, "
        f"{len(clusters)} clusters"
    )
    return 0


def _cmd_classify(args) -> int:
    clusters = read_clusters(args.clusters)
    lexicon = _lexicon_arg(args.lexicon)
    if lexicon is not None:
        classify_clusters(clusters, lexicon)
    if args.external_labels:
        unmatched = apply_external_labels(clusters, args.external_labels)
        if unmatched:
            print(f"warning: {len(unmatched)} label rows matched no cluster", file=sys.stderr)
    if args.labels_out:
        write_labels(clusters, args.labels_out)
    write_clusters(clusters, args.clusters_out or args.clusters)
    if args.bootstrap_n:
        if not args.bootstrap_out:
            raise ConfigError("--bootstrap-n requires --bootstrap-out")
        sample = bootstrap_sample(
            clusters, args.bootstrap_n, seed=args.seed, out_path=args.bootstrap_out
        )
        print(f"bootstrap batch of {len(sample)} -> {args.bootstrap_out}")
    labeled = sum(1 for c in clusters if c.relevance != "UNLABELED")
    print(f"labeled {labeled}/{len(clusters)} clusters")
    return 0


def _cmd_emit(args) -> int:
    corpus = load_corpus(args.input)
    clusters = read_clusters(args.clusters)
    if args.labels:
        apply_external_labels(clusters, args.labels)
    policy = DedupPolicy(
        config=args.config.upper(), bn_occurrence_rule=BN_RULES[args.bn_rule]
    )
    emitted = emit_config(corpus, clusters, policy)
    write_corpus(emitted, args.output)
    if args.reduction:
        report = reduction_report(
            emit_config(corpus, clusters, DedupPolicy(config="NONE")), emitted
        )
        Path(args.reduction).write_text(
            json.dumps(report, sort_keys=True, indent=2) + "\n", encoding="utf-8"
        )
    print(f"emitted {args.config.upper()} -> {args.output}")
    return 0


def _cmd_stats(args) -> int:
    corpus = load_corpus(args.input)
    clusters = read_clusters(args.clusters)
    stats = corpus_dup_stats(
        corpus,
        clusters,
        args.config.upper(),
        bn_occurrence_rule=BN_RULES[args.bn_rule],
        baseline_median_words=args.baseline_median,
    )
    payload = dataclasses.asdict(stats)
    payload["median_dup_sentences_per_note"] = list(stats.median_dup_sentences_per_note)
    payload["median_words_per_note"] = list(stats.median_words_per_note)
    text = json.dumps(payload, sort_keys=True, indent=2)
    if args.output:
        Path(args.output).write_text(text + "\n", encoding="utf-8")
    else:
        print(text)
    return 0


def _cmd_ppl(args) -> int:
    if args.scores:
        result = perplexity_from_scores(args.scores)
    else:
        if args.model_in:
            model = load_model(args.model_in)
        else:
            if not args.train:
                raise ConfigError("ppl requires --train, --model-in, or --scores")
            model = train_ngram(load_corpus(args.train), args.order, args.k)
            if args.model_out:
                save_model(model, args.model_out)
        if not args.eval:
            raise ConfigError("ppl requires --eval unless --scores is given")
        result = perplexity(
            model,
            load_corpus(args.eval),
            mode=args.mode.replace("-", "_"),
            max_len=args.max_len,
        )
    payload = {
        "ppl": result.ppl,
        "information_content": information_content(result.ppl),
        "n_instances": result.n_instances,
        "mode": result.mode,
    }
    print(json.dumps(payload, sort_keys=True, indent=2))
    return 0


def _cmd_synth(args) -> int:
    spec = SynthSpec(
        n_patients=args.n_patients,
        notes_per_patient=args.notes_per_patient,
        wn_dup_rate=args.wn_dup_rate,
        copy_forward_rate=args.copy_forward_rate,
        boilerplate_rate=args.boilerplate_rate,
        relevant_shared_rate=args.relevant_shared_rate,
        n_boilerplate_blocks=args.n_boilerplate_blocks,
        min_block_chars=args.min_block_chars,
    )
    corpus, sidecar = generate_synthetic_corpus(spec, seed=args.seed)
    write_corpus(corpus, args.out)
    if args.sidecar:
        Path(args.sidecar).write_text(
            json.dumps(sidecar, ensure_ascii=False, sort_keys=True, indent=2) + "\n",
            encoding="utf-8",
        )
    print(f"wrote {len(corpus)} synthetic notes -> {args.out}")
    return 0


def _cmd_run(args) -> int:
    values: dict = {}
    if args.config:
        values.update(config_from_file(args.config))
    fields = {f.name for f in dataclasses.fields(PipelineConfig)}
    unknown = set(values) - fields
    if unknown:
        raise ConfigError(f"unknown config keys: {', '.join(sorted(unknown))}")
    for name in fields:
        override = getattr(args, name, None)
        if override is not None:
            values[name] = override
    if "configs" in values:
        values["configs"] = tuple(c.upper() for c in values["configs"])
    if values.get("bn_rule") in BN_RULES:
        values["bn_rule"] = BN_RULES[values["bn_rule"]]
    if isinstance(values.get("lexicon"), str) and values["lexicon"].lower() == "none":
        values["lexicon"] = None
    config = PipelineConfig(**values)
    manifest = run_pipeline(config)
    print(json.dumps({"workdir": config.workdir, "outputs": sorted(manifest["outputs"])}, indent=2))
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="notedup",
        description="Detect, characterize, and remove duplicated text in note corpora.",
    )
    parser.add_argument(
        "--version",
        action="version",
        version=f"notedup {__version__} (format {FORMAT_VERSION})",
    )
    parser.add_argument(
        "--dump-patterns",
        action="store_true",
        help="print the active date/time normalization patterns and exit",
    )
    sub = parser.add_subparsers(dest="command")

    p = sub.add_parser("ingest", help="validate and canonicalize a JSONL corpus")
    p.add_argument("--input", required=True)
    p.add_argument("--output", required=True)
    p.add_argument("--lenient", action="store_true")
    p.add_argument("--errors", help="write the error report JSONL here")
    p.add_argument("--source-tag")
    p.set_defaults(func=_cmd_ingest)

    p = sub.add_parser("dedup", help="detect within- and between-note duplicates")
    p.add_argument("--input", required=True)
    p.add_argument("--duplicates", required=True, help="output TSV of duplicated sentences")
    p.add_argument("--clusters", required=True, help="output JSONL of clusters")
    p.add_argument("--min-match-len", "-k", type=int, default=100, dest="min_match_len")
    p.add_argument("--min-sentence-chars", type=int, default=5)
    p.add_argument("--wn-min-chars", type=int, default=5)
    p.set_defaults(func=_cmd_dedup)

    p = sub.add_parser("classify", help="label clusters for clinical relevance")
    p.add_argument("--clusters", required=True)
    p.add_argument("--clusters-out")
    p.add_argument("--lexicon", default="default", help="path, 'default', or 'none'")
    p.add_argument("--external-labels", help="TSV of external model labels")
    p.add_argument("--labels-out")
    p.add_argument("--bootstrap-n", type=int, default=0)
    p.add_argument("--bootstrap-out")
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=_cmd_classify)

    p = sub.add_parser("emit", help="materialize a deduplication configuration")
    p.add_argument("--input", required=True)
    p.add_argument("--clusters", required=True)
    p.add_argument("--labels", help="TSV labels to apply before emitting")
    p.add_argument("--config", required=True, choices=["none", "wn", "wnnr", "wnbn"])
    p.add_argument("--bn-rule", choices=sorted(BN_RULES), default="drop-all")
    p.add_argument("--output", required=True)
    p.add_argument("--reduction", help="write the reduction report JSON here")
    p.set_defaults(func=_cmd_emit)

    p = sub.add_parser("stats", help="duplication statistics for a configuration")
    p.add_argument("--input", required=True, help="the emitted corpus for the config")
    p.add_argument("--clusters", required=True)
    p.add_argument("--config", required=True, choices=["none", "wn", "wnnr", "wnbn"])
    p.add_argument("--bn-rule", choices=sorted(BN_RULES), default="drop-all")
    p.add_argument("--baseline-median", type=float)
    p.add_argument("--output")
    p.set_defaults(func=_cmd_stats)

    p = sub.add_parser("ppl", help="perplexity and information content")
    p.add_argument("--train")
    p.add_argument("--eval")
    p.add_argument("--mode", choices=["last-token", "full-sequence"], default="last-token")
    p.add_argument("--order", type=int, default=3)
    p.add_argument("--k", type=float, default=0.1)
    p.add_argument("--max-len", type=int, default=128)
    p.add_argument("--model-in")
    p.add_argument("--model-out")
    p.add_argument("--scores", help="external scorer JSONL of {instance_id, log_prob}")
    p.set_defaults(func=_cmd_ppl)

    p = sub.add_parser("synth", help="generate a synthetic corpus with ground truth")
    p.add_argument("--out", required=True)
    p.add_argument("--sidecar")
    p.add_argument("--n-patients", type=int, default=10)
    p.add_argument("--notes-per-patient", type=int, default=5)
    p.add_argument("--wn-dup-rate", type=float, default=0.2)
    p.add_argument("--copy-forward-rate", type=float, default=0.3)
    p.add_argument("--boilerplate-rate", type=float, default=0.25)
    p.add_argument("--relevant-shared-rate", type=float, default=0.1)
    p.add_argument("--n-boilerplate-blocks", type=int, default=3)
    p.add_argument("--min-block-chars", type=int, default=120)
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=_cmd_synth)

    p = sub.add_parser("run", help="run the full pipeline")
    p.add_argument("--config", help="JSON or TOML config file")
    p.add_argument("--corpus")
    p.add_argument("--workdir")
    p.add_argument("--lexicon")
    p.add_argument("--labels")
    p.add_argument("--k", type=int)
    p.add_argument("--min-sentence-chars", type=int, dest="min_sentence_chars")
    p.add_argument("--wn-min-chars", type=int, dest="wn_min_chars")
    p.add_argument("--configs", nargs="+")
    p.add_argument("--bn-rule", choices=sorted(BN_RULES), dest="bn_rule")
    p.add_argument("--ngram-order", type=int, dest="ngram_order")
    p.add_argument("--ngram-k", type=float, dest="ngram_k")
    p.add_argument("--max-len", type=int, dest="max_len")
    p.add_argument("--ppl-mode", choices=["last_token", "full_sequence"], dest="ppl_mode")
    p.add_argument("--seed", type=int)
    p.add_argument("--threads", type=int)
    p.add_argument("--source-tag", dest="source_tag")
    p.add_argument("--lenient", action="store_const", const=True, default=None)
    p.set_defaults(func=_cmd_run)
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.dump_patterns:
        print(dump_patterns())
        return 0
    if not getattr(args, "command", None):
        parser.print_help()
        return 2
    try:
        return args.func(args)
    except (ConfigError, LexiconError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except PipelineStageError as exc:
        code = 3 if isinstance(exc.cause, (CorpusError, OSError, ValueError)) else 4
        print(f"error: {exc}", file=sys.stderr)
        return code
    except (CorpusError, OSError, ValueError, json.JSONDecodeError) as exc:
        print(f"data error: {exc}", file=sys.stderr)
        return 3
    except Exception as exc:  # pragma: no cover - defensive
        print(f"internal error: {exc}", file=sys.stderr)
        return 4


if __name__ == "__main__":
    sys.exit(main())
