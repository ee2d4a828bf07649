"""End-to-end pipeline: ingest -> detect -> cluster -> classify -> emit ->
stats, with a content-hash manifest for reproducibility.

Every run is deterministic given (input, config, seed): randomness flows from
the single seed, JSON outputs are key-sorted, and the manifest records a hash
of the effective configuration plus the SHA-256 of every output so a rerun
can be verified byte for byte. A failing stage leaves its outputs with a
.partial suffix and aborts with the stage name.
"""

from __future__ import annotations

import csv
import hashlib
import json
import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass
from pathlib import Path
from statistics import median

from . import FORMAT_VERSION, __version__
from .analysis import (
    DuplicateCluster,
    cluster_duplicates,
    corpus_dup_stats,
    find_within_note_duplicates,
    write_clusters,
)
from .corpus import load_corpus, write_corpus, write_error_report
from .emit import CONFIGS, DedupPolicy, emit_config, reduction_report
from .exact_match import build_index, find_duplicate_substrings, split_matches_to_sentences
from .preprocess import count_words
from .relevance import (
    TopicLexicon,
    apply_external_labels,
    classify_clusters,
    default_lexicon,
    write_labels,
)

logger = logging.getLogger(__name__)


class ConfigError(Exception):
    """Invalid pipeline configuration (caught before any work)."""


class PipelineStageError(Exception):
    def __init__(self, stage: str, cause: Exception):
        self.stage = stage
        self.cause = cause
        super().__init__(f"stage {stage!r} failed: {cause}")


@dataclass
class PipelineConfig:
    corpus: str = ""
    workdir: str = ""
    lexicon: str | None = None  # path, or "default" for the shipped lexicon
    labels: str | None = None
    k: int = 100
    min_sentence_chars: int = 5
    wn_min_chars: int = 5
    configs: tuple[str, ...] = CONFIGS
    bn_rule: str = "drop_all"
    ngram_order: int = 3
    ngram_k: float = 0.1
    max_len: int = 128
    ppl_mode: str = "last_token"
    seed: int = 0
    threads: int = 1
    source_tag: str = ""
    lenient: bool = False

    def validate(self) -> None:
        if not self.corpus:
            raise ConfigError("corpus path is required")
        if not self.workdir:
            raise ConfigError("workdir is required")
        if self.k < 1:
            raise ConfigError("k must be >= 1")
        if self.threads < 1:
            raise ConfigError("threads must be >= 1")
        bad = [c for c in self.configs if c.upper() not in CONFIGS]
        if bad:
            raise ConfigError(f"unknown configurations: {', '.join(bad)}")
        if self.bn_rule not in ("drop_all", "keep_first_global"):
            raise ConfigError(f"unknown bn rule: {self.bn_rule}")
        if "WNNR" in [c.upper() for c in self.configs]:
            if self.lexicon is None and self.labels is None:
                raise ConfigError(
                    "WNNR requires a relevance label source (lexicon or labels file)"
                )


def config_from_file(path: str | Path) -> dict:
    """Read a JSON (always) or TOML (Python >= 3.11) config file."""
    path = Path(path)
    if path.suffix == ".toml":
        try:
            import tomllib
        except ImportError as exc:  # Python 3.10
            raise ConfigError(
                "TOML config requires Python >= 3.11; use JSON instead"
            ) from exc
        data = tomllib.loads(path.read_text(encoding="utf-8"))
    else:
        data = json.loads(path.read_text(encoding="utf-8"))
    if not isinstance(data, dict):
        raise ConfigError("config file must contain an object")
    return data


def _sha256_file(path: Path) -> str:
    digest = hashlib.sha256()
    with path.open("rb") as handle:
        for chunk in iter(lambda: handle.read(1 << 16), b""):
            digest.update(chunk)
    return digest.hexdigest()


def _config_hash(config: PipelineConfig) -> str:
    canonical = json.dumps(asdict(config), sort_keys=True)
    return hashlib.sha256(canonical.encode("utf-8")).hexdigest()


class _Workdir:
    """Stage-scoped output writing: files stay .partial until the stage ends."""

    def __init__(self, root: Path):
        self.root = root
        self.pending: list[tuple[Path, Path]] = []
        self.finished: list[Path] = []

    def path(self, name: str) -> Path:
        partial = self.root / (name + ".partial")
        self.pending.append((partial, self.root / name))
        return partial

    def commit_stage(self) -> None:
        for partial, final in self.pending:
            if partial.exists():
                partial.replace(final)
                self.finished.append(final)
        self.pending = []


def _write_json(path: Path, payload) -> None:
    path.write_text(
        json.dumps(payload, ensure_ascii=False, sort_keys=True, indent=2) + "\n",
        encoding="utf-8",
    )


def _write_duplicates_tsv(path: Path, records) -> None:
    with path.open("w", encoding="utf-8", newline="") as handle:
        writer = csv.writer(handle, delimiter="\t", lineterminator="\n")
        writer.writerow(["note_id", "start", "end", "sentence_index", "normalized_sentence"])
        for r in records:
            writer.writerow(
                [r.note_id, r.char_span[0], r.char_span[1], r.index_in_note, r.normalized]
            )


def _stats_payload(stats) -> dict:
    return {
        "pct_notes_with_dup": stats.pct_notes_with_dup,
        "median_dup_sentences_per_note": list(stats.median_dup_sentences_per_note),
        "median_words_per_note": list(stats.median_words_per_note),
        "word_reduction_pct": stats.word_reduction_pct,
    }


def _load_lexicon(spec: str | None) -> TopicLexicon | None:
    if spec is None:
        return None
    if spec == "default":
        return default_lexicon()
    return TopicLexicon.from_file(spec)


def run_pipeline(config: PipelineConfig) -> dict:
    """Run every stage and return the manifest (also written to workdir)."""
    config.validate()
    root = Path(config.workdir)
    root.mkdir(parents=True, exist_ok=True)
    work = _Workdir(root)
    manifest: dict = {
        "tool_version": __version__,
        "format_version": FORMAT_VERSION,
        "config": asdict(config),
        "config_hash": _config_hash(config),
        "seed": config.seed,
        "outputs": {},
    }

    def stage(name):
        def runner(fn):
            try:
                result = fn()
            except ConfigError:
                raise
            except Exception as exc:
                raise PipelineStageError(name, exc) from exc
            work.commit_stage()
            logger.info("stage %s done", name)
            return result

        return runner

    def ingest():
        errors: list[dict] = []
        corpus = load_corpus(
            config.corpus,
            lenient=config.lenient,
            error_report=errors,
            source_tag=config.source_tag or None,
        )
        if errors:
            write_error_report(errors, work.path("ingest_errors.jsonl"))
        return corpus

    corpus = stage("ingest")(ingest)

    def detect():
        with ThreadPoolExecutor(max_workers=config.threads) as pool:
            wn_lists = list(
                pool.map(
                    lambda n: find_within_note_duplicates(n, config.wn_min_chars),
                    corpus.notes,
                )
            )
        wn = [r for sub in wn_lists for r in sub]
        index = build_index(corpus)
        matches = find_duplicate_substrings(index, config.k)
        bn = split_matches_to_sentences(corpus, matches, config.min_sentence_chars)
        _write_duplicates_tsv(work.path("duplicates.tsv"), bn)
        return wn, bn

    wn, bn = stage("detect")(detect)

    def cluster():
        return cluster_duplicates(wn, bn, corpus)

    clusters: list[DuplicateCluster] = stage("cluster")(cluster)

    def classify():
        lexicon = _load_lexicon(config.lexicon)
        if lexicon is not None:
            classify_clusters(clusters, lexicon)
        if config.labels is not None:
            unmatched = apply_external_labels(clusters, config.labels)
            if unmatched:
                logger.warning("%d label rows matched no cluster", len(unmatched))
        write_labels(clusters, work.path("labels.tsv"))
        write_clusters(clusters, work.path("clusters.jsonl"))

    stage("classify")(classify)

    def emit_all():
        none_corpus = emit_config(corpus, clusters, DedupPolicy(config="NONE"))
        baseline_counts = count_words(none_corpus)
        per_note = [v["words"] for v in baseline_counts["per_note"].values()]
        baseline_median = float(median(per_note)) if per_note else 0.0
        reductions = {}
        for tag in config.configs:
            tag = tag.upper()
            policy = DedupPolicy(config=tag, bn_occurrence_rule=config.bn_rule)
            emitted = (
                none_corpus if tag == "NONE" else emit_config(corpus, clusters, policy)
            )
            write_corpus(emitted, work.path(f"corpus_{tag.lower()}.jsonl"))
            stats = corpus_dup_stats(
                emitted,
                clusters,
                tag,
                bn_occurrence_rule=config.bn_rule,
                baseline_median_words=baseline_median,
            )
            _write_json(work.path(f"stats_{tag.lower()}.json"), _stats_payload(stats))
            reductions[tag] = reduction_report(none_corpus, emitted)
        _write_json(work.path("reduction.json"), reductions)

    stage("emit")(emit_all)

    for path in work.finished:
        manifest["outputs"][path.name] = _sha256_file(path)
    manifest_path = root / "manifest.json"
    _write_json(manifest_path, manifest)
    return manifest


def verify_manifest(workdir: str | Path) -> list[str]:
    """Re-hash outputs against the manifest; returns names that disagree."""
    root = Path(workdir)
    manifest = json.loads((root / "manifest.json").read_text(encoding="utf-8"))
    bad = []
    for name, digest in manifest["outputs"].items():
        target = root / name
        if not target.exists() or _sha256_file(target) != digest:
            bad.append(name)
    return bad
