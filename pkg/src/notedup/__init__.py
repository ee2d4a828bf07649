"""Deduplication toolkit for clinical-style note corpora.

Detects within-note and between-note duplicated sentences with a suffix-array
index, labels between-note duplicates for clinical relevance, materializes the
four deduplication configurations (NONE/WN/WNNR/WNBN), and quantifies corpus
redundancy via n-gram perplexity and information content.
"""

__version__ = "0.1.0"

FORMAT_VERSION = "1"

from .corpus import Corpus, Note, load_corpus, validate_note, write_corpus
from .preprocess import (
    SentenceRecord,
    Token,
    count_words,
    normalize_text,
    split_sentences,
    tokenize,
)
from .exact_match import (
    MatchSpan,
    SuffixIndex,
    build_index,
    find_duplicate_substrings,
    split_matches_to_sentences,
)
from .analysis import (
    DuplicateCluster,
    DupStats,
    cluster_duplicates,
    copy_forward_stats,
    corpus_dup_stats,
    find_within_note_duplicates,
)
from .relevance import (
    RelevanceLabel,
    TopicLexicon,
    apply_external_labels,
    bootstrap_sample,
    classify_sentence,
    evaluate_classifier,
)
from .emit import DedupPolicy, emit_config, reduction_report
from .ngram import (
    NgramModel,
    PplResult,
    information_content,
    perplexity,
    relative_ppl,
    train_ngram,
)
from .synth import SynthSpec, generate_synthetic_corpus

__all__ = [
    "Corpus",
    "Note",
    "load_corpus",
    "write_corpus",
    "validate_note",
    "SentenceRecord",
    "Token",
    "normalize_text",
    "split_sentences",
    "tokenize",
    "count_words",
    "SuffixIndex",
    "MatchSpan",
    "build_index",
    "find_duplicate_substrings",
    "split_matches_to_sentences",
    "DuplicateCluster",
    "DupStats",
    "find_within_note_duplicates",
    "cluster_duplicates",
    "copy_forward_stats",
    "corpus_dup_stats",
    "RelevanceLabel",
    "TopicLexicon",
    "classify_sentence",
    "apply_external_labels",
    "bootstrap_sample",
    "evaluate_classifier",
    "DedupPolicy",
    "emit_config",
    "reduction_report",
    "NgramModel",
    "PplResult",
    "train_ngram",
    "perplexity",
    "relative_ppl",
    "information_content",
    "SynthSpec",
    "generate_synthetic_corpus",
]
