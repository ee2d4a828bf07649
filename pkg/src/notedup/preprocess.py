"""Text normalization, sentence segmentation, and word-level tokenization.

The rules here are deterministic replacements for the model-based pipeline
commonly used on scientific text: dates and timestamps become [DATE]/[TIME]
placeholders, sentences end at sentence-final punctuation or list-item
boundaries, and tokens are whitespace-delimited words with internal
punctuation (dosages, lab values, dotted abbreviations) kept intact.

Every function is pure; the whole module is safe for parallel per-note use.
"""

from __future__ import annotations

import re
import unicodedata
from dataclasses import dataclass
from functools import lru_cache
from pathlib import Path

_DATA_DIR = Path(__file__).parent / "data"

_MONTHS = (
    "jan(?:uary)?|feb(?:ruary)?|mar(?:ch)?|apr(?:il)?|may|jun(?:e)?|jul(?:y)?"
    "|aug(?:ust)?|sep(?:t(?:ember)?)?|oct(?:ober)?|nov(?:ember)?|dec(?:ember)?"
)

# The active pattern set, printable via the CLI --dump-patterns flag.
PATTERNS: list[tuple[str, str, str]] = [
    (
        "date_month_name",
        rf"\b(?:{_MONTHS})\.?\s+\d{{1,2}}(?:st|nd|rd|th)?,?\s+\d{{4}}\b",
        "[DATE]",
    ),
    ("date_slashed", r"(?<![\d/])\b\d{1,2}/\d{1,2}/\d{2,4}\b(?!/)", "[DATE]"),
    ("date_iso", r"(?<!\d)\d{4}-\d{2}-\d{2}(?![\d-])", "[DATE]"),
    (
        "time_clock",
        r"\b\d{1,2}:[0-5]\d(?::[0-5]\d)?(?:\s?(?:[ap]\.m\.|[ap]m\b))?(?!\d)",
        "[TIME]",
    ),
    ("time_military", r"\b(?:[01]\d|2[0-3])[0-5]\d\s+hours\b", "[TIME]"),
]

_COMPILED_PATTERNS = [
    (name, re.compile(pattern, re.IGNORECASE), repl) for name, pattern, repl in PATTERNS
]

# C0/C1 control characters: \r\n and \r become \n (handled before translate),
# tab-like separators become spaces so word boundaries survive, the rest drop.
_CTRL_TABLE: dict[int, str | None] = {}
for _cp in list(range(0x00, 0x20)) + [0x7F] + list(range(0x80, 0xA0)):
    if _cp == 0x0A:
        continue
    _CTRL_TABLE[_cp] = " " if _cp in (0x09, 0x0B, 0x0C) else None


def normalize_text(raw: str) -> str:
    """Normalize raw note text. Total and idempotent.

    Applies Unicode NFC, drops control characters (newline survives; tab,
    vertical tab, and form feed become spaces to preserve word boundaries),
    and replaces date/time patterns with [DATE]/[TIME].
    """
    text = unicodedata.normalize("NFC", raw)
    text = text.replace("\r\n", "\n").replace("\r", "\n")
    text = text.translate(_CTRL_TABLE)
    for _, pattern, repl in _COMPILED_PATTERNS:
        text = pattern.sub(repl, text)
    return text


def dump_patterns() -> str:
    """Human-readable listing of the active normalization patterns."""
    lines = [f"{name}: {pattern} -> {repl}" for name, pattern, repl in PATTERNS]
    return "\n".join(lines)


@lru_cache(maxsize=None)
def _default_abbreviations() -> frozenset[str]:
    return load_abbreviations(_DATA_DIR / "abbreviations.txt")


def load_abbreviations(path: str | Path) -> frozenset[str]:
    """Load a sentence-boundary suppression list: one abbreviation per line,
    '#' starts a comment. Entries are lowercased and must end with '.'."""
    entries = set()
    for line in Path(path).read_text(encoding="utf-8").splitlines():
        entry = line.split("#", 1)[0].strip().lower()
        if entry:
            entries.add(entry if entry.endswith(".") else entry + ".")
    return frozenset(entries)


@dataclass(frozen=True)
class SentenceRecord:
    """A sentence occurrence: its span in the note's normalized text plus the
    whitespace-collapsed sentence string used for identity everywhere else."""

    note_id: str
    index_in_note: int
    char_span: tuple[int, int]
    normalized: str
    is_first: bool | None = None


@dataclass(frozen=True)
class Token:
    text: str
    is_special: bool = False


_LIST_MARKER_RE = re.compile(r"(?:[-*•]|\d{1,3}[.)])(?:[ \t]+|(?=\n)|$)")
_WS_RUN_RE = re.compile(r"\s+")

_SENT_FINAL = ".!?;"


def _collapse(text: str) -> str:
    return _WS_RUN_RE.sub(" ", text).strip()


def _at_line_start(text: str, pos: int) -> bool:
    i = pos - 1
    while i >= 0 and text[i] in " \t":
        i -= 1
    return i < 0 or text[i] == "\n"


def _next_line_cuts(text: str, pos: int, in_list_item: bool) -> bool:
    """Decide whether the newline at `pos` ends the current sentence."""
    if in_list_item:
        return True
    j = pos + 1
    n = len(text)
    while j < n and text[j] in " \t":
        j += 1
    if j < n and text[j] == "\n":  # blank line = paragraph break
        return True
    return bool(_LIST_MARKER_RE.match(text, j))


def _abbrev_before(text: str, dot: int, sent_start: int, abbrevs: frozenset[str]) -> bool:
    i = dot
    while i > sent_start and not text[i - 1].isspace():
        i -= 1
    token = text[i : dot + 1].lower().lstrip("([{\"'")
    return token in abbrevs


def split_sentences(
    text: str,
    note_id: str = "",
    abbreviations: frozenset[str] | None = None,
) -> list[SentenceRecord]:
    """Segment normalized text into sentences.

    A sentence ends at sentence-final punctuation (. ! ? ;) followed by
    whitespace or end of text, at a blank line, or where a list item starts
    or ends: a line opening with "-", "*", or an "N." / "N)" enumerator is
    its own sentence, closed by the next newline. Periods that terminate a
    known abbreviation do not end a sentence. Spans are trimmed to the
    non-whitespace extent, so spans tile the input up to whitespace gaps.
    """
    if abbreviations is None:
        abbreviations = _default_abbreviations()
    records: list[SentenceRecord] = []
    n = len(text)
    i = 0
    start: int | None = None
    last_solid = -1
    in_list_item = False

    def flush() -> None:
        nonlocal start, last_solid, in_list_item
        if start is not None and last_solid >= start:
            span = (start, last_solid + 1)
            records.append(
                SentenceRecord(
                    note_id=note_id,
                    index_in_note=len(records),
                    char_span=span,
                    normalized=_collapse(text[span[0] : span[1]]),
                )
            )
        start = None
        last_solid = -1
        in_list_item = False

    while i < n:
        ch = text[i]
        if start is None:
            if ch.isspace():
                i += 1
                continue
            start = i
            last_solid = i
            in_list_item = False
            if _at_line_start(text, i):
                marker = _LIST_MARKER_RE.match(text, i)
                if marker:
                    in_list_item = True
                    solid = text[i : marker.end()].rstrip()
                    last_solid = i + len(solid) - 1
                    i = marker.end()
                    continue
        if not ch.isspace():
            last_solid = i
        if ch == "\n":
            if _next_line_cuts(text, i, in_list_item):
                flush()
            i += 1
            continue
        if ch in _SENT_FINAL and (i + 1 >= n or text[i + 1].isspace()):
            if not (ch == "." and _abbrev_before(text, i, start, abbreviations)):
                flush()
        i += 1
    flush()
    return records


_SPECIAL_TOKEN_RE = re.compile(r"\[[^\[\]]+\]")
_WORD_RE = re.compile(r"\w+(?:[./:,'\-+&]\w+)*", re.UNICODE)


def tokenize(
    sentence: str, abbreviations: frozenset[str] | None = None
) -> list[Token]:
    """Split a sentence into word-level tokens.

    Whitespace delimits tokens; bracketed placeholders like [DATE] come out
    as single special tokens; alphanumeric runs with internal punctuation
    ("5mg", "7.5", "120/80", "q.d.") stay whole; remaining punctuation is
    emitted one character per token. Re-tokenizing " ".join(tokens) is a
    fixpoint.
    """
    if abbreviations is None:
        abbreviations = _default_abbreviations()
    tokens: list[Token] = []
    for chunk in sentence.split():
        i = 0
        while i < len(chunk):
            special = _SPECIAL_TOKEN_RE.match(chunk, i)
            if special:
                tokens.append(Token(special.group(), is_special=True))
                i = special.end()
                continue
            word = _WORD_RE.match(chunk, i)
            if word:
                end = word.end()
                value = word.group()
                if (
                    end < len(chunk)
                    and chunk[end] == "."
                    and (value + ".").lower() in abbreviations
                ):
                    value += "."
                    end += 1
                tokens.append(Token(value))
                i = end
                continue
            tokens.append(Token(chunk[i]))
            i += 1
    return tokens


def is_word_token(token: Token) -> bool:
    """Countable word: any special placeholder, or any token containing a
    word character. Standalone punctuation does not count."""
    return token.is_special or any(ch.isalnum() or ch == "_" for ch in token.text)


def note_tokens(text: str) -> list[Token]:
    """Tokens of a note's normalized text, sentence by sentence."""
    tokens: list[Token] = []
    for record in split_sentences(text):
        tokens.extend(tokenize(record.normalized))
    return tokens


def count_words(corpus) -> dict:
    """Word and sentence counts over a corpus (on normalized text).

    Word count includes special placeholders and excludes standalone
    punctuation tokens. Returns totals plus a per-note map.
    """
    per_note: dict[str, dict[str, int]] = {}
    total_words = 0
    total_sentences = 0
    for note in corpus.notes:
        text = normalize_text(note.text)
        sentences = split_sentences(text, note_id=note.note_id)
        words = 0
        for record in sentences:
            words += sum(1 for tok in tokenize(record.normalized) if is_word_token(tok))
        per_note[note.note_id] = {"words": words, "sentences": len(sentences)}
        total_words += words
        total_sentences += len(sentences)
    return {
        "total_words": total_words,
        "total_sentences": total_sentences,
        "per_note": per_note,
    }
