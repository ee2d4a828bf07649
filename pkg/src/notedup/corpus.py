"""Corpus ingestion, validation, and JSONL persistence.

A corpus is an ordered list of notes. Ordering is canonical (patient_id,
timestamp, note_id) so that every downstream stage is deterministic under
permutation of the input file. Timestamps are treated as opaque sortable
strings; parsing date formats is deliberately out of scope.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable

KNOWN_FIELDS = ("note_id", "patient_id", "note_type", "timestamp", "text")


class CorpusError(Exception):
    """Base class for corpus-level failures."""


class NoteValidationError(CorpusError):
    """A raw record is not a valid note."""

    def __init__(self, problems: list[str]):
        self.problems = problems
        super().__init__("; ".join(problems))


class DuplicateNoteIdError(CorpusError):
    """The same note_id appears more than once in a corpus."""

    def __init__(self, note_ids: list[str]):
        self.note_ids = note_ids
        super().__init__(f"duplicate note_id values: {', '.join(sorted(note_ids))}")


class CorpusFormatError(CorpusError):
    """A line in a JSONL corpus file could not be parsed or validated."""

    def __init__(self, line_no: int, reason: str):
        self.line_no = line_no
        self.reason = reason
        super().__init__(f"line {line_no}: {reason}")


@dataclass(frozen=True)
class Note:
    """One clinical-style document.

    `extras` holds unknown JSON fields so that round-tripping a corpus
    preserves metadata this toolkit does not interpret.
    """

    note_id: str
    patient_id: str
    text: str
    note_type: str | None = None
    timestamp: str | None = None
    extras: dict = field(default_factory=dict)

    def sort_key(self) -> tuple[str, str, str]:
        return (self.patient_id, self.timestamp or "", self.note_id)


@dataclass
class Corpus:
    """An ordered collection of notes plus provenance tags."""

    notes: list[Note]
    source_tag: str = ""
    config_tag: str = "NONE"

    def __post_init__(self) -> None:
        self.notes = sorted(self.notes, key=Note.sort_key)

    def __len__(self) -> int:
        return len(self.notes)

    def __iter__(self):
        return iter(self.notes)

    def note_by_id(self) -> dict[str, Note]:
        return {n.note_id: n for n in self.notes}


def validate_note(record: dict) -> Note:
    """Validate a raw JSON object and return a Note.

    Missing/invalid required fields raise NoteValidationError listing every
    problem at once. Unknown fields are preserved in Note.extras.
    """
    if not isinstance(record, dict):
        raise NoteValidationError(["record is not a JSON object"])
    problems = []
    missing = [f for f in ("note_id", "patient_id", "text") if f not in record]
    if missing:
        problems.append("missing " + ", ".join(missing))
    for name in ("note_id", "patient_id", "text"):
        value = record.get(name)
        if name in record and not isinstance(value, str):
            problems.append(f"{name} is not a string")
    text = record.get("text")
    if isinstance(text, str) and not text.strip():
        problems.append("text is empty")
    patient_id = record.get("patient_id")
    if isinstance(patient_id, str) and not patient_id:
        problems.append("patient_id is empty")
    for name in ("note_type", "timestamp"):
        value = record.get(name)
        if value is not None and not isinstance(value, str):
            problems.append(f"{name} is neither a string nor null")
    if problems:
        raise NoteValidationError(problems)
    extras = {k: v for k, v in record.items() if k not in KNOWN_FIELDS}
    return Note(
        note_id=record["note_id"],
        patient_id=record["patient_id"],
        text=record["text"],
        note_type=record.get("note_type"),
        timestamp=record.get("timestamp"),
        extras=extras,
    )


def load_corpus(
    path: str | Path,
    lenient: bool = False,
    error_report: list | None = None,
    source_tag: str | None = None,
    config_tag: str = "NONE",
) -> Corpus:
    """Load a JSONL corpus file into canonical order.

    When `lenient` is true, malformed lines are recorded as
    {"line_no", "reason"} dicts in `error_report` (if given) and skipped;
    otherwise the first malformed line is fatal. Duplicate note_id values
    are always fatal.
    """
    path = Path(path)
    notes: list[Note] = []
    seen: dict[str, int] = {}
    dup_ids: set[str] = set()
    with path.open("r", encoding="utf-8") as handle:
        for line_no, line in enumerate(handle, start=1):
            if not line.strip():
                continue
            try:
                record = json.loads(line)
                note = validate_note(record)
            except (json.JSONDecodeError, NoteValidationError) as exc:
                if not lenient:
                    raise CorpusFormatError(line_no, str(exc)) from exc
                if error_report is not None:
                    error_report.append({"line_no": line_no, "reason": str(exc)})
                continue
            if note.note_id in seen:
                dup_ids.add(note.note_id)
            seen[note.note_id] = line_no
            notes.append(note)
    if dup_ids:
        raise DuplicateNoteIdError(sorted(dup_ids))
    tag = source_tag if source_tag is not None else path.stem
    return Corpus(notes=notes, source_tag=tag, config_tag=config_tag)


def note_to_record(note: Note) -> dict:
    """Serialize a note with fixed key order (extras last, sorted)."""
    record = {
        "note_id": note.note_id,
        "patient_id": note.patient_id,
        "note_type": note.note_type,
        "timestamp": note.timestamp,
        "text": note.text,
    }
    for key in sorted(note.extras):
        record[key] = note.extras[key]
    return record


def write_corpus(corpus: Corpus, path: str | Path) -> None:
    """Write one JSON object per line, canonical note order, fixed key order.

    Idempotent: writing the same corpus twice produces identical bytes.
    """
    path = Path(path)
    with path.open("w", encoding="utf-8") as handle:
        for note in corpus.notes:
            handle.write(json.dumps(note_to_record(note), ensure_ascii=False))
            handle.write("\n")


def write_error_report(errors: Iterable[dict], path: str | Path) -> None:
    with Path(path).open("w", encoding="utf-8") as handle:
        for entry in errors:
            handle.write(json.dumps(entry, ensure_ascii=False))
            handle.write("\n")
