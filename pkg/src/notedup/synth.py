"""Synthetic note corpora with planted, ground-truthed duplication.

The generator plants three duplicate kinds: within-note repeats, same-patient
copy-forward blocks, and cross-patient boilerplate blocks built from the
shipped lexicon phrases (so the rule classifier flags them NOT_RELEVANT),
plus clinically-flavored shared blocks that must stay RELEVANT. Filler
sentences carry a serial token, which makes accidental long matches across
notes vanishingly unlikely. A sidecar records every planted duplicate.
"""

from __future__ import annotations

import random
import string
from dataclasses import asdict, dataclass

from .corpus import Corpus, Note
from .relevance import default_lexicon

RELEVANT_TEMPLATES = [
    "Blood pressure {a}/{b} with heart rate {c} this morning.",
    "Creatinine increased from 1.{a2} to 2.{b2} over the last day.",
    "Chest film shows a small left effusion unchanged from prior.",
    "Started lisinopril {d}mg daily for blood pressure control.",
    "Potassium repleted with {e} meq and recheck pending.",
    "Remains on pressure support with saturations above {f} percent.",
]


@dataclass(frozen=True)
class SynthSpec:
    n_patients: int = 10
    notes_per_patient: int = 5
    sentences_per_note: tuple[int, int] = (8, 16)
    words_per_sentence: tuple[int, int] = (6, 12)
    wn_dup_rate: float = 0.2
    copy_forward_rate: float = 0.3
    boilerplate_rate: float = 0.25
    relevant_shared_rate: float = 0.1
    n_boilerplate_blocks: int = 3
    n_relevant_blocks: int = 2
    min_block_chars: int = 120
    vocab_size: int = 4000


def _make_vocab(rng: random.Random, size: int) -> list[str]:
    return [
        "".join(rng.choices(string.ascii_lowercase, k=rng.randint(4, 9)))
        for _ in range(size)
    ]


def _boilerplate_blocks(spec: SynthSpec, rng: random.Random) -> list[list[str]]:
    phrases = [p.replace("*", "the") for p in default_lexicon().phrases()]
    rng.shuffle(phrases)
    blocks = []
    cursor = 0
    for _ in range(spec.n_boilerplate_blocks):
        block: list[str] = []
        while sum(len(s) + 1 for s in block) < spec.min_block_chars:
            phrase = phrases[cursor % len(phrases)]
            cursor += 1
            block.append(phrase[0].upper() + phrase[1:] + ".")
        blocks.append(block)
    return blocks


def _relevant_blocks(spec: SynthSpec, rng: random.Random) -> list[list[str]]:
    blocks = []
    for _ in range(spec.n_relevant_blocks):
        block: list[str] = []
        while sum(len(s) + 1 for s in block) < spec.min_block_chars:
            template = rng.choice(RELEVANT_TEMPLATES)
            block.append(
                template.format(
                    a=rng.randint(95, 180),
                    b=rng.randint(50, 95),
                    c=rng.randint(55, 120),
                    a2=rng.randint(0, 9),
                    b2=rng.randint(0, 9),
                    d=rng.choice([5, 10, 20, 40]),
                    e=rng.choice([20, 40, 60]),
                    f=rng.randint(88, 99),
                )
            )
        blocks.append(block)
    return blocks


def generate_synthetic_corpus(
    spec: SynthSpec, seed: int = 0
) -> tuple[Corpus, dict]:
    """Build a corpus plus a sidecar listing every planted duplicate.

    Sidecar entries: {"kind": wn|copy_forward|boilerplate|relevant_shared,
    "sentences": [...], "notes": [...], "patients": [...],
    "expected_relevance": RELEVANT|NOT_RELEVANT|None}.
    """
    rng = random.Random(seed)
    vocab = _make_vocab(rng, spec.vocab_size)
    boiler = _boilerplate_blocks(spec, rng)
    relevant = _relevant_blocks(spec, rng)
    boiler_uses: dict[int, list[Note]] = {i: [] for i in range(len(boiler))}
    relevant_uses: dict[int, list[Note]] = {i: [] for i in range(len(relevant))}
    planted: list[dict] = []
    serial = 0
    notes: list[Note] = []
    note_types = ["progress", "nursing", "discharge"]

    def filler_sentence() -> str:
        nonlocal serial
        words = rng.choices(vocab, k=rng.randint(*spec.words_per_sentence))
        words.insert(rng.randint(1, len(words)), f"u{serial}q")
        serial += 1
        return words[0][0].upper() + " ".join(words)[1:] + "."

    for p in range(spec.n_patients):
        patient_id = f"p{p:04d}"
        prev_filler: list[str] = []
        for j in range(spec.notes_per_patient):
            note_id = f"{patient_id}-n{j:03d}"
            filler = [
                filler_sentence() for _ in range(rng.randint(*spec.sentences_per_note))
            ]
            # planted blocks go before or after the filler, never inside it,
            # so copy-forward source runs stay contiguous in the final text
            head: list[str] = []
            tail: list[str] = []

            def plant(block_text: str) -> None:
                (head if rng.random() < 0.5 else tail).append(block_text)

            if filler and rng.random() < spec.wn_dup_rate:
                target = rng.choice(filler)
                plant(target)
                planted.append(
                    {
                        "kind": "wn",
                        "sentences": [target],
                        "notes": [note_id],
                        "patients": [patient_id],
                        "expected_relevance": None,
                    }
                )
            if prev_filler and rng.random() < spec.copy_forward_rate:
                start = rng.randint(0, len(prev_filler) - 1)
                end = start
                size = 0
                while end < len(prev_filler) and size < spec.min_block_chars:
                    size += len(prev_filler[end]) + 1
                    end += 1
                while size < spec.min_block_chars and start > 0:
                    start -= 1
                    size += len(prev_filler[start]) + 1
                run = prev_filler[start:end]
                plant(" ".join(run))
                planted.append(
                    {
                        "kind": "copy_forward",
                        "sentences": run,
                        "notes": [f"{patient_id}-n{j - 1:03d}", note_id],
                        "patients": [patient_id],
                        "expected_relevance": "RELEVANT",
                    }
                )
            if boiler and rng.random() < spec.boilerplate_rate:
                idx = rng.randrange(len(boiler))
                plant(" ".join(boiler[idx]))
                boiler_uses[idx].append(note_id)
            if relevant and rng.random() < spec.relevant_shared_rate:
                idx = rng.randrange(len(relevant))
                plant(" ".join(relevant[idx]))
                relevant_uses[idx].append(note_id)
            notes.append(
                Note(
                    note_id=note_id,
                    patient_id=patient_id,
                    text=" ".join(head + filler + tail),
                    note_type=rng.choice(note_types),
                    timestamp=f"2020-01-01T{8 + j:02d}:00:00",
                )
            )
            prev_filler = filler

    patient_of = {n.note_id: n.patient_id for n in notes}
    for idx, users in boiler_uses.items():
        if users:
            planted.append(
                {
                    "kind": "boilerplate",
                    "sentences": boiler[idx],
                    "notes": sorted(users),
                    "patients": sorted({patient_of[u] for u in users}),
                    "expected_relevance": "NOT_RELEVANT",
                }
            )
    for idx, users in relevant_uses.items():
        if users:
            planted.append(
                {
                    "kind": "relevant_shared",
                    "sentences": relevant[idx],
                    "notes": sorted(users),
                    "patients": sorted({patient_of[u] for u in users}),
                    "expected_relevance": "RELEVANT",
                }
            )
    corpus = Corpus(notes=notes, source_tag=f"synth-{seed}")
    sidecar = {"seed": seed, "spec": asdict(spec), "planted": planted}
    return corpus, sidecar


def benchmark_spec(target_chars: int) -> SynthSpec:
    """Spec whose generated corpus lands near `target_chars` characters."""
    chars_per_note = 1120  # filler sentences plus planted blocks, measured
    notes = max(4, target_chars // chars_per_note)
    notes_per_patient = 8
    return SynthSpec(
        n_patients=max(2, notes // notes_per_patient),
        notes_per_patient=notes_per_patient,
        sentences_per_note=(10, 14),
        words_per_sentence=(8, 10),
        wn_dup_rate=0.1,
        copy_forward_rate=0.3,
        boilerplate_rate=0.3,
        relevant_shared_rate=0.1,
        n_boilerplate_blocks=20,
        n_relevant_blocks=10,
        min_block_chars=250,
    )
