#!/usr/bin/env python3
"""End-to-end demo on a synthetic corpus.

Generates a corpus with planted duplication, runs the full pipeline into a
working directory, then trains the reference n-gram model on each emitted
configuration and reports perplexity and information content.
"""

import argparse
import json
from pathlib import Path

from notedup.corpus import load_corpus, write_corpus
from notedup.ngram import information_content, perplexity, train_ngram
from notedup.pipeline import PipelineConfig, run_pipeline
from notedup.synth import SynthSpec, generate_synthetic_corpus


def main() -> None:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--workdir", default="demo_work")
    parser.add_argument("--seed", type=int, default=0)
    parser.add_argument("--n-patients", type=int, default=25)
    parser.add_argument("--notes-per-patient", type=int, default=8)
    parser.add_argument("--k", type=int, default=100)
    args = parser.parse_args()

    workdir = Path(args.workdir)
    workdir.mkdir(parents=True, exist_ok=True)
    spec = SynthSpec(
        n_patients=args.n_patients,
        notes_per_patient=args.notes_per_patient,
        wn_dup_rate=0.3,
        copy_forward_rate=0.5,
        boilerplate_rate=0.4,
        relevant_shared_rate=0.2,
        min_block_chars=max(140, args.k + 40),
    )
    corpus, sidecar = generate_synthetic_corpus(spec, seed=args.seed)
    corpus_path = workdir / "synthetic.jsonl"
    write_corpus(corpus, corpus_path)
    (workdir / "sidecar.json").write_text(
        json.dumps(sidecar, indent=2, sort_keys=True), encoding="utf-8"
    )
    print(f"generated {len(corpus)} notes with {len(sidecar['planted'])} planted duplicates")

    manifest = run_pipeline(
        PipelineConfig(
            corpus=str(corpus_path),
            workdir=str(workdir / "pipeline"),
            lexicon="default",
            k=args.k,
            seed=args.seed,
        )
    )
    reduction = json.loads((workdir / "pipeline" / "reduction.json").read_text())
    print(f"\n{'config':>6} {'words':>9} {'decrease':>9} {'ppl':>8} {'bits':>6}")
    for tag in ("NONE", "WN", "WNNR", "WNBN"):
        emitted = load_corpus(workdir / "pipeline" / f"corpus_{tag.lower()}.jsonl")
        half = len(emitted.notes) // 2
        from notedup.corpus import Corpus

        train = Corpus(notes=emitted.notes[:half])
        heldout = Corpus(notes=emitted.notes[half:])
        model = train_ngram(train, order=3, k_smooth=0.1)
        result = perplexity(model, heldout, mode="last_token")
        print(
            f"{tag:>6} {reduction[tag]['words_after']:>9,} "
            f"{reduction[tag]['pct_decrease']:>8.2f}% "
            f"{result.ppl:>8.2f} {information_content(result.ppl):>6.2f}"
        )
    print(f"\noutputs under {workdir / 'pipeline'} ({len(manifest['outputs'])} files)")


if __name__ == "__main__":
    main()
