"""Rank helper languages by closeness to the translation target.

Given a seed of aligned lines, each candidate language gets two per-token
measures against the target: the probability that a token keeps its relative
position (zero distortion) and the probability that it maps to exactly one
target token (fertility one).  The `distortion` method ranks by the first,
`performance` by their product, and `linguistic` takes a hand-supplied list.
A verbatim copy of the target scores a perfect 1.0 on both.

Run:  python3 demos/02_family_ranking.py
"""

import tempfile
from pathlib import Path

from lowres_loop.backend import BackendConfig
from lowres_loop.corpus import load_corpus
from lowres_loop.family import build_family, rank_languages
from lowres_loop.report import format_family_tsv
from lowres_loop.synthetic import SyntheticCorpusSpec, generate_synthetic

spec = SyntheticCorpusSpec(
    num_languages=5,
    num_books=2,
    lines_per_book=40,
    vocabulary_size=30,
    zipf_exponent=0.7,
    permutation_noise=[0.0, 0.0, 0.0, 0.2, 0.5],
    merge_noise=[0.0, 0.0, 0.0, 0.0, 0.0],
    copy_of_target=(1,),       # l01 is a verbatim copy of l00
    distinct_line_tokens=True,
    min_tokens_per_line=4,
    max_tokens_per_line=8,
    rng_seed=5,
)

config = BackendConfig(em_iterations=10)

with tempfile.TemporaryDirectory() as tmp:
    generate_synthetic(spec, Path(tmp) / "corpus")
    corpus = load_corpus(Path(tmp) / "corpus")

    seed_lines = tuple(range(corpus.n_total))   # rank on the whole corpus
    scores = rank_languages(corpus, "l00", seed_lines, "distortion", config)

    print("distortion ranking (noisier languages fall to the bottom):")
    print(format_family_tsv(scores))

    family = build_family(corpus, "l00", seed_lines, "distortion", 3,
                          config=config)
    print(f"top-3 family: {', '.join(family.members)}")

    linguistic = build_family(corpus, "l00", seed_lines, "linguistic", 2,
                              linguistic_list=("l03", "l02"), config=config)
    print("linguistic override keeps the given order: "
          f"{', '.join(linguistic.members)}")
