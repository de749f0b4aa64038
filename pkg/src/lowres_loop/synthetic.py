"""Synthetic parallel corpora with controllable difficulty.

An interlingua token stream is drawn from a Zipfian unigram distribution,
with per-genre-cluster vocabulary mixtures so different books favor
different words.  Each language renders the same stream through its own
token-renaming bijection, then applies local permutation noise (word-order
distortion) and token-merge noise (fertility), so alignment-based rankings
have a known ground truth.  Optionally a set of named entities is planted
and written out as a lexicon.
"""

from collections.abc import Sequence
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import SpecInvalid
from .kvfile import write_kv_file


@dataclass
class SyntheticCorpusSpec:
    num_languages: int
    num_books: int
    lines_per_book: int
    vocabulary_size: int
    zipf_exponent: float = 1.0
    genre_clusters: int = 1
    permutation_noise: Sequence[float] | float = 0.0  # per language or broadcast
    merge_noise: Sequence[float] | float = 0.0
    rng_seed: int = 0
    min_tokens_per_line: int = 4
    max_tokens_per_line: int = 12
    cluster_mix: float = 0.7  # weight of the cluster-specific distribution
    num_entities: int = 0
    entity_rate: float = 0.0  # chance a line carries one planted entity
    distinct_line_tokens: bool = False
    copy_of_target: tuple[int, ...] = ()  # languages replicating language 0
    split_seed: int | None = None

    def language_codes(self) -> list[str]:
        return [f"l{i:02d}" for i in range(self.num_languages)]

    def noise_for(self, values: Sequence[float] | float, index: int) -> float:
        if isinstance(values, (int, float)):
            return float(values)
        return float(values[index])

    def validate(self) -> None:
        problems = []
        for name in ("num_languages", "num_books", "lines_per_book",
                     "vocabulary_size", "min_tokens_per_line",
                     "max_tokens_per_line"):
            if getattr(self, name) < 1:
                problems.append(f"{name}: must be >= 1")
        if self.num_languages < 2:
            problems.append("num_languages: need at least 2 (target plus one source)")
        if not 1 <= self.genre_clusters:
            problems.append("genre_clusters: must be >= 1")
        if self.genre_clusters > self.num_books:
            problems.append("genre_clusters: cannot exceed num_books")
        if self.max_tokens_per_line < self.min_tokens_per_line:
            problems.append("max_tokens_per_line: smaller than min_tokens_per_line")
        if self.zipf_exponent < 0:
            problems.append("zipf_exponent: must be >= 0")
        if not 0.0 <= self.cluster_mix <= 1.0:
            problems.append("cluster_mix: must be in [0, 1]")
        if self.num_entities < 0 or not 0.0 <= self.entity_rate <= 1.0:
            problems.append("entities: num_entities >= 0 and entity_rate in [0, 1]")
        if self.distinct_line_tokens and self.max_tokens_per_line > self.vocabulary_size:
            problems.append(
                "distinct_line_tokens: max_tokens_per_line cannot exceed vocabulary_size"
            )
        for noise_name in ("permutation_noise", "merge_noise"):
            values = getattr(self, noise_name)
            if not isinstance(values, (int, float)):
                if len(values) != self.num_languages:
                    problems.append(f"{noise_name}: need one rate per language")
                    continue
                values = list(values)
            else:
                values = [values]
            if any(not 0.0 <= float(v) <= 1.0 for v in values):
                problems.append(f"{noise_name}: rates must be in [0, 1]")
        for idx in self.copy_of_target:
            if not 0 < idx < self.num_languages:
                problems.append(f"copy_of_target: bad language index {idx}")
        if problems:
            raise SpecInvalid("; ".join(problems))


def _unigram_distributions(spec: SyntheticCorpusSpec, rng) -> np.ndarray:
    """One distribution per genre cluster over the interlingua vocabulary."""
    v = spec.vocabulary_size
    ranks = np.arange(1, v + 1, dtype=np.float64)
    zipf = ranks ** (-spec.zipf_exponent)
    zipf /= zipf.sum()
    base = zipf  # token id == global frequency rank
    distributions = np.empty((spec.genre_clusters, v))
    for c in range(spec.genre_clusters):
        perm = rng.permutation(v)
        clustered = np.empty(v)
        clustered[perm] = zipf
        distributions[c] = spec.cluster_mix * clustered + (1.0 - spec.cluster_mix) * base
        distributions[c] /= distributions[c].sum()
    return distributions


def _interlingua_lines(spec: SyntheticCorpusSpec, rng) -> list[list[int]]:
    """Token-id lines; planted entities get ids >= vocabulary_size."""
    distributions = _unigram_distributions(spec, rng)
    lines: list[list[int]] = []
    for book in range(spec.num_books):
        p = distributions[book % spec.genre_clusters]
        for _ in range(spec.lines_per_book):
            length = int(rng.integers(spec.min_tokens_per_line,
                                      spec.max_tokens_per_line + 1))
            ids = rng.choice(spec.vocabulary_size, size=length,
                             replace=not spec.distinct_line_tokens, p=p)
            line = [int(t) for t in ids]
            if spec.num_entities > 0 and rng.random() < spec.entity_rate:
                entity = int(rng.integers(spec.num_entities))
                position = int(rng.integers(len(line) + 1))
                line.insert(position, spec.vocabulary_size + entity)
            lines.append(line)
    return lines


def _surfaces(spec: SyntheticCorpusSpec, code: str) -> list[str]:
    words = [f"{code}w{k:04d}" for k in range(spec.vocabulary_size)]
    entities = [f"{code}ent{e:02d}" for e in range(spec.num_entities)]
    return words + entities


def generate_synthetic(spec: SyntheticCorpusSpec, out_dir: str | Path) -> Path:
    """Write a synthetic corpus directory; returns the manifest path.

    Deterministic for a given spec: the same seed always produces the same
    bytes.  Language 0 plays the simulated target; ``copy_of_target``
    languages reuse its exact lines (a known perfect source).
    """
    spec.validate()
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    rng = np.random.default_rng(spec.rng_seed)
    interlingua = _interlingua_lines(spec, rng)
    codes = spec.language_codes()

    rendered: dict[str, list[list[str]]] = {}
    for i, code in enumerate(codes):
        if i in spec.copy_of_target:
            rendered[code] = [list(line) for line in rendered[codes[0]]]
        else:
            rendered[code] = _render_language(spec, i, code, interlingua, rng)

    entries = [("book_index", "books.tsv"),
               ("split_seed", str(spec.split_seed if spec.split_seed is not None
                                  else spec.rng_seed))]
    book_rows = []
    for b in range(spec.num_books):
        cluster = b % spec.genre_clusters
        start = b * spec.lines_per_book
        book_rows.append(f"book{b:03d}_g{cluster}\t{start}\t{start + spec.lines_per_book}")
    (out / "books.tsv").write_text("\n".join(book_rows) + "\n", encoding="utf-8")
    for code in codes:
        filename = f"text.{code}.txt"
        entries.append((code, filename))
        text = "\n".join(" ".join(line) for line in rendered[code])
        (out / filename).write_text(text + "\n", encoding="utf-8")
    if spec.num_entities > 0:
        rows = []
        for e in range(spec.num_entities):
            for i, code in enumerate(codes):
                source = codes[0] if i in spec.copy_of_target else code
                rows.append(f"{e}\t{code}\t{source}ent{e:02d}")
        (out / "lexicon.tsv").write_text("\n".join(rows) + "\n", encoding="utf-8")
    manifest = out / "manifest.txt"
    write_kv_file(manifest, entries, header="synthetic corpus manifest")
    return manifest


def _render_language(spec: SyntheticCorpusSpec, index: int, code: str,
                     interlingua: list[list[int]], rng) -> list[list[str]]:
    """Render one language: rename ids to surfaces, then apply its noise.

    Permutation swaps move ids and surfaces in lockstep so merge noise can
    still tell entities apart from ordinary words afterwards.
    """
    surfaces = _surfaces(spec, code)
    entity_floor = spec.vocabulary_size
    p_swap = spec.noise_for(spec.permutation_noise, index)
    p_merge = spec.noise_for(spec.merge_noise, index)
    rendered = []
    for line_ids in interlingua:
        ids = list(line_ids)
        if p_swap > 0.0:
            # Non-overlapping adjacent swaps: a swapped token never moves
            # again, so disorder grows monotonically with the rate.
            pos = 0
            while pos < len(ids) - 1:
                if rng.random() < p_swap:
                    ids[pos], ids[pos + 1] = ids[pos + 1], ids[pos]
                    pos += 2
                else:
                    pos += 1
        tokens = [surfaces[t] for t in ids]
        if p_merge > 0.0 and len(tokens) > 1:
            merged: list[str] = []
            pos = 0
            while pos < len(tokens):
                fusable = (
                    pos + 1 < len(tokens)
                    and ids[pos] < entity_floor and ids[pos + 1] < entity_floor
                    and rng.random() < p_merge
                )
                if fusable:
                    merged.append(tokens[pos] + "+" + tokens[pos + 1])
                    pos += 2
                else:
                    merged.append(tokens[pos])
                    pos += 1
            tokens = merged
        rendered.append(tokens)
    return rendered
