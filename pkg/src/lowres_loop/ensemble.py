"""Multi-source combination by centeredness.

Each sentence has one hypothesis per family member; the combiner keeps the
hypothesis with the greatest total similarity to the whole set (row sum of
the pairwise similarity matrix).  Similarity is a symmetrized add-one
smoothed sentence BLEU, but any kernel with the same signature can be
plugged in.
"""

from collections import Counter
from collections.abc import Callable, Sequence
from dataclasses import dataclass

from .bleu import sentence_bleu_smoothed
from .errors import EmptyHypothesisSet, IndexGap

Kernel = Callable[[Sequence[str], Sequence[str]], float]


@dataclass(frozen=True)
class Hypothesis:
    language: str
    tokens: tuple[str, ...]


@dataclass(frozen=True)
class HypothesisSet:
    sentence_index: int
    hypotheses: tuple[Hypothesis, ...]


@dataclass(frozen=True)
class CombineResult:
    language: str
    tokens: tuple[str, ...]
    scores: tuple[float, ...]  # centeredness per hypothesis, input order


def similarity(a: Sequence[str], b: Sequence[str]) -> float:
    """Symmetric sentence similarity in [0, 1].

    Mean of the two smoothed sentence-BLEU directions; 1.0 when both sides
    are empty, 0.0 when exactly one is.
    """
    if not a and not b:
        return 1.0
    if not a or not b:
        return 0.0
    return 0.5 * (sentence_bleu_smoothed(a, b) + sentence_bleu_smoothed(b, a))


def similarity_matrix(hypothesis_set: HypothesisSet,
                      kernel: Kernel = similarity) -> list[list[float]]:
    """Symmetric pairwise matrix with unit diagonal."""
    hyps = hypothesis_set.hypotheses
    n = len(hyps)
    matrix = [[1.0] * n for _ in range(n)]
    for i in range(n):
        for j in range(i + 1, n):
            value = kernel(hyps[i].tokens, hyps[j].tokens)
            matrix[i][j] = value
            matrix[j][i] = value
    return matrix


def centered_combine(hypothesis_set: HypothesisSet,
                     kernel: Kernel = similarity) -> CombineResult:
    """Pick the most central hypothesis: argmax_i sum_j S_ij.

    Ties break toward the earliest hypothesis (family order).  An empty
    hypothesis can only win when every hypothesis is empty.
    """
    hyps = hypothesis_set.hypotheses
    if not hyps:
        raise EmptyHypothesisSet(f"sentence {hypothesis_set.sentence_index}")
    matrix = similarity_matrix(hypothesis_set, kernel)
    scores = tuple(sum(row) for row in matrix)
    eligible = [i for i, hyp in enumerate(hyps) if hyp.tokens]
    if not eligible:
        eligible = list(range(len(hyps)))
    best = eligible[0]
    for i in eligible[1:]:
        if scores[i] > scores[best]:
            best = i
    return CombineResult(hyps[best].language, hyps[best].tokens, scores)


def combine_document(hypothesis_sets: Sequence[HypothesisSet],
                     kernel: Kernel = similarity,
                     ) -> tuple[list[tuple[str, ...]], dict[str, int]]:
    """Combine every sentence; also report wins per source language.

    The sets must cover a contiguous ascending index range.
    """
    if not hypothesis_sets:
        return [], {}
    start = hypothesis_sets[0].sentence_index
    for offset, hyp_set in enumerate(hypothesis_sets):
        if hyp_set.sentence_index != start + offset:
            raise IndexGap(
                f"expected sentence {start + offset}, got {hyp_set.sentence_index}"
            )
    combined: list[tuple[str, ...]] = []
    wins: Counter[str] = Counter()
    for hyp_set in hypothesis_sets:
        result = centered_combine(hyp_set, kernel)
        combined.append(result.tokens)
        wins[result.language] += 1
    return combined, dict(sorted(wins.items()))
