"""Corpus-level and sentence-level BLEU.

``corpus_bleu`` is the classic unsmoothed BLEU-4: clipped n-gram matches are
pooled over the whole corpus before taking precisions, the score is the
geometric mean of p_1..p_4 times a brevity penalty, and any zero precision
zeroes the score.  ``sentence_bleu_smoothed`` add-one smooths each precision
so it stays usable as a similarity kernel between single sentences.
"""

import math
from collections import Counter
from collections.abc import Sequence
from dataclasses import dataclass

from .errors import EmptyEvaluationSet, LengthMismatch, MisalignedDraft

MAX_ORDER = 4

TokenSeq = Sequence[str]


@dataclass(frozen=True)
class BleuReport:
    score: float  # 0..100
    precisions: tuple[float, float, float, float]
    brevity_penalty: float
    hyp_length: int
    ref_length: int


def _ngram_counts(tokens: TokenSeq, order: int) -> Counter:
    return Counter(
        tuple(tokens[i:i + order]) for i in range(len(tokens) - order + 1)
    )


def corpus_bleu(hypotheses: Sequence[TokenSeq],
                references: Sequence[TokenSeq]) -> BleuReport:
    """BLEU-4 of a hypothesis corpus against a single reference corpus.

    Counts are pooled across sentences before computing precisions.  With an
    empty hypothesis corpus length the brevity penalty is reported as 0.0 and
    the score is 0.0.
    """
    if len(hypotheses) != len(references):
        raise LengthMismatch(
            f"{len(hypotheses)} hypotheses vs {len(references)} references"
        )
    if not references or all(len(ref) == 0 for ref in references):
        raise EmptyEvaluationSet("need at least one nonempty reference")

    matched = [0] * MAX_ORDER
    total = [0] * MAX_ORDER
    hyp_length = 0
    ref_length = 0
    for hyp, ref in zip(hypotheses, references):
        hyp_length += len(hyp)
        ref_length += len(ref)
        for n in range(1, MAX_ORDER + 1):
            hyp_counts = _ngram_counts(hyp, n)
            if not hyp_counts:
                continue
            ref_counts = _ngram_counts(ref, n)
            total[n - 1] += max(len(hyp) - n + 1, 0)
            for gram, count in hyp_counts.items():
                matched[n - 1] += min(count, ref_counts.get(gram, 0))

    precisions = tuple(
        (matched[i] / total[i]) if total[i] > 0 else 0.0
        for i in range(MAX_ORDER)
    )
    if hyp_length == 0:
        return BleuReport(0.0, precisions, 0.0, hyp_length, ref_length)

    if hyp_length >= ref_length:
        brevity_penalty = 1.0
    else:
        brevity_penalty = math.exp(1.0 - ref_length / hyp_length)

    if any(p == 0.0 for p in precisions):
        score = 0.0
    else:
        log_mean = math.fsum(math.log(p) for p in precisions) / MAX_ORDER
        score = 100.0 * brevity_penalty * math.exp(log_mean)
    return BleuReport(score, precisions, brevity_penalty, hyp_length, ref_length)


def sentence_bleu_smoothed(hypothesis: TokenSeq, reference: TokenSeq) -> float:
    """Add-one smoothed sentence BLEU in [0, 1].

    Each precision becomes (matched + 1) / (total + 1), which also covers
    orders longer than the sentence.  Two empty sequences score 1.0; an empty
    sequence against a nonempty one scores 0.0.
    """
    if not hypothesis and not reference:
        return 1.0
    if not hypothesis or not reference:
        return 0.0

    log_sum = 0.0
    for n in range(1, MAX_ORDER + 1):
        hyp_counts = _ngram_counts(hypothesis, n)
        ref_counts = _ngram_counts(reference, n)
        total = max(len(hypothesis) - n + 1, 0)
        matched = sum(
            min(count, ref_counts.get(gram, 0))
            for gram, count in hyp_counts.items()
        )
        log_sum += math.log((matched + 1) / (total + 1))

    if len(hypothesis) >= len(reference):
        brevity_penalty = 1.0
    else:
        brevity_penalty = math.exp(1.0 - len(reference) / len(hypothesis))
    return brevity_penalty * math.exp(log_sum / MAX_ORDER)


def per_book_bleu(corpus, draft: Sequence[TokenSeq], reference_language: str,
                  excluded_lines: set[int] | frozenset[int] = frozenset(),
                  ) -> list[tuple[str, BleuReport, int]]:
    """Per-book BLEU of a full-text draft against one reference language.

    Lines in ``excluded_lines`` are left out of every book's evaluation.
    Books with no evaluable line left (all excluded, or only empty
    references) are omitted from the result.
    """
    if len(draft) != corpus.n_total:
        raise MisalignedDraft(
            f"draft has {len(draft)} lines, corpus has {corpus.n_total}"
        )
    references = corpus.lines[reference_language]
    result = []
    for book in corpus.book_index.books:
        indices = [
            i for i in range(book.start, book.end) if i not in excluded_lines
        ]
        if not indices or all(len(references[i]) == 0 for i in indices):
            continue
        report = corpus_bleu(
            [draft[i] for i in indices], [references[i] for i in indices]
        )
        result.append((book.name, report, len(indices)))
    return result
