"""Independent brute-force reference implementations used to pin expected
values.  Written from the metric definitions alone, favoring exact rational
arithmetic and exhaustive enumeration over speed; deliberately sharing no
code with the package.
"""

import math
from collections import Counter
from fractions import Fraction


def _grams(tokens, n):
    return [tuple(tokens[i:i + n]) for i in range(len(tokens) - n + 1)]


def oracle_corpus_bleu(hypotheses, references):
    """Corpus BLEU-4: pooled clipped counts, geometric mean, brevity penalty."""
    matched = [0, 0, 0, 0]
    totals = [0, 0, 0, 0]
    hyp_len = 0
    ref_len = 0
    for hyp, ref in zip(hypotheses, references):
        hyp = list(hyp)
        ref = list(ref)
        hyp_len += len(hyp)
        ref_len += len(ref)
        for n in (1, 2, 3, 4):
            hyp_counts = Counter(_grams(hyp, n))
            ref_counts = Counter(_grams(ref, n))
            totals[n - 1] += sum(hyp_counts.values())
            matched[n - 1] += sum(
                min(count, ref_counts[gram]) for gram, count in hyp_counts.items()
            )
    if hyp_len == 0:
        return 0.0
    precisions = [
        Fraction(matched[i], totals[i]) if totals[i] else Fraction(0)
        for i in range(4)
    ]
    if any(p == 0 for p in precisions):
        return 0.0
    log_mean = sum(math.log(float(p)) for p in precisions) / 4.0
    if hyp_len >= ref_len:
        bp = 1.0
    else:
        bp = math.exp(1.0 - ref_len / hyp_len)
    return 100.0 * bp * math.exp(log_mean)


def oracle_sentence_bleu(hypothesis, reference):
    """Add-one smoothed sentence BLEU-4 in [0, 1]."""
    hyp = list(hypothesis)
    ref = list(reference)
    if not hyp and not ref:
        return 1.0
    if not hyp or not ref:
        return 0.0
    log_sum = 0.0
    for n in (1, 2, 3, 4):
        hyp_counts = Counter(_grams(hyp, n))
        ref_counts = Counter(_grams(ref, n))
        total = sum(hyp_counts.values())
        match = sum(
            min(count, ref_counts[gram]) for gram, count in hyp_counts.items()
        )
        log_sum += math.log(Fraction(match + 1, total + 1))
    if len(hyp) >= len(ref):
        bp = 1.0
    else:
        bp = math.exp(1.0 - len(ref) / len(hyp))
    return bp * math.exp(log_sum / 4.0)


def oracle_similarity(a, b):
    """Symmetrized smoothed sentence BLEU."""
    if not a and not b:
        return 1.0
    if not a or not b:
        return 0.0
    return 0.5 * (oracle_sentence_bleu(a, b) + oracle_sentence_bleu(b, a))


def oracle_centered_choice(token_lists):
    """Exhaustive centeredness: full row sums, empty lines ineligible
    unless everything is empty, earliest index on exact ties."""
    n = len(token_lists)
    sims = [
        [oracle_similarity(token_lists[i], token_lists[j]) for j in range(n)]
        for i in range(n)
    ]
    sums = [sum(row) for row in sims]
    eligible = [i for i in range(n) if len(token_lists[i]) > 0]
    if not eligible:
        eligible = list(range(n))
    best = eligible[0]
    for i in eligible[1:]:
        if sums[i] > sums[best]:
            best = i
    return best, sums
