"""Language-family construction by alignment statistics.

Candidate source languages are scored against the target on the seed lines:
a lexical model is trained per candidate, seed pairs are Viterbi-aligned, and
two probabilities summarize how machine-friendly the candidate is — how often
consecutive target tokens align to consecutive source tokens (zero
distortion) and how often a source token is aligned exactly once (fertility
one).  Families are the top-k candidates by one of those measures, their
product, or a caller-supplied linguistic ordering.
"""

from collections.abc import Sequence
from dataclasses import dataclass

from .backend import BackendConfig, LexicalModel, TrainingPair, train_model
from .errors import (
    InsufficientLinks,
    MissingLinguisticList,
    NotEnoughLanguages,
    UnknownLanguage,
    UntrainedModel,
)
from .tokens import NULL_SOURCE

AlignedSentence = tuple[Sequence[str], Sequence[str], list["AlignmentLink"]]


@dataclass(frozen=True)
class AlignmentLink:
    source_pos: int
    target_pos: int


@dataclass(frozen=True)
class LanguageScore:
    language: str
    p_zero_distortion: float
    p_fertility_one: float

    @property
    def performance_score(self) -> float:
        return self.p_zero_distortion * self.p_fertility_one


@dataclass(frozen=True)
class Family:
    method: str  # "distortion" | "performance" | "linguistic"
    members: tuple[str, ...]


def viterbi_align(source_sentence: Sequence[str], target_sentence: Sequence[str],
                  model: LexicalModel) -> list[AlignmentLink]:
    """Link each target token to its argmax source token.

    The null source competes: a target token stays unlinked when the null row
    strictly beats every real source position.  Ties between real source
    positions go to the lowest position.
    """
    if model is None or not model.is_trained():
        raise UntrainedModel("viterbi_align needs a trained model")
    null_row = model.table.get(NULL_SOURCE, {})
    links: list[AlignmentLink] = []
    for j, target in enumerate(target_sentence):
        best_i = 0
        best_p = -1.0
        for i, source in enumerate(source_sentence):
            p = model.table.get(source, {}).get(target, 0.0)
            if p > best_p:
                best_i, best_p = i, p
        if source_sentence and null_row.get(target, 0.0) <= best_p:
            links.append(AlignmentLink(best_i, j))
    return links


def _require_links(aligned_corpus: Sequence[AlignedSentence]) -> None:
    if not any(len(links) >= 2 for _, _, links in aligned_corpus):
        raise InsufficientLinks("need at least one sentence pair with 2+ links")


def zero_distortion_probability(aligned_corpus: Sequence[AlignedSentence]) -> float:
    """Fraction of adjacent linked target positions whose sources advance by 1.

    Within each sentence, every pair of target positions (j-1, j) that are
    both linked contributes; the pair counts as zero-distortion when the
    source positions differ by exactly +1.  Null (unlinked) targets drop out.
    """
    _require_links(aligned_corpus)
    jumps = 0
    monotone = 0
    for _, target, links in aligned_corpus:
        linked = {link.target_pos: link.source_pos for link in links}
        for j in range(1, len(target)):
            if j in linked and (j - 1) in linked:
                jumps += 1
                if linked[j] - linked[j - 1] == 1:
                    monotone += 1
    if jumps == 0:
        raise InsufficientLinks("no adjacent linked target positions")
    return monotone / jumps


def fertility_one_probability(aligned_corpus: Sequence[AlignedSentence]) -> float:
    """Fraction of source tokens linked by exactly one alignment link."""
    _require_links(aligned_corpus)
    total = 0
    exactly_one = 0
    for source, _, links in aligned_corpus:
        counts = [0] * len(source)
        for link in links:
            counts[link.source_pos] += 1
        total += len(source)
        exactly_one += sum(1 for c in counts if c == 1)
    if total == 0:
        raise InsufficientLinks("no source tokens to score")
    return exactly_one / total


def align_pairs(pairs: Sequence[TrainingPair], model: LexicalModel,
                ) -> list[AlignedSentence]:
    return [
        (pair.source, pair.target, viterbi_align(pair.source, pair.target, model))
        for pair in pairs
    ]


def score_language(corpus, source_language: str, target: str,
                   seed_lines: Sequence[int],
                   config: BackendConfig | None = None) -> LanguageScore:
    """Train on the raw seed pairs and compute both alignment statistics."""
    corpus.require_language(source_language)
    corpus.require_language(target)
    config = config or BackendConfig()
    pairs = [
        TrainingPair(corpus.lines[source_language][i], corpus.lines[target][i])
        for i in sorted(set(seed_lines))
        if corpus.lines[source_language][i] and corpus.lines[target][i]
    ]
    model = train_model(
        pairs, config.em_iterations, config.model_seed,
        source_language=source_language, target_language=target,
        identity_boost=config.identity_boost, null_floor=config.null_floor,
    )
    aligned = align_pairs(pairs, model)
    return LanguageScore(
        language=source_language,
        p_zero_distortion=zero_distortion_probability(aligned),
        p_fertility_one=fertility_one_probability(aligned),
    )


def rank_languages(corpus, target: str, seed_lines: Sequence[int],
                   method: str, config: BackendConfig | None = None,
                   ) -> list[LanguageScore]:
    """Score every candidate language and sort by the requested measure.

    Ties break on the language code so rankings are total orders.
    """
    corpus.require_language(target)
    candidates = [lang for lang in corpus.languages if lang != target]
    scores = [
        score_language(corpus, lang, target, seed_lines, config)
        for lang in candidates
    ]
    if method == "distortion":
        scores.sort(key=lambda s: (-s.p_zero_distortion, s.language))
    elif method == "performance":
        scores.sort(key=lambda s: (-s.performance_score, s.language))
    else:
        raise ValueError(f"unknown ranking method {method!r}")
    return scores


def build_family(corpus, target: str, seed_lines: Sequence[int], method: str,
                 k: int, linguistic_list: Sequence[str] | None = None,
                 config: BackendConfig | None = None) -> Family:
    """Pick the k family members for a target language.

    ``linguistic`` takes the provided ordering as given (validated against
    the corpus); ``distortion`` and ``performance`` rank candidates by the
    alignment statistics computed on the seed lines.
    """
    corpus.require_language(target)
    candidates = [lang for lang in corpus.languages if lang != target]
    if k < 1:
        raise ValueError("family size k must be >= 1")
    if method == "linguistic":
        if linguistic_list is None:
            raise MissingLinguisticList("linguistic method needs an ordered language list")
        ordered = []
        for lang in linguistic_list:
            lang = lang.lower()
            if lang == target:
                continue
            if lang not in corpus.lines:
                raise UnknownLanguage(lang)
            if lang not in ordered:
                ordered.append(lang)
        if len(ordered) < k:
            raise NotEnoughLanguages(f"need {k} candidates, have {len(ordered)}")
        return Family(method, tuple(ordered[:k]))
    if len(candidates) < k:
        raise NotEnoughLanguages(f"need {k} candidates, have {len(candidates)}")
    scores = rank_languages(corpus, target, seed_lines, method, config)
    return Family(method, tuple(score.language for score in scores[:k]))
