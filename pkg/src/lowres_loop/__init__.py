"""Reproducible joint human-machine translation experiments.

A parallel corpus, a seed of human-translated lines, a family of related
source languages, a lexical translation backend, centeredness-based
hypothesis combination, and an iterative post-editing loop that compares
model-update strategies — all deterministic given explicit seeds.
"""

from .backend import (
    BackendConfig,
    BackendHooks,
    EmLexicalBackend,
    LexicalModel,
    TrainingPair,
    estimate_lexical_table,
    load_model,
    save_model,
    train_model,
    translate,
)
from .bleu import BleuReport, corpus_bleu, per_book_bleu, sentence_bleu_smoothed
from .corpus import (
    Book,
    BookIndex,
    ParallelCorpus,
    SplitAssignment,
    lines_of_book,
    load_corpus,
    make_split,
    save_corpus,
    tokenize,
)
from .ensemble import (
    CombineResult,
    Hypothesis,
    HypothesisSet,
    centered_combine,
    combine_document,
    similarity,
    similarity_matrix,
)
from .errors import LowresLoopError
from .family import (
    AlignmentLink,
    Family,
    LanguageScore,
    build_family,
    fertility_one_probability,
    rank_languages,
    score_language,
    viterbi_align,
    zero_distortion_probability,
)
from .lexicon import (
    LexiconTable,
    TaggedSentence,
    prefix_language_labels,
    restore_entities,
    restore_translated,
    tag_entities,
)
from .loop import (
    ExperimentConfig,
    ExperimentResult,
    IterationRecord,
    LoopState,
    SelectionStrategy,
    TranslationLoop,
    UpdatePlan,
    apply_update_strategy,
    bootstrap_mean_ci,
    heldout_language_ordering,
    run_experiment,
    run_experiment_state,
    select_seed,
)
from .synthetic import SyntheticCorpusSpec, generate_synthetic

__version__ = "0.1.0"

__all__ = [
    "AlignmentLink",
    "BackendConfig",
    "BackendHooks",
    "BleuReport",
    "Book",
    "BookIndex",
    "CombineResult",
    "EmLexicalBackend",
    "ExperimentConfig",
    "ExperimentResult",
    "Family",
    "Hypothesis",
    "HypothesisSet",
    "IterationRecord",
    "LanguageScore",
    "LexicalModel",
    "LexiconTable",
    "LoopState",
    "LowresLoopError",
    "ParallelCorpus",
    "SelectionStrategy",
    "SplitAssignment",
    "SyntheticCorpusSpec",
    "TaggedSentence",
    "TrainingPair",
    "TranslationLoop",
    "UpdatePlan",
    "apply_update_strategy",
    "bootstrap_mean_ci",
    "build_family",
    "centered_combine",
    "combine_document",
    "corpus_bleu",
    "estimate_lexical_table",
    "fertility_one_probability",
    "generate_synthetic",
    "heldout_language_ordering",
    "lines_of_book",
    "load_corpus",
    "load_model",
    "make_split",
    "per_book_bleu",
    "prefix_language_labels",
    "rank_languages",
    "restore_entities",
    "restore_translated",
    "run_experiment",
    "run_experiment_state",
    "save_corpus",
    "save_model",
    "score_language",
    "select_seed",
    "sentence_bleu_smoothed",
    "similarity",
    "similarity_matrix",
    "tag_entities",
    "tokenize",
    "train_model",
    "translate",
    "viterbi_align",
    "zero_distortion_probability",
]
