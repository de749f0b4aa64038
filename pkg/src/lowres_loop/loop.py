"""The joint human-machine translation loop.

One iteration: (re)train per-source-language models on everything translated
so far (optionally after pretraining when the vocabulary grew), draft the
untranslated remainder from every family member, combine hypotheses by
centeredness, rank books by the draft's per-book BLEU against the reference
(the simulated human judgment), then reveal the best-ranked unedited book as
oracle post-editing and account for the new lines and vocabulary.  Training
happens in two passes: a multi-source pass over every family member's pairs
with a shared label scheme, then a continuation pass on each member's own
pairs.
"""

import os
import random
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace
from hashlib import sha256
from pathlib import Path

import numpy as np

from .backend import (
    BackendConfig,
    BackendHooks,
    LexicalModel,
    TrainingPair,
    estimate_lexical_table,
    train_model,
    translate,
    unk_map_pairs,
)
from .bleu import BleuReport, corpus_bleu, per_book_bleu
from .corpus import ParallelCorpus, lines_of_book, make_split
from .ensemble import Hypothesis, HypothesisSet, centered_combine
from .errors import (
    BackendFailure,
    ConfigError,
    DegenerateSeed,
    LoopComplete,
    LowresLoopError,
    NotEnoughLanguages,
    OverlapWithExisting,
    ProxyIsTarget,
    SampleTooLarge,
    UnknownLanguage,
)
from .family import Family, LanguageScore, build_family, rank_languages
from .kvfile import read_kv_file
from .lexicon import (
    LexiconTable,
    TaggedSentence,
    prefix_language_labels,
    restore_translated,
    tag_entities,
)

SEED_ONLY = "seed_only"
OLD_VOCAB = "old_vocab"
UPDATED_VOCAB = "updated_vocab"
SELF_SUPERVISED = "self_supervised"
UPDATE_STRATEGIES = (SEED_ONLY, OLD_VOCAB, UPDATED_VOCAB, SELF_SUPERVISED)

JOBS_ENV = "LOWRES_LOOP_JOBS"
RUN_DIR_ENV = "LOWRES_LOOP_RUN_DIR"


@dataclass(frozen=True)
class SelectionStrategy:
    kind: str  # "random" | "portion"
    size: int = 0
    rng_seed: int = 0
    book_name: str = ""

    @classmethod
    def random_sample(cls, size: int, rng_seed: int) -> "SelectionStrategy":
        return cls("random", size=size, rng_seed=rng_seed)

    @classmethod
    def portion(cls, book_name: str) -> "SelectionStrategy":
        return cls("portion", book_name=book_name)


def select_seed(corpus: ParallelCorpus, strategy: SelectionStrategy) -> frozenset[int]:
    """Choose the seed lines a human translates up front."""
    if strategy.kind == "random":
        if strategy.size < 1:
            raise DegenerateSeed("random seed size must be >= 1")
        if strategy.size > corpus.n_total:
            raise SampleTooLarge(
                f"seed size {strategy.size} exceeds corpus size {corpus.n_total}"
            )
        rng = random.Random(strategy.rng_seed)
        return frozenset(rng.sample(range(corpus.n_total), strategy.size))
    if strategy.kind == "portion":
        return frozenset(lines_of_book(corpus, strategy.book_name))
    raise ValueError(f"unknown selection strategy {strategy.kind!r}")


@dataclass(frozen=True)
class UpdatePlan:
    train_lines: tuple[int, ...]
    keep_old_vocab: bool
    include_pseudo: bool


@dataclass(frozen=True)
class IterationRecord:
    iteration: int
    entry_delta_v: int
    pretrain_ran: bool
    pretrain_invocations: int
    train_invocations: int
    n: int
    v: int
    delta_v: int
    chosen_books: tuple[str, ...]
    per_book: tuple[tuple[str, float, int], ...]  # (book, BLEU, lines evaluated)
    draft_bleu_all: BleuReport | None
    draft_bleu_machine: BleuReport | None
    winner_counts: tuple[tuple[str, int], ...]
    dropped_placeholders: int


@dataclass
class LoopState:
    seed_lines: frozenset[int]
    seed_train_lines: frozenset[int]
    validation_lines: frozenset[int]
    post_edited: set[int] = field(default_factory=set)
    vocab_types: set[str] = field(default_factory=set)
    n: int = 0
    v: int = 0
    delta_v: int = 0
    iteration: int = 0
    draft: list[tuple[str, ...]] | None = None
    history: list[IterationRecord] = field(default_factory=list)
    edited_books: list[str] = field(default_factory=list)
    heldout_books: tuple[str, ...] | None = None

    @property
    def human_lines(self) -> frozenset[int]:
        return self.seed_lines | self.post_edited


def apply_update_strategy(state: LoopState, new_lines, update: str) -> UpdatePlan:
    """Training-line policy for the configured model-update strategy.

    ``new_lines`` are about to join the post-edited pool; they must not
    overlap lines already edited.
    """
    if update not in UPDATE_STRATEGIES:
        raise ValueError(f"unknown update strategy {update!r}")
    new = frozenset(new_lines)
    overlap = new & state.post_edited
    if overlap:
        raise OverlapWithExisting(
            f"{len(overlap)} lines already post-edited, e.g. {min(overlap)}"
        )
    if update == SEED_ONLY:
        lines = state.seed_train_lines
    else:
        lines = state.seed_train_lines | state.post_edited | new
    return UpdatePlan(
        train_lines=tuple(sorted(lines)),
        keep_old_vocab=(update == OLD_VOCAB),
        include_pseudo=(update == SELF_SUPERVISED),
    )


# ----------------------------------------------------------------------
# Experiment configuration


@dataclass
class ExperimentConfig:
    corpus_manifest: Path = Path("manifest.txt")
    target_language: str = ""
    seed_strategy: str = "random"
    seed_size: int = 1000
    seed_rng_seed: int = 0
    seed_book: str = ""
    family_method: str = "distortion"
    family_k: int = 3
    family_list: tuple[str, ...] = ()
    update_strategy: str = UPDATED_VOCAB
    validation_fraction: float = 0.057
    em_iterations: int = 20
    pretrain_em_iterations: int = 10
    pretrain_interpolation: float = 0.5
    identity_boost: float = 1.0
    null_floor: float = 1e-4
    model_seed: int = 0
    w_multi: float = 0.5
    w_pseudo: float = 0.3
    max_iterations: int = 10_000
    books_per_iteration: int = 1
    heldout_books: int = 0
    postedit_noise: float = 0.0
    postedit_noise_seed: int = 0
    lexicon: Path | None = None
    run_root: Path | None = None
    jobs: int = 1

    _FIELD_TYPES = {
        "corpus_manifest": "path", "target_language": "str",
        "seed_strategy": "str", "seed_size": "int", "seed_rng_seed": "int",
        "seed_book": "str", "family_method": "str", "family_k": "int",
        "family_list": "langs", "update_strategy": "str",
        "validation_fraction": "float", "em_iterations": "int",
        "pretrain_em_iterations": "int", "pretrain_interpolation": "float",
        "identity_boost": "float", "null_floor": "float", "model_seed": "int",
        "w_multi": "float", "w_pseudo": "float", "max_iterations": "int",
        "books_per_iteration": "int", "heldout_books": "int",
        "postedit_noise": "float", "postedit_noise_seed": "int",
        "lexicon": "path", "run_root": "path", "jobs": "int",
    }

    @classmethod
    def from_file(cls, path: str | Path) -> "ExperimentConfig":
        path = Path(path)
        try:
            entries = read_kv_file(path)
        except ValueError as exc:
            raise ConfigError([str(exc)]) from None
        return cls.from_entries(entries, base_dir=path.parent)

    @classmethod
    def from_entries(cls, entries, base_dir: Path = Path(".")) -> "ExperimentConfig":
        problems = []
        values = {}
        seen = set()
        for key, raw in entries:
            if key not in cls._FIELD_TYPES:
                problems.append(f"{key}: unknown option")
                continue
            if key in seen:
                problems.append(f"{key}: set more than once")
                continue
            seen.add(key)
            kind = cls._FIELD_TYPES[key]
            try:
                if kind == "int":
                    values[key] = int(raw)
                elif kind == "float":
                    values[key] = float(raw)
                elif kind == "path":
                    if raw.lower() == "none":
                        values[key] = None
                    else:
                        candidate = Path(raw)
                        values[key] = candidate if candidate.is_absolute() else base_dir / candidate
                elif kind == "langs":
                    values[key] = tuple(
                        part.strip().lower() for part in raw.split(",") if part.strip()
                    )
                else:
                    values[key] = raw
            except ValueError:
                problems.append(f"{key}: cannot parse {raw!r} as {kind}")
        if problems:
            raise ConfigError(problems)
        config = cls(**values)
        config.validate()
        return config

    def validate(self) -> None:
        problems = []
        if not self.target_language:
            problems.append("target_language: required")
        if self.seed_strategy not in ("random", "portion"):
            problems.append("seed_strategy: must be 'random' or 'portion'")
        if self.seed_strategy == "random" and self.seed_size < 1:
            problems.append("seed_size: must be >= 1 for random seeds")
        if self.seed_strategy == "portion" and not self.seed_book:
            problems.append("seed_book: required for portion seeds")
        if self.family_method not in ("distortion", "performance", "linguistic"):
            problems.append("family_method: must be distortion, performance or linguistic")
        if self.family_method == "linguistic" and not self.family_list:
            problems.append("family_list: required for the linguistic method")
        if self.family_k < 1:
            problems.append("family_k: must be >= 1")
        if self.update_strategy not in UPDATE_STRATEGIES:
            problems.append(
                "update_strategy: must be one of " + ", ".join(UPDATE_STRATEGIES)
            )
        if not 0.0 < self.validation_fraction < 1.0:
            problems.append("validation_fraction: must be in (0, 1)")
        if self.em_iterations < 1 or self.pretrain_em_iterations < 1:
            problems.append("em_iterations: must be >= 1")
        if not 0.0 <= self.pretrain_interpolation <= 1.0:
            problems.append("pretrain_interpolation: must be in [0, 1]")
        if self.identity_boost < 0.0:
            problems.append("identity_boost: must be >= 0")
        if not 0.0 < self.null_floor < 0.5:
            problems.append("null_floor: must be in (0, 0.5)")
        if self.w_multi <= 0.0 or self.w_pseudo < 0.0:
            problems.append("w_multi: must be > 0 and w_pseudo >= 0")
        if self.max_iterations < 0:
            problems.append("max_iterations: must be >= 0")
        if self.books_per_iteration < 1:
            problems.append("books_per_iteration: must be >= 1")
        if self.heldout_books < 0:
            problems.append("heldout_books: must be >= 0")
        if not 0.0 <= self.postedit_noise <= 1.0:
            problems.append("postedit_noise: must be in [0, 1]")
        if self.jobs < 1:
            problems.append("jobs: must be >= 1")
        if problems:
            raise ConfigError(problems)

    def canonical_text(self) -> str:
        parts = []
        for name in sorted(self._FIELD_TYPES):
            # Parallelism and the output location never change results, so
            # they stay out of the hash that names the run directory.
            if name in ("jobs", "run_root"):
                continue
            value = getattr(self, name)
            if isinstance(value, Path):
                value = value.resolve().as_posix()
            elif isinstance(value, tuple):
                value = ",".join(value)
            elif value is None:
                value = "none"
            parts.append(f"{name} = {value}")
        return "\n".join(parts) + "\n"

    def config_hash(self) -> str:
        return sha256(self.canonical_text().encode("utf-8")).hexdigest()[:16]

    def backend_config(self) -> BackendConfig:
        return BackendConfig(
            em_iterations=self.em_iterations,
            pretrain_em_iterations=self.pretrain_em_iterations,
            pretrain_interpolation=self.pretrain_interpolation,
            identity_boost=self.identity_boost,
            null_floor=self.null_floor,
            model_seed=self.model_seed,
        )

    def selection_strategy(self) -> SelectionStrategy:
        if self.seed_strategy == "random":
            return SelectionStrategy.random_sample(self.seed_size, self.seed_rng_seed)
        return SelectionStrategy.portion(self.seed_book)

    def effective_jobs(self) -> int:
        jobs = max(1, self.jobs)
        cap = os.environ.get(JOBS_ENV)
        if cap:
            try:
                jobs = min(jobs, max(1, int(cap)))
            except ValueError:
                pass
        return jobs


def _map_ordered(fn, items, jobs: int) -> list:
    """Order-preserving map, optionally across a thread pool."""
    items = list(items)
    if jobs <= 1 or len(items) <= 1:
        return [fn(item) for item in items]
    with ThreadPoolExecutor(max_workers=jobs) as pool:
        return list(pool.map(fn, items))


def bootstrap_mean_ci(values, confidence: float = 0.95,
                      resamples: int = 2000,
                      rng_seed: int = 0) -> tuple[float, float]:
    """Percentile-bootstrap confidence interval for the mean of ``values``.

    Resamples with replacement and returns the two-sided interval at the
    requested confidence.  For a paired comparison, pass the per-run score
    differences and check whether the interval excludes zero.
    """
    data = np.asarray(list(values), dtype=np.float64)
    if data.size == 0:
        raise ValueError("bootstrap_mean_ci needs at least one value")
    if not 0.0 < confidence < 1.0:
        raise ValueError("confidence must be in (0, 1)")
    if resamples < 1:
        raise ValueError("resamples must be >= 1")
    rng = np.random.default_rng(rng_seed)
    picks = rng.integers(0, data.size, size=(resamples, data.size))
    means = data[picks].mean(axis=1)
    alpha = (1.0 - confidence) / 2.0
    low, high = np.quantile(means, [alpha, 1.0 - alpha])
    return float(low), float(high)


# ----------------------------------------------------------------------
# The loop itself


class TranslationLoop:
    """Runs training / drafting / ranking / post-editing cycles."""

    def __init__(self, corpus: ParallelCorpus, family: Family,
                 config: ExperimentConfig, lexicon: LexiconTable | None = None,
                 hooks: BackendHooks | None = None):
        corpus.require_language(config.target_language)
        for member in family.members:
            corpus.require_language(member)
        self.corpus = corpus
        self.target = config.target_language
        self.family = family
        self.config = config
        self.lexicon = lexicon
        self.hooks = hooks or BackendHooks()
        self._prior = None
        self._version = 0
        self._frozen_cache = None
        self._tag_cache: dict[tuple[str, int], TaggedSentence] = {}
        self._corrupted: dict[int, tuple[str, ...]] = {}
        self._noise_rng = np.random.default_rng(config.postedit_noise_seed)
        self._book_order = {
            book.name: i for i, book in enumerate(corpus.book_index.books)
        }

    # -- text access -----------------------------------------------------

    def human_text(self, index: int) -> tuple[str, ...]:
        """Reference line as the simulated human produced it."""
        return self._corrupted.get(index, self.corpus.lines[self.target][index])

    def _tagged(self, language: str, index: int,
                tokens: tuple[str, ...] | None = None) -> TaggedSentence:
        if tokens is not None:
            if self.lexicon is None:
                return TaggedSentence(tuple(tokens), ())
            return tag_entities(tokens, self.lexicon, language)
        key = (language, index)
        cached = self._tag_cache.get(key)
        if cached is None:
            line = self.corpus.lines[language][index]
            if self.lexicon is None:
                cached = TaggedSentence(tuple(line), ())
            else:
                cached = tag_entities(line, self.lexicon, language)
            self._tag_cache[key] = cached
        return cached

    def _target_side(self, index: int) -> tuple[str, ...]:
        corrupted = self._corrupted.get(index)
        if corrupted is not None:
            return self._tagged(self.target, index, corrupted).tokens
        return self._tagged(self.target, index).tokens

    def _source_side(self, language: str, index: int,
                     label_target: str) -> tuple[str, ...]:
        tagged = self._tagged(language, index)
        return tuple(prefix_language_labels(tagged.tokens, language, label_target))

    # -- state -----------------------------------------------------------

    def initial_state(self, seed_lines: frozenset[int]) -> LoopState:
        split = make_split(self.corpus, seed_lines, self.config.validation_fraction)
        vocab: set[str] = set()
        for index in seed_lines:
            vocab.update(self.human_text(index))
        # The seed is the first vocabulary update, so pretraining is due.
        return LoopState(
            seed_lines=frozenset(seed_lines),
            seed_train_lines=split.train,
            validation_lines=split.validation,
            vocab_types=vocab,
            n=len(seed_lines),
            v=len(vocab),
            delta_v=len(vocab),
        )

    # -- training --------------------------------------------------------

    def _training_pairs(self, lines, language: str, weight: float) -> list[TrainingPair]:
        return [
            TrainingPair(
                self._source_side(language, index, self.target),
                self._target_side(index),
                weight,
            )
            for index in lines
        ]

    def _neighbor_pairs(self) -> list[TrainingPair]:
        members = self.family.members
        pairs: list[TrainingPair] = []
        for member in members:
            partner = members[0] if member != members[0] else (
                members[1] if len(members) > 1 else None
            )
            if partner is None:
                continue
            for index in range(self.corpus.n_total):
                pairs.append(TrainingPair(
                    self._source_side(member, index, partner),
                    self._tagged(partner, index).tokens,
                    1.0,
                ))
        return pairs

    def _pseudo_pairs(self, state: LoopState) -> list[TrainingPair]:
        if state.draft is None:
            return []
        human = state.human_lines
        pairs: list[TrainingPair] = []
        for member in self.family.members:
            for index in range(self.corpus.n_total):
                if index in human:
                    continue
                draft_line = state.draft[index]
                pairs.append(TrainingPair(
                    self._source_side(member, index, self.target),
                    self._tagged(self.target, index, draft_line).tokens,
                    self.config.w_pseudo,
                ))
        return pairs

    def _train_family_models(self, state: LoopState, plan: UpdatePlan,
                             pretrain_ran: bool) -> dict[str, LexicalModel]:
        cfg = self.config
        train_lines = list(plan.train_lines)

        if plan.keep_old_vocab:
            frozen = self._frozen_vocab(state)
        else:
            frozen = None

        def member_pairs(member: str, weight: float) -> list[TrainingPair]:
            pairs = self._training_pairs(train_lines, member, weight)
            if frozen is not None:
                source_vocab, target_vocab = frozen[member]
                pairs = unk_map_pairs(pairs, source_vocab, target_vocab)
            return pairs

        phase_a: list[TrainingPair] = []
        for member in self.family.members:
            phase_a.extend(member_pairs(member, cfg.w_multi))
        if plan.include_pseudo:
            # The previous draft of the untranslated remainder joins the
            # broad first phase as weighted pseudo-pairs; the per-member
            # continuation phase stays on real pairs only.
            phase_a.extend(self._pseudo_pairs(state))
        self._version += 1
        shared = train_model(
            phase_a, cfg.em_iterations, cfg.model_seed,
            source_language="multi", target_language=self.target,
            identity_boost=cfg.identity_boost, null_floor=cfg.null_floor,
            prior=self._prior, prior_interpolation=cfg.pretrain_interpolation,
            version=self._version,
        )
        self.hooks.train_invocations += 1

        def train_member(member: str) -> LexicalModel:
            model = train_model(
                member_pairs(member, 1.0), cfg.em_iterations, cfg.model_seed,
                source_language=member, target_language=self.target,
                identity_boost=cfg.identity_boost, null_floor=cfg.null_floor,
                continue_from=shared, version=self._version,
            )
            return model

        models = _map_ordered(train_member, self.family.members, cfg.effective_jobs())
        self.hooks.train_invocations += len(self.family.members)
        return dict(zip(self.family.members, models))

    def _frozen_vocab(self, state: LoopState):
        """Per-member (source, target) vocabularies of the seed training data."""
        if self._frozen_cache is None:
            frozen = {}
            seed_lines = sorted(state.seed_train_lines)
            for member in self.family.members:
                source_vocab: set[str] = set()
                target_vocab: set[str] = set()
                for index in seed_lines:
                    source_vocab.update(self._source_side(member, index, self.target))
                    target_vocab.update(self._target_side(index))
                frozen[member] = (frozenset(source_vocab), frozenset(target_vocab))
            self._frozen_cache = frozen
        return self._frozen_cache

    # -- drafting ---------------------------------------------------------

    def _draft_document(self, state: LoopState,
                        models: dict[str, LexicalModel]):
        n_total = self.corpus.n_total
        human = state.human_lines
        machine_lines = [i for i in range(n_total) if i not in human]

        def translate_line(index: int):
            hypotheses = []
            dropped_total = 0
            for member in self.family.members:
                tagged = self._tagged(member, index)
                labeled = prefix_language_labels(tagged.tokens, member, self.target)
                raw = translate(models[member], labeled)
                if self.lexicon is not None:
                    restored, dropped = restore_translated(
                        raw, tagged.bindings, self.target, self.lexicon
                    )
                    dropped_total += dropped
                else:
                    restored = raw
                hypotheses.append(Hypothesis(member, tuple(restored)))
            result = centered_combine(HypothesisSet(index, tuple(hypotheses)))
            return result.tokens, result.language, dropped_total

        results = _map_ordered(
            translate_line, machine_lines, self.config.effective_jobs()
        )
        draft: list[tuple[str, ...]] = [()] * n_total
        for index in range(n_total):
            if index in human:
                draft[index] = tuple(self.human_text(index))
        winner_counts: dict[str, int] = {}
        dropped_placeholders = 0
        for index, (tokens, language, dropped) in zip(machine_lines, results):
            draft[index] = tokens
            winner_counts[language] = winner_counts.get(language, 0) + 1
            dropped_placeholders += dropped
        return draft, machine_lines, winner_counts, dropped_placeholders

    # -- one full cycle ----------------------------------------------------

    def run_iteration(self, state: LoopState, post_edit: bool = True) -> LoopState:
        """Advance one cycle; with ``post_edit=False`` stop after evaluation."""
        corpus = self.corpus
        if state.n >= corpus.n_total:
            raise LoopComplete(f"all {corpus.n_total} lines are human-translated")
        update = self.config.update_strategy
        entry_delta_v = state.delta_v
        plan = apply_update_strategy(state, (), update)

        pretrain_ran = False
        try:
            if entry_delta_v > 0 and update != SEED_ONLY:
                pretrain_pairs = self._neighbor_pairs()
                if pretrain_pairs:
                    self._prior, _ = estimate_lexical_table(
                        pretrain_pairs, self.config.pretrain_em_iterations,
                        identity_boost=self.config.identity_boost,
                        null_floor=self.config.null_floor,
                    )
                    self.hooks.pretrain_invocations += 1
                    pretrain_ran = True
            models = self._train_family_models(state, plan, pretrain_ran)
            draft, machine_lines, winner_counts, dropped = self._draft_document(
                state, models
            )
        except LowresLoopError:
            raise
        except Exception as exc:  # surface backend blowups with loop context
            raise BackendFailure(f"iteration {state.iteration + 1}: {exc}") from exc

        state.draft = draft
        per_book = per_book_bleu(corpus, draft, self.target,
                                 excluded_lines=state.seed_lines)
        per_book_scores = tuple(
            (name, report.score, lines) for name, report, lines in per_book
        )

        if state.heldout_books is None and self.config.heldout_books > 0:
            worst = sorted(
                per_book_scores, key=lambda row: (row[1], -self._book_order[row[0]])
            )[: self.config.heldout_books]
            state.heldout_books = tuple(name for name, _, _ in worst)
        heldout = set(state.heldout_books or ())

        eval_lines = [i for i in range(corpus.n_total) if i not in state.seed_lines]
        draft_bleu_all = self._safe_bleu(draft, eval_lines)
        draft_bleu_machine = self._safe_bleu(draft, machine_lines)

        chosen: list[str] = []
        if post_edit:
            edited = set(state.edited_books)
            candidates = [
                row for row in per_book_scores
                if row[0] not in edited and row[0] not in heldout
            ]
            candidates.sort(key=lambda row: (-row[1], self._book_order[row[0]]))
            chosen = [row[0] for row in candidates[: self.config.books_per_iteration]]

        new_vocab = 0
        new_lines_total = 0
        for book_name in chosen:
            book_lines = [
                i for i in lines_of_book(corpus, book_name)
                if i not in state.human_lines
            ]
            apply_update_strategy(state, book_lines, update)  # overlap guard
            self._reveal(state, book_lines)
            for index in book_lines:
                for token in self.human_text(index):
                    if token not in state.vocab_types:
                        state.vocab_types.add(token)
                        new_vocab += 1
            state.post_edited.update(book_lines)
            state.edited_books.append(book_name)
            new_lines_total += len(book_lines)
        if post_edit:
            state.n += new_lines_total
            state.v += new_vocab
            state.delta_v = new_vocab

        state.iteration += 1
        record = IterationRecord(
            iteration=state.iteration,
            entry_delta_v=entry_delta_v,
            pretrain_ran=pretrain_ran,
            pretrain_invocations=self.hooks.pretrain_invocations,
            train_invocations=self.hooks.train_invocations,
            n=state.n,
            v=state.v,
            delta_v=state.delta_v,
            chosen_books=tuple(chosen),
            per_book=per_book_scores,
            draft_bleu_all=draft_bleu_all,
            draft_bleu_machine=draft_bleu_machine,
            winner_counts=tuple(sorted(winner_counts.items())),
            dropped_placeholders=dropped,
        )
        state.history.append(record)
        return state

    def _reveal(self, state: LoopState, book_lines: list[int]) -> None:
        """Oracle post-editing, with optional token corruption."""
        rate = self.config.postedit_noise
        if rate <= 0.0:
            return
        pool = sorted(state.vocab_types)
        for index in book_lines:
            reference = list(self.corpus.lines[self.target][index])
            changed = False
            for position in range(len(reference)):
                if self._noise_rng.random() < rate:
                    reference[position] = pool[
                        int(self._noise_rng.integers(len(pool)))
                    ]
                    changed = True
            if changed:
                self._corrupted[index] = tuple(reference)

    def _safe_bleu(self, draft, lines) -> BleuReport | None:
        if not lines:
            return None
        references = self.corpus.lines[self.target]
        refs = [references[i] for i in lines]
        if all(len(r) == 0 for r in refs):
            return None
        return corpus_bleu([draft[i] for i in lines], refs)

    def final_draft(self, state: LoopState) -> list[tuple[str, ...]]:
        """Current best full text: human lines plus the latest machine draft."""
        draft = state.draft or [()] * self.corpus.n_total
        return [
            tuple(self.human_text(i)) if i in state.human_lines else tuple(draft[i])
            for i in range(self.corpus.n_total)
        ]


# ----------------------------------------------------------------------
# Whole experiments


@dataclass
class ExperimentResult:
    config: ExperimentConfig
    config_hash: str
    family: Family
    family_scores: tuple[LanguageScore, ...]
    seed_lines: tuple[int, ...]
    state: LoopState
    loop: TranslationLoop
    drafts: list[tuple[int, list[tuple[str, ...]]]] = field(default_factory=list)

    def final_draft(self) -> list[tuple[str, ...]]:
        return self.loop.final_draft(self.state)


def run_experiment_state(config: ExperimentConfig,
                         corpus: ParallelCorpus | None = None,
                         lexicon: LexiconTable | None = None,
                         hooks: BackendHooks | None = None) -> ExperimentResult:
    """Run the loop to completion (or the iteration cap) in memory."""
    from .corpus import load_corpus  # local import to keep module load light

    if corpus is None:
        manifest = config.corpus_manifest
        corpus = load_corpus(manifest.parent, manifest.name)
    if lexicon is None and config.lexicon is not None:
        lexicon = LexiconTable.load(config.lexicon)

    seed_lines = select_seed(corpus, config.selection_strategy())
    backend_config = config.backend_config()
    family_scores: tuple[LanguageScore, ...] = ()
    if config.family_method == "linguistic":
        family = build_family(
            corpus, config.target_language, sorted(seed_lines), "linguistic",
            config.family_k, linguistic_list=config.family_list,
        )
    else:
        scores = rank_languages(
            corpus, config.target_language, sorted(seed_lines),
            config.family_method, backend_config,
        )
        family_scores = tuple(scores)
        members = tuple(score.language for score in scores[: config.family_k])
        if len(members) < config.family_k:
            raise NotEnoughLanguages(
                f"need {config.family_k} candidates, have {len(members)}"
            )
        family = Family(config.family_method, members)

    loop = TranslationLoop(corpus, family, config, lexicon, hooks)
    state = loop.initial_state(seed_lines)
    drafts: list[tuple[int, list[tuple[str, ...]]]] = []
    if config.max_iterations == 0:
        loop.run_iteration(state, post_edit=False)
        drafts.append((state.iteration, state.draft))
    else:
        while state.n < corpus.n_total and state.iteration < config.max_iterations:
            loop.run_iteration(state)
            drafts.append((state.iteration, state.draft))
            if not state.history[-1].chosen_books:
                break
    return ExperimentResult(
        config=config,
        config_hash=config.config_hash(),
        family=family,
        family_scores=family_scores,
        seed_lines=tuple(sorted(seed_lines)),
        state=state,
        loop=loop,
        drafts=drafts,
    )


def run_experiment(config: ExperimentConfig, run_root: str | Path | None = None,
                   corpus: ParallelCorpus | None = None,
                   lexicon: LexiconTable | None = None):
    """Run an experiment and write its artifacts to a run directory.

    The directory is named by the config hash under ``run_root`` (falling
    back to the config's ``run_root`` key, the ``LOWRES_LOOP_RUN_DIR``
    environment variable, then ./runs); two runs of the same config produce
    byte-identical artifacts.
    """
    from .report import write_run_directory

    result = run_experiment_state(config, corpus=corpus, lexicon=lexicon)
    if run_root is None:
        run_root = config.run_root
    if run_root is None:
        run_root = os.environ.get(RUN_DIR_ENV, "runs")
    run_dir = Path(run_root) / result.config_hash
    write_run_directory(result, run_dir)
    return result, run_dir


def heldout_language_ordering(corpus: ParallelCorpus, proxy_language: str,
                              config: ExperimentConfig,
                              lexicon: LexiconTable | None = None) -> list[str]:
    """Book ordering estimated without target-language references.

    Runs one seed-train-draft-evaluate cycle with ``proxy_language`` standing
    in for the target (both the real target and the proxy are barred from the
    family), and returns books best-first.  Books that never get an evaluable
    line keep their original order at the end.
    """
    proxy = proxy_language.lower()
    corpus.require_language(proxy)
    if proxy == config.target_language:
        raise ProxyIsTarget(proxy)

    kept = tuple(
        lang for lang in corpus.languages if lang != config.target_language
    )
    if proxy not in kept:
        raise UnknownLanguage(proxy)
    view = ParallelCorpus(
        languages=kept,
        lines={lang: corpus.lines[lang] for lang in kept},
        book_index=corpus.book_index,
        split_seed=corpus.split_seed,
    )
    proxy_config = replace(
        config, target_language=proxy, update_strategy=SEED_ONLY,
        max_iterations=0, heldout_books=0,
    )
    result = run_experiment_state(proxy_config, corpus=view, lexicon=lexicon)
    record = result.state.history[-1]
    order = {book.name: i for i, book in enumerate(corpus.book_index.books)}
    ranked = sorted(record.per_book, key=lambda row: (-row[1], order[row[0]]))
    names = [name for name, _, _ in ranked]
    missing = [b.name for b in corpus.book_index.books if b.name not in set(names)]
    return names + missing
