"""Desk-scale lexical translation backend.

The backend contract is train / pretrain / translate / update_vocabulary plus
an invocation-counting hook object, so a heavier sequence model can be swapped
in behind the same loop.  The reference implementation estimates a lexical
table t(target | source) by expectation maximization over weighted sentence
pairs and decodes monotonically, emitting the argmax target per source token.

Both a null source token (targets may align to nothing) and a null target
token (sources may emit nothing) are part of the model: every target sentence
is extended with one null target during training, so each source row's
distribution carries an explicit dropping probability, and the null source row
competes in alignment.  Initialization is uniform over co-occurring pairs
except that a source token sharing its exact string with a co-occurring
target token gets a boosted initial weight; without that bias EM cannot break
the symmetry of a copied sentence pair and identical text would not align to
itself.
"""

import hashlib
import math
from collections.abc import Iterable, Sequence
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .errors import EmptyTrainingSet, ModelFormatError, UntrainedModel
from .tokens import NULL_SOURCE, NULL_TARGET, UNK, is_label, is_placeholder

Table = dict[str, dict[str, float]]


@dataclass(frozen=True)
class TrainingPair:
    source: tuple[str, ...]
    target: tuple[str, ...]
    weight: float = 1.0


@dataclass
class BackendHooks:
    pretrain_invocations: int = 0
    train_invocations: int = 0


@dataclass
class BackendConfig:
    em_iterations: int = 20
    pretrain_em_iterations: int = 10
    pretrain_interpolation: float = 0.5  # weight of the pretrained prior at init
    identity_boost: float = 1.0
    null_floor: float = 1e-4
    model_seed: int = 0


@dataclass
class LexicalModel:
    source_language: str
    target_language: str
    table: Table
    source_vocab: frozenset[str]
    target_vocab: frozenset[str]
    version: int
    em_iterations: int
    model_seed: int
    log_likelihood: tuple[float, ...] = ()

    def is_trained(self) -> bool:
        return bool(self.table)


def _real_vocab(pairs: Sequence[TrainingPair]) -> tuple[frozenset[str], frozenset[str]]:
    source: set[str] = set()
    target: set[str] = set()
    for pair in pairs:
        source.update(pair.source)
        target.update(pair.target)
    return frozenset(source), frozenset(target)


def estimate_lexical_table(pairs: Sequence[TrainingPair], em_iterations: int,
                           *, identity_boost: float = 1.0,
                           null_floor: float = 1e-4,
                           prior: Table | None = None,
                           prior_interpolation: float = 0.5,
                           start: Table | None = None,
                           ) -> tuple[Table, tuple[float, ...]]:
    """EM estimation of t(target | source) over weighted pairs.

    Pairs with weight 0 contribute nothing, exactly as if omitted.  The
    M-step is constrained so each row's null-target mass never drops below
    ``null_floor``; since the constraint set contains the previous iterate,
    the training log-likelihood stays nondecreasing.  ``prior`` mixes a
    pretrained table into the initialization with weight
    ``prior_interpolation``; ``start`` continues from an existing table
    instead, and rows of ``start`` that see no new evidence are kept verbatim
    in the returned table.
    """
    if any(pair.weight < 0 for pair in pairs):
        raise ValueError("pair weights must be >= 0")
    active = [pair for pair in pairs if pair.weight > 0]
    if not active:
        raise EmptyTrainingSet("no training pairs with positive weight")
    if em_iterations < 1:
        raise ValueError("em_iterations must be >= 1")

    # Token ids: source id 0 is the null source, target id 0 the null target.
    src_ids: dict[str, int] = {}
    tgt_ids: dict[str, int] = {}
    cell_src: list[int] = []
    cell_tgt: list[int] = []
    cell_group: list[int] = []
    group_weight: list[float] = []
    group_logm: list[float] = []
    group = 0
    for pair in active:
        s_row = [0] + [src_ids.setdefault(tok, len(src_ids) + 1) for tok in pair.source]
        t_row = [tgt_ids.setdefault(tok, len(tgt_ids) + 1) for tok in pair.target] + [0]
        logm = math.log(len(s_row))
        for t_id in t_row:
            cell_src.extend(s_row)
            cell_tgt.extend([t_id] * len(s_row))
            cell_group.extend([group] * len(s_row))
            group_weight.append(pair.weight)
            group_logm.append(logm)
            group += 1

    n_src = len(src_ids) + 1
    n_tgt = len(tgt_ids) + 1
    src_tokens = [None] * n_src
    for tok, idx in src_ids.items():
        src_tokens[idx] = tok
    tgt_tokens = [None] * n_tgt
    for tok, idx in tgt_ids.items():
        tgt_tokens[idx] = tok

    c_src = np.asarray(cell_src, dtype=np.int64)
    c_tgt = np.asarray(cell_tgt, dtype=np.int64)
    c_group = np.asarray(cell_group, dtype=np.int64)
    g_weight = np.asarray(group_weight, dtype=np.float64)
    g_logm = np.asarray(group_logm, dtype=np.float64)

    param_keys, cell_param = np.unique(c_src * n_tgt + c_tgt, return_inverse=True)
    param_src = param_keys // n_tgt
    param_tgt = param_keys % n_tgt
    n_params = len(param_keys)

    # Identity flags: source token string equals the target token string.
    same_target = np.full(n_src, -1, dtype=np.int64)
    for idx in range(1, n_src):
        same_target[idx] = tgt_ids.get(src_tokens[idx], -1)
    identity = same_target[param_src] == param_tgt

    base = np.where(identity, 1.0 + identity_boost, 1.0)
    base = base / np.bincount(param_src, weights=base, minlength=n_src)[param_src]

    if start is not None:
        looked = _lookup(start, param_src, param_tgt, src_tokens, tgt_tokens)
        theta = looked + base * 1e-3
    elif prior is not None:
        looked = _lookup(prior, param_src, param_tgt, src_tokens, tgt_tokens)
        lam = prior_interpolation
        theta = (1.0 - lam) * base + lam * looked
    else:
        theta = base
    row_mass = np.bincount(param_src, weights=theta, minlength=n_src)
    dead = row_mass[param_src] <= 0.0
    if dead.any():
        theta = np.where(dead, base, theta)
        row_mass = np.bincount(param_src, weights=theta, minlength=n_src)
    theta = np.maximum(theta / row_mass[param_src], 1e-12)
    theta = _renormalize(theta, param_src, n_src)
    theta = _apply_null_floor(theta, param_src, param_tgt, n_src, null_floor)

    n_groups = group
    history = []
    for _ in range(em_iterations):
        value = theta[cell_param]
        denom = np.bincount(c_group, weights=value, minlength=n_groups)
        history.append(float(np.sum(g_weight * (np.log(denom) - g_logm))))
        posterior = value / denom[c_group]
        counts = np.bincount(
            cell_param, weights=posterior * g_weight[c_group], minlength=n_params
        )
        row_total = np.bincount(param_src, weights=counts, minlength=n_src)
        theta = counts / np.maximum(row_total[param_src], 1e-300)
        theta = _apply_null_floor(theta, param_src, param_tgt, n_src, null_floor)
        _check_row_sums(theta, param_src, n_src)

    # Trained rows fully replace same-source rows of a continuation start;
    # start rows that saw no new evidence are kept verbatim.
    table: Table = {}
    if start is not None:
        for src_tok, row in start.items():
            table[src_tok] = dict(row)
    trained_rows: Table = {}
    for k in np.lexsort((param_tgt, param_src)):
        s, t = int(param_src[k]), int(param_tgt[k])
        src_tok = src_tokens[s] if s != 0 else NULL_SOURCE
        tgt_tok = tgt_tokens[t] if t != 0 else NULL_TARGET
        trained_rows.setdefault(src_tok, {})[tgt_tok] = float(theta[k])
    table.update(trained_rows)
    return table, tuple(history)


def _lookup(table: Table, param_src, param_tgt, src_tokens, tgt_tokens) -> np.ndarray:
    values = np.zeros(len(param_src), dtype=np.float64)
    for k in range(len(param_src)):
        s, t = int(param_src[k]), int(param_tgt[k])
        src_tok = src_tokens[s] if s != 0 else NULL_SOURCE
        tgt_tok = tgt_tokens[t] if t != 0 else NULL_TARGET
        row = table.get(src_tok)
        if row:
            values[k] = row.get(tgt_tok, 0.0)
    return values


def _renormalize(theta, param_src, n_src):
    mass = np.bincount(param_src, weights=theta, minlength=n_src)
    return theta / mass[param_src]


def _apply_null_floor(theta, param_src, param_tgt, n_src, floor):
    """Constrained M-step projection: t(null | s) >= floor, rows renormalized."""
    null_mask = param_tgt == 0
    null_value = np.zeros(n_src)
    null_value[param_src[null_mask]] = theta[null_mask]
    has_null = np.zeros(n_src, dtype=bool)
    has_null[param_src[null_mask]] = True
    deficient = has_null & (null_value < floor)
    if not deficient.any():
        return theta
    scale = np.ones(n_src)
    nonnull = 1.0 - null_value[deficient]
    scale[deficient] = np.where(nonnull > 0, (1.0 - floor) / nonnull, 1.0)
    theta = theta * scale[param_src]
    fix = null_mask & deficient[param_src]
    theta[fix] = floor
    return theta


def _check_row_sums(theta, param_src, n_src):
    sums = np.bincount(param_src, weights=theta, minlength=n_src)
    worst = float(np.max(np.abs(sums - 1.0)))
    if worst > 1e-6:
        raise RuntimeError(f"lexical table row sums off by {worst}")


def train_model(pairs: Sequence[TrainingPair], em_iterations: int = 20,
                model_seed: int = 0, *, source_language: str = "",
                target_language: str = "", identity_boost: float = 1.0,
                null_floor: float = 1e-4, prior: Table | None = None,
                prior_interpolation: float = 0.5,
                continue_from: LexicalModel | None = None,
                version: int = 1) -> LexicalModel:
    """Train a lexical model; deterministic given (pairs, iterations, seed).

    ``model_seed`` is recorded in the model and its serialization so future
    stochastic backends stay reproducible; the EM estimator itself is exact
    and draws no random numbers.
    """
    table, history = estimate_lexical_table(
        pairs, em_iterations,
        identity_boost=identity_boost, null_floor=null_floor,
        prior=prior, prior_interpolation=prior_interpolation,
        start=continue_from.table if continue_from is not None else None,
    )
    source_vocab, target_vocab = _real_vocab([p for p in pairs if p.weight > 0])
    if continue_from is not None:
        source_vocab |= continue_from.source_vocab
        target_vocab |= continue_from.target_vocab
    return LexicalModel(
        source_language=source_language or (continue_from.source_language if continue_from else ""),
        target_language=target_language or (continue_from.target_language if continue_from else ""),
        table=table,
        source_vocab=frozenset(source_vocab),
        target_vocab=frozenset(target_vocab),
        version=version,
        em_iterations=em_iterations,
        model_seed=model_seed,
        log_likelihood=history,
    )


def translate(model: LexicalModel, tokens: Sequence[str]) -> list[str]:
    """Monotone greedy decode: argmax target per source token.

    Label tokens are skipped, placeholders and out-of-vocabulary tokens are
    copied through verbatim, and a token is dropped when the null target
    strictly beats every real candidate.  Placeholders never come out of the
    table, only out of the input.
    """
    if model is None or not model.is_trained():
        raise UntrainedModel("translate needs a trained model")
    output: list[str] = []
    for token in tokens:
        if is_label(token):
            continue
        if is_placeholder(token):
            output.append(token)
            continue
        row = model.table.get(token)
        if row is None:
            output.append(token)
            continue
        best_token = None
        best_p = 0.0
        null_p = row.get(NULL_TARGET, 0.0)
        for target, p in row.items():
            if target == NULL_TARGET or is_placeholder(target) or is_label(target):
                continue
            if best_token is None or p > best_p or (p == best_p and target < best_token):
                best_token, best_p = target, p
        if best_token is None or null_p > best_p:
            continue
        output.append(best_token)
    return output


def unk_map_pairs(pairs: Iterable[TrainingPair], source_vocab: frozenset[str],
                  target_vocab: frozenset[str]) -> list[TrainingPair]:
    """Map tokens outside the given vocabularies to the UNK token."""
    mapped = []
    for pair in pairs:
        mapped.append(TrainingPair(
            tuple(t if t in source_vocab else UNK for t in pair.source),
            tuple(t if t in target_vocab else UNK for t in pair.target),
            pair.weight,
        ))
    return mapped


class EmLexicalBackend:
    """Stateful single-direction wrapper around the EM estimator.

    Retraining is always from scratch on the accumulated pair set;
    ``pretrain`` fits a prior table that seeds the next training's
    initialization.
    """

    def __init__(self, source_language: str, target_language: str,
                 config: BackendConfig | None = None,
                 hooks: BackendHooks | None = None):
        self.source_language = source_language
        self.target_language = target_language
        self.config = config or BackendConfig()
        self.hooks = hooks or BackendHooks()
        self._prior: Table | None = None
        self._pairs: list[TrainingPair] = []
        self._version = 0

    def pretrain(self, neighbor_pairs: Sequence[TrainingPair]) -> None:
        table, _ = estimate_lexical_table(
            neighbor_pairs, self.config.pretrain_em_iterations,
            identity_boost=self.config.identity_boost,
            null_floor=self.config.null_floor,
        )
        self._prior = table
        self.hooks.pretrain_invocations += 1

    def train(self, pairs: Sequence[TrainingPair],
              em_iterations: int | None = None,
              model_seed: int | None = None) -> LexicalModel:
        self._pairs = list(pairs)
        self._version += 1
        self.hooks.train_invocations += 1
        return train_model(
            self._pairs,
            em_iterations if em_iterations is not None else self.config.em_iterations,
            model_seed if model_seed is not None else self.config.model_seed,
            source_language=self.source_language,
            target_language=self.target_language,
            identity_boost=self.config.identity_boost,
            null_floor=self.config.null_floor,
            prior=self._prior,
            prior_interpolation=self.config.pretrain_interpolation,
            version=self._version,
        )

    def translate(self, model: LexicalModel, tokens: Sequence[str]) -> list[str]:
        return translate(model, tokens)

    def update_vocabulary(self, model: LexicalModel,
                          new_pairs: Sequence[TrainingPair],
                          keep_old_vocab: bool = False) -> LexicalModel:
        """Fold new pairs in and retrain from scratch.

        With ``keep_old_vocab`` the vocabulary is frozen at the model's
        current state and unseen tokens in the new pairs become UNK;
        otherwise the vocabulary simply extends.
        """
        if model is None or not model.is_trained():
            raise UntrainedModel("update_vocabulary needs a trained model")
        if keep_old_vocab:
            new_pairs = unk_map_pairs(
                new_pairs,
                model.source_vocab | {UNK},
                model.target_vocab | {UNK},
            )
        self._pairs = self._pairs + list(new_pairs)
        self._version += 1
        self.hooks.train_invocations += 1
        return train_model(
            self._pairs,
            self.config.em_iterations,
            self.config.model_seed,
            source_language=self.source_language,
            target_language=self.target_language,
            identity_boost=self.config.identity_boost,
            null_floor=self.config.null_floor,
            prior=self._prior,
            prior_interpolation=self.config.pretrain_interpolation,
            version=self._version,
        )


def vocabulary_hash(model: LexicalModel) -> str:
    digest = hashlib.sha256()
    for token in sorted(model.source_vocab):
        digest.update(token.encode("utf-8") + b"\x00")
    digest.update(b"\x01")
    for token in sorted(model.target_vocab):
        digest.update(token.encode("utf-8") + b"\x00")
    return digest.hexdigest()


def save_model(model: LexicalModel, path: str | Path) -> None:
    """Versioned TSV dump: header lines then source<TAB>target<TAB>prob."""
    lines = [
        "# lexical-model v1",
        f"# source_language = {model.source_language}",
        f"# target_language = {model.target_language}",
        f"# em_iterations = {model.em_iterations}",
        f"# model_seed = {model.model_seed}",
        f"# version = {model.version}",
        f"# vocabulary_hash = {vocabulary_hash(model)}",
        "# log_likelihood = " + ",".join(repr(v) for v in model.log_likelihood),
    ]
    for source in sorted(model.table):
        row = model.table[source]
        for target in sorted(row):
            lines.append(f"{source}\t{target}\t{row[target]!r}")
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")


def load_model(path: str | Path) -> LexicalModel:
    text = Path(path).read_text(encoding="utf-8").splitlines()
    if not text or text[0] != "# lexical-model v1":
        raise ModelFormatError("not a lexical model file")
    header: dict[str, str] = {}
    body_start = 0
    for i, line in enumerate(text):
        if not line.startswith("# "):
            body_start = i
            break
        if " = " in line:
            key, _, value = line[2:].partition(" = ")
            header[key] = value
        body_start = i + 1
    table: Table = {}
    for line in text[body_start:]:
        if not line:
            continue
        parts = line.split("\t")
        if len(parts) != 3:
            raise ModelFormatError(f"bad table row: {line!r}")
        table.setdefault(parts[0], {})[parts[1]] = float(parts[2])
    source_vocab = frozenset(t for t in table if t != NULL_SOURCE)
    target_vocab = frozenset(
        t for row in table.values() for t in row if t != NULL_TARGET
    )
    model = LexicalModel(
        source_language=header.get("source_language", ""),
        target_language=header.get("target_language", ""),
        table=table,
        source_vocab=source_vocab,
        target_vocab=target_vocab,
        version=int(header.get("version", "1")),
        em_iterations=int(header.get("em_iterations", "0")),
        model_seed=int(header.get("model_seed", "0")),
        log_likelihood=tuple(
            float(v) for v in header.get("log_likelihood", "").split(",") if v
        ),
    )
    expected = header.get("vocabulary_hash")
    if expected is not None and expected != vocabulary_hash(model):
        raise ModelFormatError("vocabulary hash mismatch")
    return model
