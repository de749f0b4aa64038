"""Named-entity lexicon, placeholder tagging and restoration.

Entities are replaced by ``__NE0``, ``__NE1``, ... placeholders numbered
left to right before translation, and swapped back for target-language
surface forms afterwards.  The lexicon is a TSV of
``entity_id<TAB>language_code<TAB>surface_form`` rows; a surface form may
span several tokens.
"""

import unicodedata
from collections.abc import Sequence
from dataclasses import dataclass
from pathlib import Path

from .errors import AlreadyLabeled, DanglingPlaceholder, UnknownLanguage
from .tokens import (
    is_label,
    placeholder,
    placeholder_ordinal,
    source_label,
    target_label,
)


@dataclass(frozen=True)
class Binding:
    ordinal: int
    entity_id: int
    surface: tuple[str, ...]  # source-language tokens that were replaced


@dataclass(frozen=True)
class TaggedSentence:
    tokens: tuple[str, ...]
    bindings: tuple[Binding, ...]

    def binding_map(self) -> dict[int, Binding]:
        return {binding.ordinal: binding for binding in self.bindings}


class LexiconTable:
    """Entity surface forms per language; first listed form is preferred."""

    def __init__(self, entries: dict[int, dict[str, tuple[str, ...]]]):
        # entries: entity_id -> language -> ordered surface forms
        self.entries = entries
        self._match_cache: dict[str, tuple[dict[tuple[str, ...], int], int]] = {}

    @property
    def languages(self) -> set[str]:
        found = set()
        for per_language in self.entries.values():
            found.update(per_language)
        return found

    def forms(self, entity_id: int, language: str) -> tuple[str, ...]:
        return self.entries.get(entity_id, {}).get(language, ())

    def match_index(self, language: str) -> tuple[dict[tuple[str, ...], int], int]:
        """Token-tuple -> entity id for one language, plus the longest span.

        When two entities share a surface form the lowest entity id wins.
        """
        if language not in self._match_cache:
            index: dict[tuple[str, ...], int] = {}
            longest = 0
            for entity_id in sorted(self.entries):
                for form in self.entries[entity_id].get(language, ()):
                    span = tuple(form.split())
                    longest = max(longest, len(span))
                    if span not in index:
                        index[span] = entity_id
            self._match_cache[language] = (index, longest)
        return self._match_cache[language]

    @classmethod
    def load(cls, path: str | Path) -> "LexiconTable":
        entries: dict[int, dict[str, tuple[str, ...]]] = {}
        for lineno, raw in enumerate(
            Path(path).read_text(encoding="utf-8").splitlines(), 1
        ):
            if not raw.strip() or raw.startswith("#"):
                continue
            parts = raw.split("\t")
            if len(parts) != 3:
                raise ValueError(
                    f"{path}: line {lineno}: expected entity_id<TAB>language<TAB>surface"
                )
            entity_id = int(parts[0])
            language = parts[1].lower()
            surface = unicodedata.normalize("NFC", parts[2].strip())
            per_language = entries.setdefault(entity_id, {})
            per_language[language] = per_language.get(language, ()) + (surface,)
        return cls(entries)

    def save(self, path: str | Path) -> None:
        rows = []
        for entity_id in sorted(self.entries):
            for language in sorted(self.entries[entity_id]):
                for form in self.entries[entity_id][language]:
                    rows.append(f"{entity_id}\t{language}\t{form}")
        Path(path).write_text("\n".join(rows) + "\n", encoding="utf-8")


def tag_entities(sentence: Sequence[str], lexicon: LexiconTable,
                 language: str) -> TaggedSentence:
    """Replace entity mentions with placeholders, left to right.

    Longest match wins at each position; matching is case-sensitive over
    NFC-normalized tokens.
    """
    if language not in lexicon.languages:
        raise UnknownLanguage(language)
    index, longest = lexicon.match_index(language)
    tokens: list[str] = []
    bindings: list[Binding] = []
    i = 0
    n = len(sentence)
    while i < n:
        matched = False
        for span_len in range(min(longest, n - i), 0, -1):
            span = tuple(sentence[i:i + span_len])
            entity_id = index.get(span)
            if entity_id is not None:
                ordinal = len(bindings)
                tokens.append(placeholder(ordinal))
                bindings.append(Binding(ordinal, entity_id, span))
                i += span_len
                matched = True
                break
        if not matched:
            tokens.append(sentence[i])
            i += 1
    return TaggedSentence(tuple(tokens), tuple(bindings))


def restore_entities(tagged: TaggedSentence, target_language: str,
                     lexicon: LexiconTable) -> list[str]:
    """Swap placeholders for target-language surface forms.

    Falls back to the original source surface when the lexicon has no form
    for the target language.  A placeholder without a binding raises
    DanglingPlaceholder.
    """
    bindings = tagged.binding_map()
    restored: list[str] = []
    for token in tagged.tokens:
        ordinal = placeholder_ordinal(token)
        if ordinal is None:
            restored.append(token)
            continue
        binding = bindings.get(ordinal)
        if binding is None:
            raise DanglingPlaceholder(token)
        restored.extend(_surface_for(binding, target_language, lexicon))
    return restored


def restore_translated(tokens: Sequence[str], bindings: Sequence[Binding],
                       target_language: str, lexicon: LexiconTable,
                       ) -> tuple[list[str], int]:
    """Tolerant restoration for backend output.

    Placeholders without a source-side binding are dropped rather than
    raised, and the number dropped is returned for diagnostics.
    """
    by_ordinal = {binding.ordinal: binding for binding in bindings}
    restored: list[str] = []
    dropped = 0
    for token in tokens:
        ordinal = placeholder_ordinal(token)
        if ordinal is None:
            restored.append(token)
            continue
        binding = by_ordinal.get(ordinal)
        if binding is None:
            dropped += 1
            continue
        restored.extend(_surface_for(binding, target_language, lexicon))
    return restored, dropped


def _surface_for(binding: Binding, target_language: str,
                 lexicon: LexiconTable) -> tuple[str, ...]:
    forms = lexicon.forms(binding.entity_id, target_language)
    if forms:
        return tuple(forms[0].split())
    return binding.surface


def prefix_language_labels(tokens: Sequence[str], source: str,
                           target: str) -> list[str]:
    """Prepend ``__opt_src_<source>`` and ``__opt_tgt_<target>`` labels."""
    if any(is_label(token) for token in tokens):
        raise AlreadyLabeled("input already carries language label tokens")
    return [source_label(source), target_label(target), *tokens]
