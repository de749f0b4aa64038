"""Line-aligned multilingual corpora over a fixed book structure.

A corpus lives in one directory: one UTF-8 text file per language (same line
count everywhere, one sentence per line, empty lines allowed), a book index
TSV (``name<TAB>start<TAB>end``, 0-based, end-exclusive, contiguous), and a
manifest mapping language codes to the text files plus ``book_index`` and
``split_seed`` entries.
"""

import random
import unicodedata
from collections.abc import Iterable
from dataclasses import dataclass
from pathlib import Path

from .errors import (
    DegenerateSeed,
    DuplicateLanguage,
    EmptyCorpus,
    MalformedBookIndex,
    MalformedManifest,
    MismatchedLineCount,
    ReservedToken,
    SeedOutOfRange,
    UnknownBook,
    UnknownLanguage,
)
from .kvfile import read_kv_file, write_kv_file
from .tokens import is_reserved

MANIFEST_BOOK_INDEX_KEY = "book_index"
MANIFEST_SPLIT_SEED_KEY = "split_seed"
DEFAULT_MIN_BOOK_SIZE = 2


@dataclass(frozen=True)
class Book:
    name: str
    start: int
    end: int  # exclusive

    def __len__(self) -> int:
        return self.end - self.start


class BookIndex:
    """Ordered, contiguous, non-overlapping books covering [0, n_total)."""

    def __init__(self, books: Iterable[Book]):
        self.books = tuple(books)
        if not self.books:
            raise MalformedBookIndex("book index is empty")
        names = set()
        position = 0
        for book in self.books:
            if book.name in names:
                raise MalformedBookIndex(f"duplicate book name {book.name!r}")
            names.add(book.name)
            if book.start != position:
                raise MalformedBookIndex(
                    f"book {book.name!r} starts at {book.start}, expected {position}"
                )
            if book.end <= book.start:
                raise MalformedBookIndex(f"book {book.name!r} is empty")
            position = book.end
        self._by_name = {book.name: book for book in self.books}

    @property
    def n_total(self) -> int:
        return self.books[-1].end

    def __iter__(self):
        return iter(self.books)

    def __len__(self) -> int:
        return len(self.books)

    def book(self, name: str) -> Book:
        try:
            return self._by_name[name]
        except KeyError:
            raise UnknownBook(name) from None

    def merge_small(self, min_book_size: int) -> "BookIndex":
        """Merge books shorter than ``min_book_size`` into their successor.

        A short final book is merged into its predecessor instead; the
        surviving book keeps the downstream (or remaining) name.
        """
        books = list(self.books)
        merged = []
        carry_start = None
        for i, book in enumerate(books):
            start = carry_start if carry_start is not None else book.start
            if book.end - start < min_book_size and i + 1 < len(books):
                carry_start = start
                continue
            merged.append(Book(book.name, start, book.end))
            carry_start = None
        if len(merged) > 1 and len(merged[-1]) < min_book_size:
            tail = merged.pop()
            prev = merged.pop()
            merged.append(Book(prev.name, prev.start, tail.end))
        return BookIndex(merged)


@dataclass
class ParallelCorpus:
    languages: tuple[str, ...]  # manifest order
    lines: dict[str, list[tuple[str, ...]]]
    book_index: BookIndex
    split_seed: int

    @property
    def n_total(self) -> int:
        return self.book_index.n_total

    def require_language(self, language: str) -> None:
        if language not in self.lines:
            raise UnknownLanguage(language)


@dataclass(frozen=True)
class SplitAssignment:
    train: frozenset[int]
    validation: frozenset[int]
    test: frozenset[int]


def tokenize(line: str) -> tuple[str, ...]:
    """NFC-normalize then whitespace-split; empty lines give empty tuples."""
    return tuple(unicodedata.normalize("NFC", line).split())


def _read_language_file(path: Path, language: str) -> list[tuple[str, ...]]:
    text = path.read_text(encoding="utf-8")
    raw_lines = text.split("\n")
    if raw_lines and raw_lines[-1] == "":
        raw_lines.pop()
    lines = []
    for lineno, raw in enumerate(raw_lines):
        tokens = tokenize(raw)
        for token in tokens:
            if is_reserved(token):
                raise ReservedToken(
                    f"{language} line {lineno}: token {token!r} is reserved"
                )
        lines.append(tokens)
    return lines


def _read_book_index(path: Path) -> BookIndex:
    books = []
    for lineno, raw in enumerate(path.read_text(encoding="utf-8").splitlines(), 1):
        if not raw.strip():
            continue
        parts = raw.split("\t")
        if len(parts) != 3:
            raise MalformedBookIndex(f"line {lineno}: expected 3 tab-separated fields")
        name, start_s, end_s = parts
        try:
            start, end = int(start_s), int(end_s)
        except ValueError:
            raise MalformedBookIndex(f"line {lineno}: bad line range") from None
        books.append(Book(name, start, end))
    return BookIndex(books)


def load_corpus(root_path: str | Path, manifest: str = "manifest.txt",
                min_book_size: int = DEFAULT_MIN_BOOK_SIZE) -> ParallelCorpus:
    """Load a corpus directory through its manifest.

    Books shorter than ``min_book_size`` lines are merged into a neighbor at
    load so every book can contribute a training signal on its own.
    """
    root = Path(root_path)
    manifest_path = Path(manifest)
    if not manifest_path.is_absolute():
        manifest_path = root / manifest_path
    try:
        entries = read_kv_file(manifest_path)
    except ValueError as exc:
        raise MalformedManifest(str(exc)) from None

    book_index_path = None
    split_seed = None
    language_files: dict[str, Path] = {}
    order: list[str] = []
    for key, value in entries:
        if key == MANIFEST_BOOK_INDEX_KEY:
            book_index_path = root / value
        elif key == MANIFEST_SPLIT_SEED_KEY:
            try:
                split_seed = int(value)
            except ValueError:
                raise MalformedManifest(f"split_seed must be an integer, got {value!r}") from None
        else:
            language = key.lower()
            if language in language_files:
                raise DuplicateLanguage(language)
            language_files[language] = root / value
            order.append(language)

    if book_index_path is None:
        raise MalformedManifest("manifest is missing a book_index entry")
    if split_seed is None:
        raise MalformedManifest("manifest is missing a split_seed entry")
    if not order:
        raise EmptyCorpus("manifest lists no languages")

    book_index = _read_book_index(book_index_path).merge_small(min_book_size)
    n_total = book_index.n_total
    lines = {}
    for language in order:
        loaded = _read_language_file(language_files[language], language)
        if len(loaded) != n_total:
            raise MismatchedLineCount(language, n_total, len(loaded))
        lines[language] = loaded
    if n_total == 0:
        raise EmptyCorpus("corpus has no lines")
    return ParallelCorpus(tuple(order), lines, book_index, split_seed)


def save_corpus(corpus: ParallelCorpus, root_path: str | Path,
                manifest: str = "manifest.txt") -> Path:
    """Write a corpus back out; reloading yields an identical structure."""
    root = Path(root_path)
    root.mkdir(parents=True, exist_ok=True)
    entries = [
        (MANIFEST_BOOK_INDEX_KEY, "books.tsv"),
        (MANIFEST_SPLIT_SEED_KEY, str(corpus.split_seed)),
    ]
    book_lines = [
        f"{book.name}\t{book.start}\t{book.end}" for book in corpus.book_index
    ]
    (root / "books.tsv").write_text("\n".join(book_lines) + "\n", encoding="utf-8")
    for language in corpus.languages:
        filename = f"text.{language}.txt"
        entries.append((language, filename))
        text = "\n".join(" ".join(line) for line in corpus.lines[language])
        (root / filename).write_text(text + "\n", encoding="utf-8")
    manifest_path = root / manifest
    write_kv_file(manifest_path, entries, header="corpus manifest")
    return manifest_path


def make_split(corpus: ParallelCorpus, seed_lines: Iterable[int],
               validation_fraction: float) -> SplitAssignment:
    """Split line indices into train/validation/test around a seed sample.

    Validation lines are the tail of a deterministic shuffle of the seed,
    keyed by the corpus split seed; train is the rest of the seed and test is
    everything outside it.
    """
    seed = sorted(set(seed_lines))
    if not seed:
        raise DegenerateSeed("seed sample is empty")
    if seed[0] < 0 or seed[-1] >= corpus.n_total:
        raise SeedOutOfRange(
            f"seed indices must lie in [0, {corpus.n_total}), got {seed[0]}..{seed[-1]}"
        )
    if not 0.0 < validation_fraction < 1.0:
        raise DegenerateSeed(
            f"validation_fraction must be in (0, 1), got {validation_fraction}"
        )
    if len(seed) < 2:
        raise DegenerateSeed("seed sample needs at least 2 lines to split")

    n_validation = round(validation_fraction * len(seed))
    n_validation = min(max(n_validation, 1), len(seed) - 1)
    shuffled = list(seed)
    random.Random(corpus.split_seed).shuffle(shuffled)
    validation = frozenset(shuffled[-n_validation:])
    train = frozenset(seed) - validation
    test = frozenset(range(corpus.n_total)) - frozenset(seed)
    return SplitAssignment(train=train, validation=validation, test=test)


def lines_of_book(corpus: ParallelCorpus, book_name: str) -> list[int]:
    book = corpus.book_index.book(book_name)
    return list(range(book.start, book.end))
