import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))  # make oracles importable

from lowres_loop.corpus import Book, BookIndex, ParallelCorpus


def build_corpus(lines_by_language, book_sizes=None, split_seed=0):
    """Assemble an in-memory corpus from {language: [token tuples]}."""
    languages = tuple(lines_by_language)
    n = len(next(iter(lines_by_language.values())))
    if book_sizes is None:
        book_sizes = [n]
    books = []
    start = 0
    for i, size in enumerate(book_sizes):
        books.append(Book(f"b{i:02d}", start, start + size))
        start += size
    assert start == n, "book sizes must cover all lines"
    return ParallelCorpus(
        languages=languages,
        lines={lang: [tuple(line) for line in lines]
               for lang, lines in lines_by_language.items()},
        book_index=BookIndex(tuple(books)),
        split_seed=split_seed,
    )


@pytest.fixture(scope="session")
def corpus_dir(tmp_path_factory):
    """Session-scoped scratch directory for generated corpora."""
    return tmp_path_factory.mktemp("corpora")
