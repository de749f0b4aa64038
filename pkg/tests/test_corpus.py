"""Corpus loading, book structure, splits, and round-trips."""

import pytest

from conftest import build_corpus
from lowres_loop.corpus import (
    Book,
    BookIndex,
    ParallelCorpus,
    lines_of_book,
    load_corpus,
    make_split,
    save_corpus,
    tokenize,
)
from lowres_loop.errors import (
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


# -- tokenize ---------------------------------------------------------------


def test_tokenize_whitespace_split():
    assert tokenize("  the   quick\tfox ") == ("the", "quick", "fox")


def test_tokenize_empty_line():
    assert tokenize("") == ()
    assert tokenize("    ") == ()


def test_tokenize_nfc_normalization():
    composed = "café"          # é as a single code point
    decomposed = "café"       # e + combining acute
    assert tokenize(decomposed) == (composed,)


# -- BookIndex ----------------------------------------------------------------


def test_book_index_accepts_contiguous_books():
    index = BookIndex([Book("a", 0, 3), Book("b", 3, 7)])
    assert index.n_total == 7
    assert len(index) == 2
    assert index.book("b").start == 3


def test_book_index_rejects_gap_overlap_duplicates_and_empty():
    with pytest.raises(MalformedBookIndex):
        BookIndex([Book("a", 0, 3), Book("b", 4, 7)])  # gap
    with pytest.raises(MalformedBookIndex):
        BookIndex([Book("a", 0, 3), Book("b", 2, 7)])  # overlap
    with pytest.raises(MalformedBookIndex):
        BookIndex([Book("a", 0, 3), Book("a", 3, 7)])  # duplicate name
    with pytest.raises(MalformedBookIndex):
        BookIndex([Book("a", 0, 0)])  # empty book
    with pytest.raises(MalformedBookIndex):
        BookIndex([])


def test_book_index_unknown_book():
    index = BookIndex([Book("a", 0, 3)])
    with pytest.raises(UnknownBook):
        index.book("missing")


def test_merge_small_into_successor():
    index = BookIndex([Book("a", 0, 1), Book("b", 1, 6)]).merge_small(2)
    assert [(b.name, b.start, b.end) for b in index] == [("b", 0, 6)]


def test_merge_small_final_book_into_predecessor():
    index = BookIndex([Book("a", 0, 5), Book("b", 5, 6)]).merge_small(2)
    assert [(b.name, b.start, b.end) for b in index] == [("a", 0, 6)]


def test_merge_small_keeps_large_books():
    books = [Book("a", 0, 4), Book("b", 4, 8)]
    index = BookIndex(books).merge_small(2)
    assert [b.name for b in index] == ["a", "b"]


# -- load / save ---------------------------------------------------------------


def _write_corpus_dir(root, lines_by_language, books, split_seed=5):
    root.mkdir(parents=True, exist_ok=True)
    entries = [f"book_index = books.tsv", f"split_seed = {split_seed}"]
    (root / "books.tsv").write_text(
        "\n".join(f"{n}\t{s}\t{e}" for n, s, e in books) + "\n", encoding="utf-8"
    )
    for language, lines in lines_by_language.items():
        filename = f"{language}.txt"
        (root / filename).write_text(
            "\n".join(" ".join(line) for line in lines) + "\n", encoding="utf-8"
        )
        entries.append(f"{language} = {filename}")
    (root / "manifest.txt").write_text("\n".join(entries) + "\n", encoding="utf-8")
    return root


def test_load_corpus_basic(tmp_path):
    lines = [("a", "b"), ("c",), (), ("d", "e", "f")]
    root = _write_corpus_dir(
        tmp_path / "c1", {"en": lines, "xx": lines}, [("b0", 0, 2), ("b1", 2, 4)]
    )
    corpus = load_corpus(root)
    assert corpus.languages == ("en", "xx")
    assert corpus.n_total == 4
    assert corpus.lines["en"][2] == ()  # empty lines are permitted
    assert corpus.split_seed == 5
    assert [b.name for b in corpus.book_index] == ["b0", "b1"]


def test_load_corpus_merges_small_books(tmp_path):
    lines = [("a",)] * 5
    root = _write_corpus_dir(
        tmp_path / "c2", {"en": lines}, [("tiny", 0, 1), ("rest", 1, 5)]
    )
    corpus = load_corpus(root, min_book_size=2)
    assert [b.name for b in corpus.book_index] == ["rest"]


def test_load_corpus_rejects_reserved_tokens(tmp_path):
    root = _write_corpus_dir(
        tmp_path / "c3", {"en": [("ok", "__NE0")] * 2}, [("b", 0, 2)]
    )
    with pytest.raises(ReservedToken):
        load_corpus(root)


def test_load_corpus_rejects_mismatched_line_counts(tmp_path):
    root = _write_corpus_dir(
        tmp_path / "c4",
        {"en": [("a",), ("b",)], "xx": [("a",), ("b",), ("c",)]},
        [("b", 0, 2)],
    )
    with pytest.raises(MismatchedLineCount):
        load_corpus(root)


def test_load_corpus_manifest_errors(tmp_path):
    root = tmp_path / "c5"
    root.mkdir()
    (root / "manifest.txt").write_text("split_seed = 1\n", encoding="utf-8")
    with pytest.raises(MalformedManifest):
        load_corpus(root)  # missing book_index
    (root / "manifest.txt").write_text("book_index = books.tsv\n", encoding="utf-8")
    with pytest.raises(MalformedManifest):
        load_corpus(root)  # missing split_seed
    (root / "manifest.txt").write_text("junk line\n", encoding="utf-8")
    with pytest.raises(MalformedManifest):
        load_corpus(root)


def test_load_corpus_duplicate_language(tmp_path):
    root = _write_corpus_dir(tmp_path / "c6", {"en": [("a",)] * 2}, [("b", 0, 2)])
    manifest = root / "manifest.txt"
    manifest.write_text(
        manifest.read_text(encoding="utf-8") + "en = en.txt\n", encoding="utf-8"
    )
    with pytest.raises(DuplicateLanguage):
        load_corpus(root)


def test_load_corpus_no_languages(tmp_path):
    root = tmp_path / "c7"
    root.mkdir()
    (root / "books.tsv").write_text("b\t0\t2\n", encoding="utf-8")
    (root / "manifest.txt").write_text(
        "book_index = books.tsv\nsplit_seed = 0\n", encoding="utf-8"
    )
    with pytest.raises(EmptyCorpus):
        load_corpus(root)


def test_save_load_round_trip(tmp_path):
    lines = {
        "en": [("a", "b"), ("c", "d"), (), ("e",)],
        "fr": [("x",), ("y", "z"), ("w",), ("v", "u")],
    }
    corpus = build_corpus(lines, book_sizes=[2, 2], split_seed=9)
    save_corpus(corpus, tmp_path / "out")
    reloaded = load_corpus(tmp_path / "out")
    assert reloaded.languages == corpus.languages
    assert reloaded.lines == corpus.lines
    assert reloaded.split_seed == 9
    assert [(b.name, b.start, b.end) for b in reloaded.book_index] == [
        (b.name, b.start, b.end) for b in corpus.book_index
    ]


def test_paper_scale_corpus_dimensions(tmp_path):
    # Three language files of 31,170 lines with a 66-book index.
    n_total = 31_170
    root = tmp_path / "paper_scale"
    root.mkdir()
    body = "\n".join(f"tok{i % 97}" for i in range(n_total)) + "\n"
    entries = ["book_index = books.tsv", "split_seed = 3"]
    for language in ("aaa", "bbb", "ccc"):
        (root / f"{language}.txt").write_text(body, encoding="utf-8")
        entries.append(f"{language} = {language}.txt")
    bounds = [round(k * n_total / 66) for k in range(67)]
    (root / "books.tsv").write_text(
        "\n".join(
            f"book{k:02d}\t{bounds[k]}\t{bounds[k + 1]}" for k in range(66)
        ) + "\n",
        encoding="utf-8",
    )
    (root / "manifest.txt").write_text("\n".join(entries) + "\n", encoding="utf-8")
    corpus = load_corpus(root)
    assert corpus.n_total == n_total
    assert len(corpus.languages) == 3
    assert len(corpus.book_index) == 66


def test_require_language():
    corpus = build_corpus({"en": [("a",), ("b",)]})
    corpus.require_language("en")
    with pytest.raises(UnknownLanguage):
        corpus.require_language("xx")


# -- make_split ------------------------------------------------------------------


def test_make_split_paper_proportions():
    # N=31,170 with a 1,093-line seed at validation fraction 0.057 gives the
    # 1,031 / 62 / 30,077 split.
    corpus = build_corpus({"en": [("t",)] * 31_170}, split_seed=17)
    seed = list(range(0, 31_170, 28))[:1093]
    assert len(seed) == 1093
    split = make_split(corpus, seed, 0.057)
    assert len(split.validation) == 62
    assert len(split.train) == 1031
    assert len(split.test) == 30_077
    assert split.train | split.validation == frozenset(seed)
    assert split.test == frozenset(range(31_170)) - frozenset(seed)
    assert not (split.train & split.validation)


def test_make_split_clamps_to_one_validation_line():
    corpus = build_corpus({"en": [("t",)] * 4})
    split = make_split(corpus, {0, 1}, 0.1)  # round(0.2) == 0 -> clamped to 1
    assert len(split.validation) == 1
    assert len(split.train) == 1


def test_make_split_never_consumes_all_seed_lines():
    corpus = build_corpus({"en": [("t",)] * 4})
    split = make_split(corpus, {0, 1}, 0.99)  # round(1.98) == 2 -> clamped to 1
    assert len(split.train) == 1
    assert len(split.validation) == 1


def test_make_split_deterministic_per_split_seed():
    corpus_a = build_corpus({"en": [("t",)] * 100}, split_seed=1)
    corpus_b = build_corpus({"en": [("t",)] * 100}, split_seed=1)
    corpus_c = build_corpus({"en": [("t",)] * 100}, split_seed=2)
    seed = range(0, 60)
    split_a = make_split(corpus_a, seed, 0.25)
    split_b = make_split(corpus_b, seed, 0.25)
    split_c = make_split(corpus_c, seed, 0.25)
    assert split_a == split_b
    assert split_a.validation != split_c.validation


def test_make_split_errors():
    corpus = build_corpus({"en": [("t",)] * 10})
    with pytest.raises(DegenerateSeed):
        make_split(corpus, [], 0.1)
    with pytest.raises(DegenerateSeed):
        make_split(corpus, [3], 0.1)  # cannot split a single line
    with pytest.raises(SeedOutOfRange):
        make_split(corpus, [0, 10], 0.1)
    with pytest.raises(SeedOutOfRange):
        make_split(corpus, [-1, 2], 0.1)
    with pytest.raises(DegenerateSeed):
        make_split(corpus, [0, 1], 0.0)
    with pytest.raises(DegenerateSeed):
        make_split(corpus, [0, 1], 1.0)


# -- lines_of_book -----------------------------------------------------------------


def test_lines_of_book():
    corpus = build_corpus({"en": [("t",)] * 6}, book_sizes=[2, 4])
    assert lines_of_book(corpus, "b00") == [0, 1]
    assert lines_of_book(corpus, "b01") == [2, 3, 4, 5]
    with pytest.raises(UnknownBook):
        lines_of_book(corpus, "nope")
