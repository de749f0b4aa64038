"""Command-line interface: subcommand flows and the exit-code contract."""

import hashlib
import json
from pathlib import Path

import pytest

from lowres_loop.backend import load_model, translate
from lowres_loop.cli import main
from lowres_loop.corpus import lines_of_book, load_corpus
from lowres_loop.loop import ExperimentConfig, SelectionStrategy, select_seed
from lowres_loop.report import FAMILY_TSV_HEADER


def run_cli(argv, capsys):
    code = main(argv)
    captured = capsys.readouterr()
    return code, captured.out, captured.err


def _fingerprint(root: Path) -> dict[str, str]:
    return {
        p.name: hashlib.sha256(p.read_bytes()).hexdigest()
        for p in sorted(root.iterdir())
    }


@pytest.fixture(scope="module")
def corpus_dir(tmp_path_factory):
    root = tmp_path_factory.mktemp("cli") / "corpus"
    code = main([
        "synth", "--out", str(root),
        "--languages", "3", "--books", "3", "--lines-per-book", "10",
        "--vocabulary", "20", "--permutation-noise", "0,0.1,0.3",
        "--merge-noise", "0", "--seed", "5",
    ])
    assert code == 0
    return root


# -- usage errors (exit 1) -----------------------------------------------------


def test_no_subcommand_is_usage_error(capsys):
    code, _, err = run_cli([], capsys)
    assert code == 1
    assert "usage" in err.lower()


def test_unknown_subcommand_is_usage_error(capsys):
    code, _, _ = run_cli(["frobnicate"], capsys)
    assert code == 1


def test_missing_required_flag_is_usage_error(capsys):
    code, _, err = run_cli(["synth", "--languages", "3"], capsys)
    assert code == 1
    assert "--out" in err


# -- synth / ingest ----------------------------------------------------------


def test_synth_prints_manifest_and_ingest_reports_layout(corpus_dir, capsys):
    code, out, _ = run_cli(["ingest", "--root", str(corpus_dir)], capsys)
    assert code == 0
    assert "languages = l00,l01,l02" in out
    assert "books = 3" in out
    assert "lines = 30" in out
    assert "book book000_g0 = 0..10" in out


def test_synth_rejects_invalid_spec(tmp_path, capsys):
    code, _, err = run_cli([
        "synth", "--out", str(tmp_path / "x"),
        "--languages", "1", "--books", "1", "--lines-per-book", "5",
        "--vocabulary", "10",
    ], capsys)
    assert code == 2
    assert "SpecInvalid" in err


def test_ingest_missing_corpus_is_data_error(tmp_path, capsys):
    code, _, err = run_cli(["ingest", "--root", str(tmp_path / "nope")], capsys)
    assert code == 2
    assert "error" in err


def test_synth_copy_of_target(tmp_path, capsys):
    root = tmp_path / "copy"
    code, _, _ = run_cli([
        "synth", "--out", str(root),
        "--languages", "3", "--books", "1", "--lines-per-book", "6",
        "--vocabulary", "15", "--copy-of-target", "1", "--seed", "2",
    ], capsys)
    assert code == 0
    corpus = load_corpus(root)
    assert corpus.lines["l01"] == corpus.lines["l00"]


# -- select ------------------------------------------------------------------


def test_select_random_writes_sorted_indices(corpus_dir, tmp_path, capsys):
    out_file = tmp_path / "seed.txt"
    argv = ["select", "--root", str(corpus_dir), "--strategy", "random",
            "--size", "5", "--seed", "3", "--out", str(out_file)]
    assert main(argv) == 0
    indices = [int(line) for line in out_file.read_text().split()]
    corpus = load_corpus(corpus_dir)
    expected = sorted(select_seed(corpus, SelectionStrategy.random_sample(5, 3)))
    assert indices == expected

    again = tmp_path / "seed2.txt"
    assert main(argv[:-1] + [str(again)]) == 0
    assert again.read_bytes() == out_file.read_bytes()


def test_select_portion_matches_book(corpus_dir, capsys):
    code, out, _ = run_cli([
        "select", "--root", str(corpus_dir),
        "--strategy", "portion", "--book", "book001_g0",
    ], capsys)
    assert code == 0
    corpus = load_corpus(corpus_dir)
    assert [int(v) for v in out.split()] == list(lines_of_book(corpus, "book001_g0"))


def test_select_oversized_sample_is_data_error(corpus_dir, capsys):
    code, _, err = run_cli([
        "select", "--root", str(corpus_dir), "--size", "999",
    ], capsys)
    assert code == 2
    assert "SampleTooLarge" in err


# -- rank ---------------------------------------------------------------------


def test_rank_emits_tsv_best_first(corpus_dir, capsys):
    code, out, _ = run_cli([
        "rank", "--root", str(corpus_dir), "--target", "l00",
        "--method", "distortion", "--em-iterations", "5",
        "--size", "10", "--seed", "1",
    ], capsys)
    assert code == 0
    lines = out.splitlines()
    assert lines[0] == FAMILY_TSV_HEADER
    ranked = [line.split("\t")[0] for line in lines[1:]]
    assert ranked == ["l01", "l02"]  # less word-order noise ranks first


# -- train / translate ----------------------------------------------------------


def test_train_then_translate_matches_library(corpus_dir, tmp_path, capsys):
    model_file = tmp_path / "model.tsv"
    code, _, _ = run_cli([
        "train", "--root", str(corpus_dir), "--source", "l01",
        "--target", "l00", "--em-iterations", "5",
        "--out", str(model_file),
    ], capsys)
    assert code == 0 and model_file.exists()

    corpus = load_corpus(corpus_dir)
    input_file = tmp_path / "input.txt"
    input_file.write_text(
        "\n".join(" ".join(line) for line in corpus.lines["l01"][:5]) + "\n",
        encoding="utf-8",
    )
    out_file = tmp_path / "out.txt"
    code, _, _ = run_cli([
        "translate", "--model", str(model_file),
        "--input", str(input_file), "--out", str(out_file),
    ], capsys)
    assert code == 0

    model = load_model(model_file)
    expected = [
        " ".join(translate(model, line)) for line in corpus.lines["l01"][:5]
    ]
    assert out_file.read_text(encoding="utf-8").splitlines() == expected


def test_translate_missing_model_is_data_error(tmp_path, capsys):
    code, _, err = run_cli([
        "translate", "--model", str(tmp_path / "no.tsv"),
        "--input", str(tmp_path / "no.txt"),
    ], capsys)
    assert code == 2
    assert "error" in err


# -- combine ---------------------------------------------------------------------


def test_combine_majority_and_winners(tmp_path, capsys):
    (tmp_path / "a.txt").write_text("x y z w\np q r s\n", encoding="utf-8")
    (tmp_path / "b.txt").write_text("x y z w\np q r s\n", encoding="utf-8")
    (tmp_path / "c.txt").write_text("k k k k\nk k k k\n", encoding="utf-8")
    out_file = tmp_path / "combined.txt"
    winners_file = tmp_path / "winners.tsv"
    code, _, _ = run_cli([
        "combine", str(tmp_path / "a.txt"), str(tmp_path / "b.txt"),
        str(tmp_path / "c.txt"), "--out", str(out_file),
        "--winners", str(winners_file),
    ], capsys)
    assert code == 0
    assert out_file.read_text(encoding="utf-8") == "x y z w\np q r s\n"
    rows = winners_file.read_text(encoding="utf-8").splitlines()
    assert rows[0] == "line\tlanguage\tscore"
    assert [r.split("\t")[1] for r in rows[1:]] == ["a", "a"]


def test_combine_language_count_mismatch_is_usage_error(tmp_path, capsys):
    (tmp_path / "a.txt").write_text("x\n", encoding="utf-8")
    code, _, err = run_cli([
        "combine", str(tmp_path / "a.txt"), "--languages", "one,two",
    ], capsys)
    assert code == 1
    assert "one language per hypothesis file" in err


def test_combine_unaligned_files_is_data_error(tmp_path, capsys):
    (tmp_path / "a.txt").write_text("x\ny\n", encoding="utf-8")
    (tmp_path / "b.txt").write_text("x\n", encoding="utf-8")
    code, _, err = run_cli([
        "combine", str(tmp_path / "a.txt"), str(tmp_path / "b.txt"),
    ], capsys)
    assert code == 2
    assert "not line-aligned" in err


# -- evaluate ---------------------------------------------------------------------


def test_evaluate_identity_scores_100(corpus_dir, tmp_path, capsys):
    corpus = load_corpus(corpus_dir)
    text = "\n".join(" ".join(line) for line in corpus.lines["l00"]) + "\n"
    hyp = tmp_path / "hyp.txt"
    hyp.write_text(text, encoding="utf-8")
    ref = tmp_path / "ref.txt"
    ref.write_text(text, encoding="utf-8")
    out_file = tmp_path / "eval.json"
    code, _, _ = run_cli([
        "evaluate", "--hyp", str(hyp), "--ref", str(ref),
        "--out", str(out_file),
    ], capsys)
    assert code == 0
    payload = json.loads(out_file.read_text(encoding="utf-8"))
    assert payload["overall"]["score"] == 100.0
    assert payload["overall"]["brevity_penalty"] == 1.0


def test_evaluate_per_book_with_exclusions(corpus_dir, tmp_path, capsys):
    corpus = load_corpus(corpus_dir)
    hyp = tmp_path / "hyp.txt"
    hyp.write_text(
        "\n".join(" ".join(line) for line in corpus.lines["l00"]) + "\n",
        encoding="utf-8",
    )
    exclude = tmp_path / "exclude.txt"
    exclude.write_text("0\n1\n2\n", encoding="utf-8")
    code, out, _ = run_cli([
        "evaluate", "--hyp", str(hyp), "--root", str(corpus_dir),
        "--target", "l00", "--exclude-lines", str(exclude),
    ], capsys)
    assert code == 0
    payload = json.loads(out)
    assert payload["overall"]["score"] == 100.0
    books = {row["book"]: row for row in payload["per_book"]}
    assert set(books) == {"book000_g0", "book001_g0", "book002_g0"}
    assert books["book000_g0"]["lines"] == 7  # three excluded
    assert all(row["bleu"] == 100.0 for row in payload["per_book"])


def test_evaluate_flag_combinations(corpus_dir, tmp_path, capsys):
    hyp = tmp_path / "hyp.txt"
    hyp.write_text("a b c d\n", encoding="utf-8")
    code, _, err = run_cli(["evaluate", "--hyp", str(hyp)], capsys)
    assert code == 1
    assert "need --ref or --root" in err

    code, _, err = run_cli([
        "evaluate", "--hyp", str(hyp), "--root", str(corpus_dir),
    ], capsys)
    assert code == 1
    assert "--target is required" in err


def test_evaluate_length_mismatch_is_data_error(tmp_path, capsys):
    (tmp_path / "hyp.txt").write_text("a b c d\n", encoding="utf-8")
    (tmp_path / "ref.txt").write_text("a b c d\ne f g h\n", encoding="utf-8")
    code, _, err = run_cli([
        "evaluate", "--hyp", str(tmp_path / "hyp.txt"),
        "--ref", str(tmp_path / "ref.txt"),
    ], capsys)
    assert code == 2
    assert "LengthMismatch" in err


# -- run-loop / heldout-order / report ----------------------------------------------


@pytest.fixture(scope="module")
def loop_config(corpus_dir):
    config = corpus_dir.parent / "loop.conf"
    config.write_text(
        "target_language = l00\n"
        "corpus_manifest = corpus/manifest.txt\n"
        "seed_strategy = random\n"
        "seed_size = 6\n"
        "seed_rng_seed = 0\n"
        "family_method = linguistic\n"
        "family_list = l01,l02\n"
        "family_k = 2\n"
        "em_iterations = 3\n"
        "pretrain_em_iterations = 3\n"
        "max_iterations = 1\n",
        encoding="utf-8",
    )
    return config


def test_run_loop_writes_deterministic_run_dir(loop_config, tmp_path, capsys):
    code, out, _ = run_cli([
        "run-loop", "--config", str(loop_config),
        "--run-root", str(tmp_path / "a"),
    ], capsys)
    assert code == 0
    run_dir = Path(out.splitlines()[0])
    assert run_dir.parent == tmp_path / "a"
    expected_hash = ExperimentConfig.from_file(loop_config).config_hash()
    assert run_dir.name == expected_hash
    assert "final BLEU" in out

    code, out, _ = run_cli([
        "run-loop", "--config", str(loop_config),
        "--run-root", str(tmp_path / "b"), "--jobs", "3",
    ], capsys)
    assert code == 0
    other = Path(out.splitlines()[0])
    assert other.name == expected_hash
    assert _fingerprint(run_dir) == _fingerprint(other)


def test_run_loop_bad_config_is_data_error(tmp_path, capsys):
    config = tmp_path / "bad.conf"
    config.write_text("update_strategy = sideways\n", encoding="utf-8")
    code, _, err = run_cli(["run-loop", "--config", str(config)], capsys)
    assert code == 2
    assert "ConfigError" in err


def test_heldout_order_lists_every_book(corpus_dir, tmp_path, capsys):
    config = tmp_path / "proxy.conf"
    config.write_text(
        "target_language = l00\n"
        "seed_strategy = random\n"
        "seed_size = 6\n"
        "family_method = linguistic\n"
        "family_list = l02\n"
        "family_k = 1\n"
        "em_iterations = 3\n"
        "pretrain_em_iterations = 3\n",
        encoding="utf-8",
    )
    code, out, _ = run_cli([
        "heldout-order", "--root", str(corpus_dir),
        "--config", str(config), "--proxy", "l01",
    ], capsys)
    assert code == 0
    assert sorted(out.split()) == ["book000_g0", "book001_g0", "book002_g0"]

    code, _, err = run_cli([
        "heldout-order", "--root", str(corpus_dir),
        "--config", str(config), "--proxy", "l00",
    ], capsys)
    assert code == 2
    assert "ProxyIsTarget" in err


def test_report_prints_summary(loop_config, tmp_path, capsys):
    code, out, _ = run_cli([
        "run-loop", "--config", str(loop_config),
        "--run-root", str(tmp_path),
    ], capsys)
    assert code == 0
    run_dir = out.splitlines()[0]
    code, out, _ = run_cli(["report", run_dir], capsys)
    assert code == 0
    assert out.startswith(f"run {Path(run_dir).name}\n")
    assert "target language: l00" in out


def test_report_missing_dir_is_data_error(tmp_path, capsys):
    code, _, err = run_cli(["report", str(tmp_path / "missing")], capsys)
    assert code == 2
    assert "error" in err
