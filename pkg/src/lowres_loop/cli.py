"""Command-line interface.

Exit codes: 0 on success, 1 on usage errors (bad flags, unknown
subcommands), 2 on data or validation errors.  All randomness is pinned by
explicit ``--seed`` flags; outputs are byte-deterministic for a fixed
command line.
"""

import argparse
import json
import sys
from dataclasses import replace
from pathlib import Path

from .backend import load_model, save_model, train_model, translate, TrainingPair
from .bleu import corpus_bleu, per_book_bleu
from .corpus import load_corpus, tokenize
from .ensemble import Hypothesis, HypothesisSet, centered_combine
from .errors import LowresLoopError
from .family import rank_languages, BackendConfig
from .lexicon import LexiconTable, restore_translated, tag_entities
from .loop import (
    ExperimentConfig,
    SelectionStrategy,
    heldout_language_ordering,
    run_experiment,
    select_seed,
)
from .report import format_family_tsv, load_report, summary_from_json
from .synthetic import SyntheticCorpusSpec, generate_synthetic


class _Parser(argparse.ArgumentParser):
    """argparse with usage errors mapped to exit status 1."""

    def error(self, message):
        self.print_usage(sys.stderr)
        print(f"{self.prog}: error: {message}", file=sys.stderr)
        raise SystemExit(1)


def _write_or_print(text: str, out: str | None) -> None:
    if out is None or out == "-":
        sys.stdout.write(text)
    else:
        with open(out, "w", encoding="utf-8", newline="\n") as handle:
            handle.write(text)


def _read_token_lines(path: str) -> list[tuple[str, ...]]:
    with open(path, encoding="utf-8") as handle:
        return [tuple(tokenize(line.rstrip("\n"))) for line in handle]


def _read_index_file(path: str) -> list[int]:
    with open(path, encoding="utf-8") as handle:
        return [int(line) for line in handle.read().split()]


def _corpus_from_args(args):
    return load_corpus(args.root, args.manifest, min_book_size=args.min_book_size)


def _add_corpus_flags(parser) -> None:
    parser.add_argument("--root", required=True, help="corpus directory")
    parser.add_argument("--manifest", default="manifest.txt",
                        help="manifest file name inside the corpus directory")
    parser.add_argument("--min-book-size", type=int, default=2,
                        help="books shorter than this merge into the next book")


def _add_seed_flags(parser) -> None:
    parser.add_argument("--strategy", choices=("random", "portion"),
                        default="random", help="seed selection strategy")
    parser.add_argument("--size", type=int, default=1000,
                        help="random seed size in lines")
    parser.add_argument("--seed", type=int, default=0,
                        help="RNG seed for random selection")
    parser.add_argument("--book", default="", help="book name for portion seeds")


def _selection_from_args(args) -> SelectionStrategy:
    if args.strategy == "random":
        return SelectionStrategy.random_sample(args.size, args.seed)
    return SelectionStrategy.portion(args.book)


def _noise_list(raw: str) -> list[float] | float:
    parts = [part.strip() for part in raw.split(",") if part.strip()]
    values = [float(part) for part in parts]
    return values[0] if len(values) == 1 else values


# ----------------------------------------------------------------------
# Subcommand handlers


def _cmd_ingest(args) -> int:
    corpus = _corpus_from_args(args)
    lines = [
        f"languages = {','.join(corpus.languages)}",
        f"books = {len(corpus.book_index.books)}",
        f"lines = {corpus.n_total}",
        f"split_seed = {corpus.split_seed}",
    ]
    for book in corpus.book_index.books:
        lines.append(f"book {book.name} = {book.start}..{book.end}")
    _write_or_print("\n".join(lines) + "\n", args.out)
    return 0


def _cmd_synth(args) -> int:
    spec = SyntheticCorpusSpec(
        num_languages=args.languages,
        num_books=args.books,
        lines_per_book=args.lines_per_book,
        vocabulary_size=args.vocabulary,
        zipf_exponent=args.zipf_exponent,
        genre_clusters=args.genre_clusters,
        permutation_noise=_noise_list(args.permutation_noise),
        merge_noise=_noise_list(args.merge_noise),
        rng_seed=args.seed,
        min_tokens_per_line=args.min_tokens,
        max_tokens_per_line=args.max_tokens,
        cluster_mix=args.cluster_mix,
        num_entities=args.entities,
        entity_rate=args.entity_rate,
        distinct_line_tokens=args.distinct_line_tokens,
        copy_of_target=tuple(
            int(part) for part in args.copy_of_target.split(",") if part.strip()
        ),
        split_seed=args.split_seed,
    )
    manifest = generate_synthetic(spec, args.out)
    print(manifest)
    return 0


def _cmd_rank(args) -> int:
    corpus = _corpus_from_args(args)
    seed_lines = sorted(select_seed(corpus, _selection_from_args(args)))
    config = BackendConfig(
        em_iterations=args.em_iterations,
        identity_boost=args.identity_boost,
        null_floor=args.null_floor,
        model_seed=args.model_seed,
    )
    scores = rank_languages(corpus, args.target, seed_lines, args.method, config)
    _write_or_print(format_family_tsv(scores), args.out)
    return 0


def _cmd_select(args) -> int:
    corpus = _corpus_from_args(args)
    chosen = sorted(select_seed(corpus, _selection_from_args(args)))
    _write_or_print("".join(f"{index}\n" for index in chosen), args.out)
    return 0


def _cmd_train(args) -> int:
    corpus = _corpus_from_args(args)
    corpus.require_language(args.source)
    corpus.require_language(args.target)
    if args.lines:
        indices = _read_index_file(args.lines)
    else:
        indices = list(range(corpus.n_total))
    pairs = [
        TrainingPair(corpus.lines[args.source][i], corpus.lines[args.target][i])
        for i in indices
    ]
    model = train_model(
        pairs, args.em_iterations, args.seed,
        source_language=args.source, target_language=args.target,
        identity_boost=args.identity_boost, null_floor=args.null_floor,
    )
    save_model(model, args.out)
    print(args.out)
    return 0


def _cmd_translate(args) -> int:
    model = load_model(args.model)
    lexicon = LexiconTable.load(args.lexicon) if args.lexicon else None
    source_lines = _read_token_lines(args.input)
    rendered = []
    for tokens in source_lines:
        if lexicon is not None:
            tagged = tag_entities(tokens, lexicon, model.source_language)
            raw = translate(model, tagged.tokens)
            restored, _ = restore_translated(
                raw, tagged.bindings, model.target_language, lexicon
            )
        else:
            restored = translate(model, tokens)
        rendered.append(" ".join(restored))
    _write_or_print("".join(line + "\n" for line in rendered), args.out)
    return 0


def _cmd_combine(args) -> int:
    documents = [_read_token_lines(path) for path in args.hypotheses]
    if args.languages:
        languages = [part.strip() for part in args.languages.split(",")]
    else:
        languages = [Path(path).stem for path in args.hypotheses]
    if len(languages) != len(documents):
        print("error: need one language per hypothesis file", file=sys.stderr)
        return 1
    lengths = {len(doc) for doc in documents}
    if len(lengths) != 1:
        print("error: hypothesis files are not line-aligned", file=sys.stderr)
        return 2
    sets = [
        HypothesisSet(i, tuple(
            Hypothesis(lang, doc[i]) for lang, doc in zip(languages, documents)
        ))
        for i in range(lengths.pop())
    ]
    results = [centered_combine(hset) for hset in sets]
    combined_text = "".join(" ".join(r.tokens) + "\n" for r in results)
    _write_or_print(combined_text, args.out)
    winner_rows = ["line\tlanguage\tscore"]
    for i, result in enumerate(results):
        best = max(result.scores)
        winner_rows.append(f"{i}\t{result.language}\t{best:.6f}")
    _write_or_print("\n".join(winner_rows) + "\n", args.winners)
    return 0


def _cmd_evaluate(args) -> int:
    hypotheses = _read_token_lines(args.hyp)
    payload: dict = {}
    if args.root:
        if not args.target:
            print("error: --target is required with --root", file=sys.stderr)
            return 1
        corpus = load_corpus(args.root, args.manifest,
                             min_book_size=args.min_book_size)
        corpus.require_language(args.target)
        references = corpus.lines[args.target]
        excluded = frozenset(
            _read_index_file(args.exclude_lines) if args.exclude_lines else ()
        )
        table = per_book_bleu(corpus, hypotheses, args.target,
                              excluded_lines=excluded)
        kept = [i for i in range(corpus.n_total) if i not in excluded]
        overall = corpus_bleu([hypotheses[i] for i in kept],
                              [references[i] for i in kept])
        payload["per_book"] = [
            {"book": name, "bleu": report.score, "lines": count}
            for name, report, count in table
        ]
    else:
        if not args.ref:
            print("error: need --ref or --root", file=sys.stderr)
            return 1
        references = _read_token_lines(args.ref)
        overall = corpus_bleu(hypotheses, references)
    payload["overall"] = {
        "score": overall.score,
        "precisions": list(overall.precisions),
        "brevity_penalty": overall.brevity_penalty,
        "hyp_length": overall.hyp_length,
        "ref_length": overall.ref_length,
    }
    _write_or_print(json.dumps(payload, sort_keys=True, indent=2) + "\n", args.out)
    return 0


def _cmd_run_loop(args) -> int:
    config = ExperimentConfig.from_file(args.config)
    if args.jobs is not None:
        config = replace(config, jobs=args.jobs)
    result, run_dir = run_experiment(config, run_root=args.run_root)
    print(run_dir)
    final = result.state.history[-1] if result.state.history else None
    if final is not None and final.draft_bleu_all is not None:
        print(f"final BLEU (non-seed lines): {final.draft_bleu_all.score:.2f}")
    return 0


def _cmd_heldout_order(args) -> int:
    corpus = _corpus_from_args(args)
    config = ExperimentConfig.from_file(args.config)
    ordering = heldout_language_ordering(corpus, args.proxy, config)
    _write_or_print("".join(name + "\n" for name in ordering), args.out)
    return 0


def _cmd_report(args) -> int:
    data = load_report(args.run_dir)
    sys.stdout.write(summary_from_json(data))
    return 0


# ----------------------------------------------------------------------
# Parser assembly


def _build_parser() -> _Parser:
    parser = _Parser(prog="lowres-loop",
                     description="Reproducible joint human-machine translation loop")
    subs = parser.add_subparsers(dest="command", metavar="SUBCOMMAND")

    sub = subs.add_parser("ingest", help="validate a corpus and print its layout")
    _add_corpus_flags(sub)
    sub.add_argument("--out", default=None)
    sub.set_defaults(handler=_cmd_ingest)

    sub = subs.add_parser("synth", help="generate a synthetic parallel corpus")
    sub.add_argument("--out", required=True, help="output corpus directory")
    sub.add_argument("--languages", type=int, required=True)
    sub.add_argument("--books", type=int, required=True)
    sub.add_argument("--lines-per-book", type=int, required=True)
    sub.add_argument("--vocabulary", type=int, required=True)
    sub.add_argument("--zipf-exponent", type=float, default=1.0)
    sub.add_argument("--genre-clusters", type=int, default=1)
    sub.add_argument("--permutation-noise", default="0",
                     help="rate, or comma-separated per-language rates")
    sub.add_argument("--merge-noise", default="0",
                     help="rate, or comma-separated per-language rates")
    sub.add_argument("--seed", type=int, default=0)
    sub.add_argument("--min-tokens", type=int, default=4)
    sub.add_argument("--max-tokens", type=int, default=12)
    sub.add_argument("--cluster-mix", type=float, default=0.7)
    sub.add_argument("--entities", type=int, default=0)
    sub.add_argument("--entity-rate", type=float, default=0.0)
    sub.add_argument("--distinct-line-tokens", action="store_true")
    sub.add_argument("--copy-of-target", default="",
                     help="comma-separated language indices copying language 0")
    sub.add_argument("--split-seed", type=int, default=None)
    sub.set_defaults(handler=_cmd_synth)

    sub = subs.add_parser("rank", help="rank candidate source languages")
    _add_corpus_flags(sub)
    _add_seed_flags(sub)
    sub.add_argument("--target", required=True)
    sub.add_argument("--method", choices=("distortion", "performance"),
                     default="distortion")
    sub.add_argument("--em-iterations", type=int, default=20)
    sub.add_argument("--identity-boost", type=float, default=1.0)
    sub.add_argument("--null-floor", type=float, default=1e-4)
    sub.add_argument("--model-seed", type=int, default=0)
    sub.add_argument("--out", default=None)
    sub.set_defaults(handler=_cmd_rank)

    sub = subs.add_parser("select", help="choose seed line indices")
    _add_corpus_flags(sub)
    _add_seed_flags(sub)
    sub.add_argument("--out", default=None)
    sub.set_defaults(handler=_cmd_select)

    sub = subs.add_parser("train", help="train a lexical translation model")
    _add_corpus_flags(sub)
    sub.add_argument("--source", required=True)
    sub.add_argument("--target", required=True)
    sub.add_argument("--lines", default=None,
                     help="file of training line indices (default: all lines)")
    sub.add_argument("--em-iterations", type=int, default=20)
    sub.add_argument("--identity-boost", type=float, default=1.0)
    sub.add_argument("--null-floor", type=float, default=1e-4)
    sub.add_argument("--seed", type=int, default=0, help="model seed")
    sub.add_argument("--out", required=True, help="model file to write")
    sub.set_defaults(handler=_cmd_train)

    sub = subs.add_parser("translate", help="translate a tokenized text file")
    sub.add_argument("--model", required=True)
    sub.add_argument("--input", required=True)
    sub.add_argument("--lexicon", default=None)
    sub.add_argument("--out", default=None)
    sub.set_defaults(handler=_cmd_translate)

    sub = subs.add_parser("combine",
                          help="combine line-aligned hypothesis files by centeredness")
    sub.add_argument("hypotheses", nargs="+", metavar="HYP")
    sub.add_argument("--languages", default=None,
                     help="comma-separated names, one per file (default: stems)")
    sub.add_argument("--out", default=None, help="combined text output")
    sub.add_argument("--winners", default=None,
                     help="per-line winner TSV output")
    sub.set_defaults(handler=_cmd_combine)

    sub = subs.add_parser("evaluate", help="BLEU of a hypothesis file")
    sub.add_argument("--hyp", required=True)
    sub.add_argument("--ref", default=None, help="reference text file")
    sub.add_argument("--root", default=None,
                     help="corpus directory for per-book evaluation")
    sub.add_argument("--manifest", default="manifest.txt")
    sub.add_argument("--min-book-size", type=int, default=2)
    sub.add_argument("--target", default=None,
                     help="reference language when --root is given")
    sub.add_argument("--exclude-lines", default=None,
                     help="file of line indices to skip (e.g. the seed)")
    sub.add_argument("--out", default=None)
    sub.set_defaults(handler=_cmd_evaluate)

    sub = subs.add_parser("run-loop", help="run a full experiment from a config file")
    sub.add_argument("--config", required=True)
    sub.add_argument("--run-root", default=None,
                     help="output root (default: $LOWRES_LOOP_RUN_DIR or ./runs)")
    sub.add_argument("--jobs", type=int, default=None, help="worker cap")
    sub.set_defaults(handler=_cmd_run_loop)

    sub = subs.add_parser("heldout-order",
                          help="book ordering via a proxy language")
    _add_corpus_flags(sub)
    sub.add_argument("--config", required=True)
    sub.add_argument("--proxy", required=True)
    sub.add_argument("--out", default=None)
    sub.set_defaults(handler=_cmd_heldout_order)

    sub = subs.add_parser("report", help="print the summary of a run directory")
    sub.add_argument("run_dir")
    sub.set_defaults(handler=_cmd_report)

    return parser


def main(argv=None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        code = exc.code
        if code is None:
            return 0
        return code if isinstance(code, int) else 1
    if getattr(args, "handler", None) is None:
        parser.print_usage(sys.stderr)
        return 1
    try:
        return args.handler(args)
    except LowresLoopError as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
