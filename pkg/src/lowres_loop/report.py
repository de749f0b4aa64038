"""Experiment artifacts: JSON report, plot-ready CSV, and plain-text summary.

Every file is written with sorted keys, fixed float formatting and explicit
``\\n`` newlines so that two runs of the same configuration produce
byte-identical run directories.
"""

import json
from pathlib import Path

from .bleu import BleuReport
from .family import LanguageScore

PER_BOOK_CSV_HEADER = "iteration,book,bleu,lines"
TRAJECTORY_CSV_HEADER = "iteration,n,v,delta_v,bleu_all,bleu_machine,chosen_books"
FAMILY_TSV_HEADER = "language\tp_zero_distortion\tp_fertility_one\tperformance_score"


def bleu_to_json(report: BleuReport | None):
    if report is None:
        return None
    return {
        "score": report.score,
        "precisions": list(report.precisions),
        "brevity_penalty": report.brevity_penalty,
        "hyp_length": report.hyp_length,
        "ref_length": report.ref_length,
    }


def format_family_tsv(scores) -> str:
    lines = [FAMILY_TSV_HEADER]
    for score in scores:
        lines.append(
            f"{score.language}\t{score.p_zero_distortion:.6f}"
            f"\t{score.p_fertility_one:.6f}\t{score.performance_score:.6f}"
        )
    return "\n".join(lines) + "\n"


def per_book_csv(records) -> str:
    lines = [PER_BOOK_CSV_HEADER]
    for record in records:
        for book, score, count in record.per_book:
            lines.append(f"{record.iteration},{book},{score:.4f},{count}")
    return "\n".join(lines) + "\n"


def trajectory_csv(records) -> str:
    lines = [TRAJECTORY_CSV_HEADER]
    for record in records:
        bleu_all = "" if record.draft_bleu_all is None else f"{record.draft_bleu_all.score:.4f}"
        bleu_machine = (
            "" if record.draft_bleu_machine is None
            else f"{record.draft_bleu_machine.score:.4f}"
        )
        chosen = ";".join(record.chosen_books)
        lines.append(
            f"{record.iteration},{record.n},{record.v},{record.delta_v},"
            f"{bleu_all},{bleu_machine},{chosen}"
        )
    return "\n".join(lines) + "\n"


def report_json(result) -> dict:
    state = result.state
    iterations = []
    for record in state.history:
        iterations.append({
            "iteration": record.iteration,
            "entry_delta_v": record.entry_delta_v,
            "pretrain_ran": record.pretrain_ran,
            "pretrain_invocations": record.pretrain_invocations,
            "train_invocations": record.train_invocations,
            "n": record.n,
            "v": record.v,
            "delta_v": record.delta_v,
            "chosen_books": list(record.chosen_books),
            "per_book": [
                {"book": book, "bleu": score, "lines": count}
                for book, score, count in record.per_book
            ],
            "bleu_all": bleu_to_json(record.draft_bleu_all),
            "bleu_machine": bleu_to_json(record.draft_bleu_machine),
            "winner_counts": dict(record.winner_counts),
            "dropped_placeholders": record.dropped_placeholders,
        })
    final = iterations[-1] if iterations else None
    return {
        "config_hash": result.config_hash,
        "target_language": result.config.target_language,
        "family": {
            "method": result.family.method,
            "members": list(result.family.members),
        },
        "family_scores": [
            {
                "language": score.language,
                "p_zero_distortion": score.p_zero_distortion,
                "p_fertility_one": score.p_fertility_one,
                "performance_score": score.performance_score,
            }
            for score in result.family_scores
        ],
        "seed": {
            "size": len(result.seed_lines),
            "train": len(state.seed_train_lines),
            "validation": len(state.validation_lines),
        },
        "heldout_books": list(state.heldout_books or ()),
        "edited_books": list(state.edited_books),
        "iterations": iterations,
        "final": None if final is None else {
            "iteration": final["iteration"],
            "n": final["n"],
            "v": final["v"],
            "bleu_all": final["bleu_all"],
            "bleu_machine": final["bleu_machine"],
        },
    }


def summary_from_json(data: dict) -> str:
    lines = [
        f"run {data['config_hash']}",
        f"target language: {data['target_language']}",
        "family ({method}): {members}".format(
            method=data["family"]["method"],
            members=", ".join(data["family"]["members"]),
        ),
        "seed: {size} lines ({train} train / {validation} validation)".format(
            **data["seed"]
        ),
        f"iterations run: {len(data['iterations'])}",
    ]
    if data["heldout_books"]:
        lines.append("held-out books: " + ", ".join(data["heldout_books"]))
    if data["edited_books"]:
        lines.append("post-edited books in order: " + ", ".join(data["edited_books"]))
    final = data.get("final")
    if final is not None:
        for key, label in (("bleu_all", "non-seed lines"),
                           ("bleu_machine", "machine lines")):
            report = final[key]
            if report is not None:
                lines.append(
                    f"final BLEU over {label}: {report['score']:.2f}"
                )
        lines.append(f"final human-translated lines: {final['n']}")
        lines.append(f"final target vocabulary: {final['v']}")
    return "\n".join(lines) + "\n"


def render_draft(draft) -> str:
    return "\n".join(" ".join(tokens) for tokens in draft) + "\n"


def _write_text(path: Path, text: str) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as handle:
        handle.write(text)


def write_run_directory(result, run_dir: str | Path) -> Path:
    run_dir = Path(run_dir)
    run_dir.mkdir(parents=True, exist_ok=True)
    state = result.state

    _write_text(run_dir / "config.txt", result.config.canonical_text())
    data = report_json(result)
    _write_text(
        run_dir / "report.json",
        json.dumps(data, sort_keys=True, indent=2) + "\n",
    )
    _write_text(run_dir / "per_book_bleu.csv", per_book_csv(state.history))
    _write_text(run_dir / "trajectory.csv", trajectory_csv(state.history))
    _write_text(run_dir / "summary.txt", summary_from_json(data))
    _write_text(run_dir / "family.tsv", format_family_tsv(result.family_scores))
    _write_text(
        run_dir / "seed_lines.txt",
        "".join(f"{index}\n" for index in result.seed_lines),
    )
    _write_text(
        run_dir / "validation_lines.txt",
        "".join(f"{index}\n" for index in sorted(state.validation_lines)),
    )
    for iteration, draft in result.drafts:
        _write_text(run_dir / f"draft_iter_{iteration:03d}.txt", render_draft(draft))
    _write_text(run_dir / "draft_final.txt", render_draft(result.final_draft()))
    return run_dir


def load_report(run_dir: str | Path) -> dict:
    with open(Path(run_dir) / "report.json", encoding="utf-8") as handle:
        return json.load(handle)
