"""Command-line entry point.

Subcommands wire the full workflow: inject patterns into a test corpus,
build per-pattern ablation sets, report corpus statistics, sample dialogs
for manual review, produce retrieval-baseline predictions, and score
predictions under the masked evaluation protocol.

Exit codes: 0 success, 1 usage/configuration error, 2 parse or data error,
3 planner eligibility shortfall. Diagnostics go to stderr; stdout carries
data only when --output is absent.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from . import __version__
from .babi import ParseError
from .baseline import BaselineError, candidates_from_corpus, load_candidates, predict
from .catalog import list_patterns
from .io import load_corpus, save_corpus, serialize_corpus, sha256_hex
from .manifest import export_manifest, parse_manifest, read_predictions, serialize_manifest
from .metrics import MetricError, compare, evaluate, render_comparison
from .model import ModelError
from .planner import (
    PlanConfig,
    PlanError,
    ShortfallError,
    config_from_dict,
    execute,
    overlap_histogram,
    plan,
    preset_config,
    render_review,
    sample_review,
)
from .recipes import RECIPES, patterns_for_dataset
from .runrecord import RunRecord
from .stats import corpus_stats, render_stats


class UsageError(ValueError):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):  # argparse default exits 2; usage errors are 1
        raise UsageError(message)


def _build_parser() -> _Parser:
    p = _Parser(prog="natvar", description=__doc__.splitlines()[0])
    p.add_argument("--version", action="version", version=f"natvar {__version__}")
    sub = p.add_subparsers(dest="cmd", required=True)

    def add_corpus_args(sp, input_flag="--input"):
        sp.add_argument(input_flag, required=True, help="corpus file")
        sp.add_argument("--format", required=True, choices=("babi", "smd"))

    sp = sub.add_parser("inject", help="apply a full injection plan to a test corpus")
    add_corpus_args(sp)
    sp.add_argument("--preset", choices=("smd-table1", "babi-table1"))
    sp.add_argument("--config", help="plan config JSON file")
    sp.add_argument("--seed", type=int, default=0)
    sp.add_argument("--jobs", type=int, default=1)
    sp.add_argument("--allow-shortfall", action="store_true")
    sp.add_argument("--output", help="updated corpus path (stdout when absent)")

    sp = sub.add_parser("ablate", help="one updated corpus per single pattern")
    add_corpus_args(sp)
    sp.add_argument("--pattern", help="pattern name (see `natvar patterns`)")
    sp.add_argument("--all", action="store_true", help="every pattern valid for the format")
    sp.add_argument("--preset", choices=("smd-table1", "babi-table1"))
    sp.add_argument("--config", help="plan config JSON file")
    sp.add_argument("--seed", type=int, default=0)
    sp.add_argument("--allow-shortfall", action="store_true")
    sp.add_argument("--output-dir", required=True)

    sp = sub.add_parser("stats", help="corpus statistics (counts, overlap, mean utterances)")
    add_corpus_args(sp)
    sp.add_argument("--output")

    sp = sub.add_parser("eval", help="masked evaluation of a prediction file")
    sp.add_argument("--predictions")
    sp.add_argument("--manifest")
    sp.add_argument("--corpus")
    sp.add_argument("--format", choices=("babi", "smd"))
    sp.add_argument("--entity-scope", choices=("global", "dialog"), default="global")
    sp.add_argument("--compare", help="report JSON of the original run to compare against")
    sp.add_argument("--compare-reports", nargs=2, metavar=("ORIGINAL", "UPDATED"),
                    help="compare two existing report JSON files and exit")
    sp.add_argument("--output", help="base path; writes BASE.report.txt/.report.json")

    sp = sub.add_parser("review", help="sample updated dialogs for manual review")
    add_corpus_args(sp)
    sp.add_argument("--fraction", type=float, default=0.2)
    sp.add_argument("--seed", type=int, default=0)
    sp.add_argument("--output")

    sp = sub.add_parser("baseline", help="tf-idf retrieval predictions for a corpus")
    sp.add_argument("--corpus", required=True)
    sp.add_argument("--format", required=True, choices=("babi", "smd"))
    sp.add_argument("--candidates", help="candidate file; defaults to the corpus gold responses")
    sp.add_argument("--manifest", help="manifest file; defaults to exporting from the corpus")
    sp.add_argument("--out", required=True, help="predictions output path")

    sp = sub.add_parser("patterns", help="print the pattern catalog")
    return p


def _resolve_config(args, fmt: str) -> PlanConfig:
    if args.preset and args.config:
        raise UsageError("--preset and --config are mutually exclusive")
    if args.preset:
        cfg = preset_config(args.preset, seed=args.seed,
                            allow_shortfall=args.allow_shortfall)
        expected = "smd" if args.preset.startswith("smd") else "babi"
        if expected != fmt:
            raise UsageError(f"preset {args.preset} does not match --format {fmt}")
        return cfg
    if args.config:
        with open(args.config, "r", encoding="utf-8") as f:
            d = json.load(f)
        d.setdefault("seed", args.seed)
        if args.seed != 0:
            d["seed"] = args.seed
        d["allow_shortfall"] = args.allow_shortfall or d.get("allow_shortfall", False)
        return config_from_dict(d)
    raise UsageError("one of --preset or --config is required")


def _plan_dump(pln) -> bytes:
    lines = [f"{a.dialog_id}\t{a.pattern}\t{a.anchor.turn_index}" for a in pln.assignments]
    return ("\n".join(lines) + "\n").encode("utf-8") if lines else b""


def _inject_diagnostics(pln, updated, cfg) -> list[str]:
    notes = []
    counts: dict[str, int] = {}
    for a in pln.assignments:
        counts[a.pattern] = counts.get(a.pattern, 0) + 1
    notes.append("assignments per pattern: " + ", ".join(f"{k}={v}" for k, v in counts.items()))
    hist = overlap_histogram(updated)
    notes.append("overlap histogram (>=k): " + ", ".join(f">={k}:{v}" for k, v in sorted(hist.items())))
    if cfg.histogram_targets:
        notes.append(f"overlap bucket targets: {list(cfg.histogram_targets)}")
    if pln.histogram_note:
        notes.append(pln.histogram_note)
    for p, target, eligible in pln.shortfalls:
        notes.append(f"shortfall recorded: {p}: eligible {eligible} < target {target}")
    return notes


def cmd_inject(args) -> int:
    corpus = load_corpus(args.input, args.format)
    cfg = _resolve_config(args, args.format)
    pln = plan(corpus, cfg)
    updated = execute(corpus, pln, jobs=max(1, args.jobs))
    notes = _inject_diagnostics(pln, updated, cfg)
    for note in notes:
        print(note, file=sys.stderr)
    manifest = export_manifest(updated)
    if args.output:
        out = Path(args.output)
        written = [str(p) for p in save_corpus(updated, out)]
        Path(str(out) + ".manifest.tsv").write_bytes(serialize_manifest(manifest))
        written.append(str(out) + ".manifest.tsv")
        Path(str(out) + ".plan.tsv").write_bytes(_plan_dump(pln))
        written.append(str(out) + ".plan.tsv")
        record = RunRecord(
            subcommand="inject",
            config=cfg.to_dict(),
            input_checksums={str(args.input): sha256_hex(Path(args.input).read_bytes())},
            seed=cfg.seed,
            outputs=written,
            notes=notes,
        )
        record.write(out)
    else:
        sys.stdout.buffer.write(serialize_corpus(updated))
    return 0


def cmd_ablate(args) -> int:
    corpus = load_corpus(args.input, args.format)
    cfg = _resolve_config(args, args.format)
    valid = patterns_for_dataset(args.format)
    if args.all:
        names = [p for p in valid if cfg.targets.get(p, 0) > 0]
    elif args.pattern:
        if args.pattern not in RECIPES:
            raise UsageError(
                f"unknown pattern {args.pattern!r}; recipe-bearing patterns: "
                + ", ".join(sorted(RECIPES))
            )
        if args.pattern not in valid:
            raise UsageError(f"pattern not applicable to {args.format}: {args.pattern}")
        names = [args.pattern]
    else:
        raise UsageError("one of --pattern or --all is required")

    outdir = Path(args.output_dir)
    outdir.mkdir(parents=True, exist_ok=True)
    ext = "txt" if args.format == "babi" else "json"
    from .planner import ablate as run_ablate

    for name in names:
        updated = run_ablate(corpus, cfg, name)
        out = outdir / f"{name}.{ext}"
        written = [str(p) for p in save_corpus(updated, out)]
        manifest = export_manifest(updated)
        Path(str(out) + ".manifest.tsv").write_bytes(serialize_manifest(manifest))
        written.append(str(out) + ".manifest.tsv")
        stats = corpus_stats(updated)
        print(f"{name}: mean utterances/dialog = {stats.mean_utterances:.2f}", file=sys.stderr)
        RunRecord(
            subcommand="ablate",
            config=dict(cfg.to_dict(), pattern=name),
            input_checksums={str(args.input): sha256_hex(Path(args.input).read_bytes())},
            seed=cfg.seed,
            outputs=written,
        ).write(out)
    return 0


def cmd_stats(args) -> int:
    corpus = load_corpus(args.input, args.format)
    text = render_stats(corpus_stats(corpus))
    if args.output:
        Path(args.output).write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)
    return 0


def cmd_eval(args) -> int:
    if args.compare_reports:
        a = json.loads(Path(args.compare_reports[0]).read_text(encoding="utf-8"))
        b = json.loads(Path(args.compare_reports[1]).read_text(encoding="utf-8"))
        table = render_comparison(compare(a, b))
        if args.output:
            Path(args.output).write_text(table, encoding="utf-8")
        else:
            sys.stdout.write(table)
        return 0
    if not (args.predictions and args.manifest and args.corpus and args.format):
        raise UsageError("--predictions, --manifest, --corpus and --format are required "
                         "(or use --compare-reports)")
    corpus = load_corpus(args.corpus, args.format)
    manifest = parse_manifest(Path(args.manifest).read_bytes())
    preds = read_predictions(Path(args.predictions).read_bytes(), manifest)
    checksums = tuple(
        (name, sha256_hex(Path(path).read_bytes()))
        for name, path in (("corpus", args.corpus), ("manifest", args.manifest),
                           ("predictions", args.predictions))
    )
    report = evaluate(preds, manifest, corpus, scope=args.entity_scope, checksums=checksums)
    out_text = report.render()
    if args.compare:
        original = json.loads(Path(args.compare).read_text(encoding="utf-8"))
        out_text += "\n" + render_comparison(compare(original, report.to_dict()))
    if args.output:
        Path(args.output + ".report.txt").write_text(out_text, encoding="utf-8")
        Path(args.output + ".report.json").write_text(
            json.dumps(report.to_dict(), sort_keys=True, indent=2) + "\n", encoding="utf-8")
        RunRecord(
            subcommand="eval",
            config={"entity_scope": args.entity_scope},
            input_checksums=dict(checksums),
            seed=None,
            outputs=[args.output + ".report.txt", args.output + ".report.json"],
        ).write(args.output)
    else:
        sys.stdout.write(out_text)
    return 0


def cmd_review(args) -> int:
    corpus = load_corpus(args.input, args.format)
    sheet = sample_review(corpus, args.fraction, args.seed)
    text = render_review(sheet, corpus)
    if args.output:
        Path(args.output).write_text(text, encoding="utf-8")
        RunRecord(
            subcommand="review",
            config={"fraction": args.fraction},
            input_checksums={str(args.input): sha256_hex(Path(args.input).read_bytes())},
            seed=args.seed,
            outputs=[args.output],
        ).write(args.output)
    else:
        sys.stdout.write(text)
    return 0


def cmd_baseline(args) -> int:
    corpus = load_corpus(args.corpus, args.format)
    if args.candidates:
        candidates = load_candidates(Path(args.candidates).read_bytes())
    else:
        candidates = candidates_from_corpus(corpus)
    if args.manifest:
        manifest = parse_manifest(Path(args.manifest).read_bytes())
    else:
        manifest = export_manifest(corpus)
    preds = predict(corpus, manifest, candidates)
    Path(args.out).write_bytes(("\n".join(preds.responses) + "\n").encode("utf-8")
                               if preds.responses else b"")
    RunRecord(
        subcommand="baseline",
        config={"candidates": args.candidates or "(corpus gold responses)"},
        input_checksums={str(args.corpus): sha256_hex(Path(args.corpus).read_bytes())},
        seed=None,
        outputs=[args.out],
    ).write(args.out)
    return 0


def cmd_patterns(args) -> int:
    rows = [f"{'code':<8}{'class':<7}{'recipe':<8}name"]
    for e in list_patterns():
        rows.append(f"{e.code:<8}{e.id.klass:<7}{'yes' if e.has_recipe else '-':<8}{e.id.name}")
    sys.stdout.write("\n".join(rows) + "\n")
    return 0


_COMMANDS = {
    "inject": cmd_inject,
    "ablate": cmd_ablate,
    "stats": cmd_stats,
    "eval": cmd_eval,
    "review": cmd_review,
    "baseline": cmd_baseline,
    "patterns": cmd_patterns,
}


def main(argv: list[str] | None = None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
        return _COMMANDS[args.cmd](args)
    except UsageError as e:
        print(f"usage error: {e}", file=sys.stderr)
        parser.print_usage(sys.stderr)
        return 1
    except ShortfallError as e:
        print(f"plan shortfall: {e}", file=sys.stderr)
        return 3
    except PlanError as e:
        msg = str(e)
        print(f"error: {msg}", file=sys.stderr)
        return 2 if "mismatch" in msg else 1
    except (ParseError, MetricError, ModelError, BaselineError) as e:
        print(f"error: {e}", file=sys.stderr)
        return 2
    except FileNotFoundError as e:
        print(f"error: {e}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
