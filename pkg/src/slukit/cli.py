"""Command-line entry point: ``slukit <subcommand> ...``.

Exit status is 0 on success, 1 for bad inputs (including usage errors) and 2
for unexpected internal failures. Machine-readable output goes to stdout,
diagnostics to stderr.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
import traceback
from pathlib import Path
from typing import Optional, Sequence

from . import __version__
from .alignment import align_words, format_alignment
from .corpus import ManifestError, corpus_stats, lint_record, parse_manifest, write_manifest
from .fusion import SelectionMatrix, Tokenization, build_selection_matrix, load_vocab, write_selection
from .kbrefine import EmbeddingTable, build_kb, load_embeddings, refine_corpus, write_report
from .metrics import MetricsError, TagMode, evaluate
from .noisemix import AugmentPlan, augment_corpus, check_disjoint_pools

log = logging.getLogger("slukit")

EXIT_OK, EXIT_INVALID, EXIT_INTERNAL = 0, 1, 2


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message: str) -> None:  # argparse default exits with 2
        self.print_usage(sys.stderr)
        raise UsageError(f"{self.prog}: error: {message}")


def _dump(obj: object) -> None:
    sys.stdout.write(json.dumps(obj, indent=2, sort_keys=True, ensure_ascii=False) + "\n")


def _read_lines(path: str) -> list[str]:
    with open(path, "r", encoding="utf-8") as handle:
        return [ln.strip() for ln in handle if ln.strip()]


def _tag_mode_arg(p: argparse.ArgumentParser) -> None:
    p.add_argument("--tag-mode", choices=["raw", "strip-bio"], default="raw",
                   help="keep B-/I- prefixes as distinct labels (raw) or strip them")


def cmd_score(args: argparse.Namespace) -> int:
    report = evaluate(
        parse_manifest(args.ref),
        parse_manifest(args.hyp),
        TagMode.parse(args.tag_mode),
        intent_average=args.intent_average,
    )
    if report.vacuous_slots:
        log.warning("no slot labels in reference or hypothesis; slots edit F1 reported as 1.0")
    if args.tsv:
        Path(args.tsv).write_text(report.to_tsv(), encoding="utf-8")
    if args.pretty:
        sys.stdout.write(report.to_table())
    else:
        _dump(report.to_json())
    return EXIT_OK


def cmd_align(args: argparse.Namespace) -> int:
    if args.ref_text is not None or args.hyp_text is not None:
        ref = (args.ref_text or "").split()
        hyp = (args.hyp_text or "").split()
        sys.stdout.write(format_alignment(align_words(ref, hyp), ref, hyp))
        return EXIT_OK
    if not (args.ref and args.hyp):
        raise UsageError("align needs --ref/--hyp manifests or --ref-text/--hyp-text")
    refs = parse_manifest(args.ref).by_id()
    hyps = parse_manifest(args.hyp)
    for h in hyps:
        if args.id and h.id != args.id:
            continue
        if h.id not in refs:
            raise MetricsError(f"hypothesis id {h.id!r} not in reference")
        r = refs[h.id]
        al = align_words(r.words, h.words)
        sys.stdout.write(f"# {h.id}\tdistance={al.distance}\n")
        sys.stdout.write(format_alignment(al, r.words, h.words))
    return EXIT_OK


def _parse_snrs(text: str) -> list[float]:
    try:
        return [float(x) for x in text.split(",") if x.strip()]
    except ValueError as exc:
        raise UsageError(f"bad --snrs value {text!r}") from exc


def cmd_augment(args: argparse.Namespace) -> int:
    if args.noise_list:
        pool = _read_lines(args.noise_list)
    elif args.noise_dir:
        pool = [str(p) for p in sorted(Path(args.noise_dir).glob("*.wav"))]
    else:
        raise UsageError("augment needs --noise-dir or --noise-list")
    if args.exclude_noise_list:
        violations = check_disjoint_pools(pool, _read_lines(args.exclude_noise_list))
        if violations:
            for v in violations:
                log.error("noise pool overlap: %s", v)
            return EXIT_INVALID
    manifest = parse_manifest(args.manifest)
    plan = AugmentPlan(
        noise_pool=pool,
        seed=args.seed,
        snr_levels_db=_parse_snrs(args.snrs),
        strict_sampling=args.strict_sampling,
    )
    audio_root = args.audio_root or str(Path(args.manifest).parent)
    out = augment_corpus(manifest, plan, args.out, audio_root, jobs=args.jobs)
    out_manifest = Path(args.out) / "manifest.jsonl"
    write_manifest(out, out_manifest)
    _dump({"manifest": str(out_manifest), "records": len(out), "source_records": len(manifest)})
    return EXIT_OK


def cmd_refine(args: argparse.Namespace) -> int:
    tag_mode = TagMode.parse(args.tag_mode)
    kb = build_kb(parse_manifest(args.kb_from), tag_mode)
    emb = load_embeddings(args.embeddings) if args.embeddings else EmbeddingTable({})
    refined, report = refine_corpus(parse_manifest(args.hyp), kb, emb, args.iterations, tag_mode)
    if args.report:
        write_report(report, args.report)
    if args.out:
        write_manifest(refined, args.out)
    else:
        for rec in refined:
            sys.stdout.write(json.dumps(rec.to_json(), ensure_ascii=False) + "\n")
    changed = sum(1 for r in report if r.replacement != r.original)
    log.info("refined %d utterances, %d words replaced", len(refined), changed)
    return EXIT_OK


def cmd_build_masks(args: argparse.Namespace) -> int:
    vocab = load_vocab(args.vocab)

    def mask(words: Sequence[str]) -> SelectionMatrix:
        tok = Tokenization.from_words(
            words, vocab, args.marker, args.prefix_specials, args.suffix_specials
        )
        return build_selection_matrix(words, tok)

    if args.words is not None:
        m = mask(args.words.split())
        sys.stdout.write(f"{m.rows} {m.cols}\n" + " ".join(map(str, m.selected)) + "\n")
        return EXIT_OK
    if not (args.manifest and args.out):
        raise UsageError("build-masks needs --words, or --manifest with --out")
    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)
    summary = {}
    for rec in parse_manifest(args.manifest):
        m = mask(rec.words)
        write_selection(m, out_dir / f"{rec.id}.sel")
        summary[rec.id] = [m.rows, m.cols]
    _dump({"out": str(out_dir), "shapes": summary})
    return EXIT_OK


def cmd_stats(args: argparse.Namespace) -> int:
    stats = corpus_stats(parse_manifest(args.manifest), args.audio_root)
    _dump(stats.to_json())
    return EXIT_OK


def cmd_validate(args: argparse.Namespace) -> int:
    status = EXIT_OK
    result: dict = {}
    if args.manifest:
        try:
            m = parse_manifest(args.manifest)
        except ManifestError as exc:
            log.error("%s: %s", args.manifest, exc)
            return EXIT_INVALID
        warnings = [w for rec in m for w in lint_record(rec)]
        for w in warnings:
            log.warning("%s", w)
        result.update(records=len(m), warnings=len(warnings))
    if args.noise_train or args.noise_test:
        if not (args.noise_train and args.noise_test):
            raise UsageError("--noise-train and --noise-test go together")
        violations = check_disjoint_pools(
            _read_lines(args.noise_train), _read_lines(args.noise_test)
        )
        for v in violations:
            log.error("noise pool overlap: %s", v)
        result["noise_pool_violations"] = len(violations)
        if violations:
            status = EXIT_INVALID
    if not result:
        raise UsageError("validate needs --manifest and/or --noise-train/--noise-test")
    result["valid"] = status == EXIT_OK
    _dump(result)
    return status


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="slukit", description="SLU evaluation and data tooling")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True, metavar="COMMAND")

    p = sub.add_parser("score", help="WER, slots edit F1 and intent F1")
    p.add_argument("--ref", required=True)
    p.add_argument("--hyp", required=True)
    _tag_mode_arg(p)
    p.add_argument("--intent-average", choices=["micro", "macro"], default="micro")
    p.add_argument("--tsv", help="write a per-utterance breakdown here")
    p.add_argument("--pretty", action="store_true", help="print a percentage table instead of JSON")
    p.set_defaults(func=cmd_score)

    p = sub.add_parser("align", help="dump word alignments")
    p.add_argument("--ref")
    p.add_argument("--hyp")
    p.add_argument("--id", help="only this utterance")
    p.add_argument("--ref-text")
    p.add_argument("--hyp-text")
    p.set_defaults(func=cmd_align)

    p = sub.add_parser("augment", help="mix noise into a corpus at fixed SNRs")
    p.add_argument("--manifest", required=True)
    p.add_argument("--noise-dir")
    p.add_argument("--noise-list", help="file with one noise WAV path per line")
    p.add_argument("--exclude-noise-list", help="refuse to run if the pool overlaps this list")
    p.add_argument("--audio-root", help="directory audio paths are relative to (default: manifest dir)")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--snrs", default="0,10,20,30,40")
    p.add_argument("--out", required=True)
    p.add_argument("--strict-sampling", action="store_true",
                   help="fail instead of sampling noises with replacement")
    p.add_argument("--jobs", type=int, default=1)
    p.set_defaults(func=cmd_augment)

    p = sub.add_parser("refine", help="snap slot words to a training-set knowledge base")
    p.add_argument("--hyp", required=True)
    p.add_argument("--kb-from", required=True)
    p.add_argument("--embeddings")
    p.add_argument("--iterations", type=int, default=1)
    p.add_argument("--report")
    p.add_argument("--out", help="write the refined manifest here instead of stdout")
    _tag_mode_arg(p)
    p.set_defaults(func=cmd_refine)

    p = sub.add_parser("build-masks", help="first-subword selection matrices")
    p.add_argument("--vocab", required=True)
    p.add_argument("--marker", default="##")
    p.add_argument("--prefix-specials", type=int, default=0)
    p.add_argument("--suffix-specials", type=int, default=0)
    p.add_argument("--words", help="space-separated words; prints one sparse matrix")
    p.add_argument("--manifest")
    p.add_argument("--out")
    p.set_defaults(func=cmd_build_masks)

    p = sub.add_parser("stats", help="corpus statistics")
    p.add_argument("--manifest", required=True)
    p.add_argument("--audio-root")
    p.set_defaults(func=cmd_stats)

    p = sub.add_parser("validate", help="check a manifest and/or noise pool disjointness")
    p.add_argument("--manifest")
    p.add_argument("--noise-train")
    p.add_argument("--noise-test")
    p.set_defaults(func=cmd_validate)
    return parser


def run(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except UsageError as exc:
        print(exc, file=sys.stderr)
        return EXIT_INVALID
    except SystemExit as exc:  # --help / --version
        return int(exc.code or 0)
    logging.basicConfig(
        level=logging.INFO if args.verbose else logging.WARNING,
        format="%(levelname)s: %(message)s",
        stream=sys.stderr,
        force=True,
    )
    try:
        return args.func(args)
    except UsageError as exc:
        print(f"slukit {args.command}: {exc}", file=sys.stderr)
        return EXIT_INVALID
    except (ValueError, OSError) as exc:
        print(f"slukit {args.command}: {exc}", file=sys.stderr)
        return EXIT_INVALID
    except Exception:
        traceback.print_exc()
        return EXIT_INTERNAL


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
