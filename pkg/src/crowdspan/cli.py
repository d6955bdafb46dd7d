"""Command-line entry point.

One binary, subcommands per pipeline stage: ingest, split, parse-numbers,
extract, weak-labels, shingle, aggregate, kernel-demo, kernel-check,
evaluate.  Exit codes: 0 success, 1 usage or configuration error, 2 data
validation error, 3 property-check failure.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path
from typing import Iterable

from . import corpus as corpus_io
from . import extractor, kernel, metrics, shingles
from .config import Config, load_config
from .errors import ConfigError, CrowdspanError, RecordParseError, ValidationError
from .htmltext import ingest_html
from .quantities import find_number_phrases, tokenize


class _UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):  # argparse defaults to exit code 2
        self.print_usage(sys.stderr)
        print(f"{self.prog}: error: {message}", file=sys.stderr)
        raise _UsageError(message)


def _emit(lines: Iterable[str], out: str | None) -> None:
    payload = "".join(line + "\n" for line in lines)
    if out:
        Path(out).write_text(payload, encoding="utf-8")
    else:
        sys.stdout.write(payload)


def _dump(obj) -> str:
    return json.dumps(obj, ensure_ascii=False)


def _load_predictions(path: str) -> list[metrics.Prediction]:
    preds = []
    with open(path, encoding="utf-8") as handle:
        for line_no, line in enumerate(handle, start=1):
            if not line.strip():
                continue
            try:
                rec = json.loads(line)
            except json.JSONDecodeError as exc:
                raise RecordParseError(f"line {line_no}: invalid JSON: {exc}") from exc
            doc_id = rec.get("id", rec.get("doc_id"))
            if not doc_id:
                raise RecordParseError(f"line {line_no}: missing id")
            preds.append(
                metrics.Prediction(
                    doc_id=doc_id,
                    span_text=rec.get("span_text"),
                    start_char=rec.get("start_char"),
                    end_char=rec.get("end_char"),
                )
            )
    return preds


def _cmd_ingest(args, cfg: Config) -> int:
    del cfg
    root = Path(args.input)
    files = sorted(p for p in root.iterdir() if p.is_file()) if root.is_dir() else [root]
    lines = []
    for path in files:
        raw = path.read_text(encoding="utf-8", errors="replace")
        if path.suffix.lower() in (".html", ".htm"):
            text = ingest_html(raw)
        else:
            text = raw.replace("\r\n", "\n").replace("\r", "\n").strip()
        doc = corpus_io.Document(id=path.stem, text=text)
        lines.append(_dump(corpus_io.document_to_record(doc)))
    _emit(lines, args.out)
    return 0


def _parse_four(raw: str, cast) -> tuple:
    parts = [cast(p) for p in raw.split(",")]
    if len(parts) != 4:
        raise ConfigError(f"expected four comma-separated values, got {raw!r}")
    return tuple(parts)


def _cmd_split(args, cfg: Config) -> int:
    docs = corpus_io.load_corpus(args.corpus)
    if args.counts:
        spec = corpus_io.SplitSpec(counts=_parse_four(args.counts, int), seed=cfg.seed)
    elif args.ratios:
        spec = corpus_io.SplitSpec(ratios=_parse_four(args.ratios, float), seed=cfg.seed)
    else:
        raise ConfigError("split needs --counts or --ratios")
    result = corpus_io.split_corpus(docs, spec)
    manifest = corpus_io.write_splits(
        docs,
        result,
        args.out_dir,
        seed=cfg.seed,
        truncate_gold=not args.no_truncate_gold,
    )
    sys.stdout.write(json.dumps(manifest, indent=2, sort_keys=True) + "\n")
    return 0


def _cmd_parse_numbers(args, cfg: Config) -> int:
    if args.text is not None:
        text = args.text
    elif args.input:
        text = Path(args.input).read_text(encoding="utf-8", errors="replace")
    else:
        raise ConfigError("parse-numbers needs --text or --in")
    tokens = tokenize(text)
    lines = []
    for phrase in find_number_phrases(
        tokens, vague=cfg.vague_quantities, keywords=cfg.keywords
    ):
        lines.append(
            _dump(
                {
                    "surface": phrase.surface,
                    "value": phrase.value,
                    "start_token": phrase.start,
                    "end_token": phrase.end,
                    "start_char": tokens[phrase.start].start_char,
                    "end_char": tokens[phrase.end - 1].end_char,
                }
            )
        )
    _emit(lines, args.out)
    return 0


def _extract_one(doc: corpus_io.Document, cfg: Config) -> extractor.ExtractionResult:
    return extractor.extract(
        doc,
        keywords=cfg.keywords,
        bounds=cfg.bucket_bounds,
        vague=cfg.vague_quantities,
        patterns=cfg.modifier_patterns,
    )


def _cmd_extract(args, cfg: Config) -> int:
    docs = corpus_io.load_corpus(args.corpus)
    lines = []
    for doc in docs:
        if doc.coarse_label is None:
            raise ValidationError(f"document {doc.id} has no coarse_label")
        res = _extract_one(doc, cfg)
        lines.append(
            _dump(
                {
                    "id": doc.id,
                    "span_text": res.span_text,
                    "start_char": res.start_char,
                    "end_char": res.end_char,
                    "fallback_used": res.fallback_used,
                }
            )
        )
    _emit(lines, args.out)
    return 0


def _cmd_weak_labels(args, cfg: Config) -> int:
    docs = corpus_io.load_corpus(args.corpus)
    weak = corpus_io.emit_weak_labels(docs, lambda d: _extract_one(d, cfg))
    _emit((_dump(corpus_io.document_to_record(d)) for d in weak), args.out)
    return 0


def _cmd_shingle(args, cfg: Config) -> int:
    docs = corpus_io.load_corpus(args.corpus)
    window = args.window or cfg.window
    stride = args.stride or cfg.stride
    lines = []
    for doc in docs:
        tokens = tokenize(doc.text)
        for sh in shingles.make_shingles(tokens, window, stride, doc_id=doc.id):
            lines.append(
                _dump(
                    {
                        "doc_id": sh.doc_id,
                        "shingle_index": sh.shingle_index,
                        "window_start": sh.window_start,
                        "token_texts": [
                            t.text for t in tokens[sh.window_start : sh.window_end]
                        ],
                    }
                )
            )
    _emit(lines, args.out)
    return 0


def _cmd_aggregate(args, cfg: Config) -> int:
    docs = {d.id: d for d in corpus_io.load_corpus(args.corpus)}
    grouped: dict[str, list[shingles.ShinglePrediction]] = {}
    order: list[str] = []
    with open(args.predictions, encoding="utf-8") as handle:
        for line_no, line in enumerate(handle, start=1):
            if not line.strip():
                continue
            try:
                rec = json.loads(line)
                pred = shingles.ShinglePrediction.from_arrays(
                    int(rec["shingle_index"]), rec["start_scores"], rec["end_scores"]
                )
                doc_id = rec["doc_id"]
            except (json.JSONDecodeError, KeyError, TypeError, ValueError) as exc:
                raise RecordParseError(f"line {line_no}: bad prediction: {exc}") from exc
            if doc_id not in docs:
                raise ValidationError(f"line {line_no}: unknown document {doc_id!r}")
            if doc_id not in grouped:
                order.append(doc_id)
            grouped.setdefault(doc_id, []).append(pred)

    lines = []
    for doc_id in order:
        doc = docs[doc_id]
        tokens = tokenize(doc.text)
        doc_shingles = shingles.make_shingles(
            tokens, args.window or cfg.window, args.stride or cfg.stride, doc_id=doc_id
        )
        agg = shingles.aggregate_predictions(
            grouped[doc_id],
            doc_shingles,
            context_offset=args.context_offset,
            tokens=tokens,
        )
        span_text = (
            None if agg.is_impossible else doc.text[agg.start_char : agg.end_char]
        )
        lines.append(
            _dump(
                {
                    "doc_id": doc_id,
                    "shingle_index": agg.shingle_index,
                    "start_token": agg.start_token,
                    "end_token": agg.end_token,
                    "start_char": agg.start_char,
                    "end_char": agg.end_char,
                    "span_text": span_text,
                    "is_impossible": agg.is_impossible,
                }
            )
        )
    _emit(lines, args.out)
    return 0


def _cmd_kernel_demo(args, cfg: Config) -> int:
    docs = kernel.make_toy_dataset(args.docs, args.n, args.d, cfg.seed)
    trace = kernel.toy_fit(
        docs, steps=args.steps or cfg.steps, lr=args.lr or cfg.lr,
        lam=cfg.lam if args.lam is None else args.lam, seed=cfg.seed,
    )
    payload = {
        "initial_loss": trace.losses[0],
        "final_loss": trace.losses[-1],
        "losses": trace.losses,
        "span_mass": trace.span_mass,
        "mean_span_mass": sum(trace.span_mass) / len(trace.span_mass),
        "final_masks": [m.tolist() for m in trace.final_masks],
    }
    text = json.dumps(payload)
    if args.out:
        Path(args.out).write_text(text + "\n", encoding="utf-8")
    else:
        sys.stdout.write(text + "\n")
    return 0


def _cmd_kernel_check(args, cfg: Config) -> int:
    results = kernel.property_checks(seed=cfg.seed)
    failed = False
    for name, ok, detail in results:
        print(f"{'PASS' if ok else 'FAIL'}  {name}  [{detail}]")
        failed = failed or not ok
    return 3 if failed else 0


def _cmd_evaluate(args, cfg: Config) -> int:
    del cfg
    preds = _load_predictions(args.predictions)
    gold = corpus_io.load_corpus(args.gold)
    report = metrics.evaluate(preds, gold)
    payload: dict = {
        "exact_match": report.exact_match,
        "f1": report.f1,
        "n_docs": report.n_docs,
    }
    if args.per_doc:
        payload["per_doc"] = [
            {"id": s.doc_id, "em": s.em, "f1": s.f1} for s in report.per_doc
        ]
    text = json.dumps(payload, indent=2)
    if args.out:
        Path(args.out).write_text(text + "\n", encoding="utf-8")
    else:
        sys.stdout.write(text + "\n")
    return 0


def build_parser() -> _Parser:
    parser = _Parser(prog="crowdspan", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    def add(name: str, handler, help_: str):
        p = sub.add_parser(name, help=help_)
        p.set_defaults(handler=handler)
        p.add_argument("--config", help="JSON file overriding config defaults")
        p.add_argument("--seed", type=int, help="random seed override")
        p.add_argument("--out", help="output path (default: stdout)")
        return p

    p = add("ingest", _cmd_ingest, "HTML/plain-text files to corpus JSONL")
    p.add_argument("--in", dest="input", required=True, help="file or directory")

    p = add("split", _cmd_split, "split a corpus into the four standard parts")
    p.add_argument("--corpus", required=True)
    p.add_argument("--out-dir", required=True)
    p.add_argument("--counts", help="four comma-separated absolute counts")
    p.add_argument("--ratios", help="four comma-separated ratios summing to 1")
    p.add_argument(
        "--no-truncate-gold",
        action="store_true",
        help="keep gold-span-train documents at full length",
    )

    p = add("parse-numbers", _cmd_parse_numbers, "find and normalize number phrases")
    p.add_argument("--text", help="literal text to parse")
    p.add_argument("--in", dest="input", help="read text from this file")

    p = add("extract", _cmd_extract, "run the heuristic extractor over a corpus")
    p.add_argument("--corpus", required=True)

    p = add("weak-labels", _cmd_weak_labels, "emit heuristic spans as gold spans")
    p.add_argument("--corpus", required=True)

    p = add("shingle", _cmd_shingle, "window documents into fixed-width shingles")
    p.add_argument("--corpus", required=True)
    p.add_argument("--window", type=int)
    p.add_argument("--stride", type=int)

    p = add("aggregate", _cmd_aggregate, "merge per-shingle predictions into spans")
    p.add_argument("--predictions", required=True)
    p.add_argument("--corpus", required=True)
    p.add_argument("--window", type=int)
    p.add_argument("--stride", type=int)
    p.add_argument("--context-offset", type=int, default=0)

    p = add("kernel-demo", _cmd_kernel_demo, "train the toy coarse-to-fine model")
    p.add_argument("--docs", type=int, default=40)
    p.add_argument("--n", type=int, default=32)
    p.add_argument("--d", type=int, default=8)
    p.add_argument("--steps", type=int)
    p.add_argument("--lr", type=float)
    p.add_argument("--lam", type=float)

    add("kernel-check", _cmd_kernel_check, "run mask and gradient property suites")

    p = add("evaluate", _cmd_evaluate, "score predictions against gold spans")
    p.add_argument("--predictions", required=True)
    p.add_argument("--gold", required=True)
    p.add_argument("--per-doc", action="store_true")

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        cfg = load_config(args.config, seed=args.seed)
        code = args.handler(args, cfg)
    except _UsageError:
        return 1
    except ConfigError as exc:
        print(f"crowdspan: config error: {exc}", file=sys.stderr)
        return 1
    except (RecordParseError, ValidationError) as exc:
        print(f"crowdspan: data error: {exc}", file=sys.stderr)
        return 2
    except CrowdspanError as exc:
        print(f"crowdspan: error: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"crowdspan: {exc}", file=sys.stderr)
        return 1
    return code


if __name__ == "__main__":
    sys.exit(main())
