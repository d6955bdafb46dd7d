"""Corpus model and line-delimited JSON I/O.

One JSON object per line with exactly the Document field names.  Optional
fields are omitted when unset; an explicit empty ``gold_spans`` list means
"known to have no answer" and survives a round trip, which is how weak
labeling emits impossible-answer training examples.
"""

from __future__ import annotations

import json
import math
import random
import re
from dataclasses import dataclass, replace
from pathlib import Path
from typing import Callable, Iterable, Sequence

from .errors import RecordParseError, ValidationError

COARSE_LABELS = (0, 1, 2, 3)
SPLIT_NAMES = ("coarse_train", "gold_span_train", "validation", "test")


@dataclass(frozen=True)
class GoldSpan:
    text: str
    start_char: int
    end_char: int


@dataclass(frozen=True)
class Document:
    """One news article, optionally with a coarse label and gold spans."""

    id: str
    text: str
    url: str | None = None
    coarse_label: int | None = None
    gold_spans: tuple[GoldSpan, ...] | None = None


def validate_document(doc: Document) -> None:
    """Raise ValidationError when any Document invariant is broken."""
    if not doc.id:
        raise ValidationError("document id must be nonempty")
    if doc.coarse_label is not None and doc.coarse_label not in COARSE_LABELS:
        raise ValidationError(
            f"document {doc.id}: coarse_label {doc.coarse_label} not in {COARSE_LABELS}"
        )
    if doc.gold_spans is None:
        return
    for span in doc.gold_spans:
        if not span.text:
            raise ValidationError(f"document {doc.id}: empty gold span text")
        if not 0 <= span.start_char < span.end_char <= len(doc.text):
            raise ValidationError(
                f"document {doc.id}: gold span offsets "
                f"[{span.start_char}, {span.end_char}) out of bounds"
            )
        sliced = doc.text[span.start_char : span.end_char]
        if sliced != span.text:
            raise ValidationError(
                f"document {doc.id}: gold span text {span.text!r} does not match "
                f"slice {sliced!r}"
            )


def validate_corpus(docs: Sequence[Document]) -> None:
    seen: set[str] = set()
    for doc in docs:
        validate_document(doc)
        if doc.id in seen:
            raise ValidationError(f"duplicate document id: {doc.id}")
        seen.add(doc.id)


_DOC_FIELDS = {"id", "url", "text", "coarse_label", "gold_spans"}


def _doc_from_record(record: dict, line_no: int) -> Document:
    unknown = set(record) - _DOC_FIELDS
    if unknown:
        raise RecordParseError(f"line {line_no}: unknown fields {sorted(unknown)}")
    try:
        doc_id = record["id"]
        text = record["text"]
    except KeyError as exc:
        raise RecordParseError(f"line {line_no}: missing field {exc}") from exc
    if not isinstance(doc_id, str) or not isinstance(text, str):
        raise RecordParseError(f"line {line_no}: id and text must be strings")
    url = record.get("url")
    coarse = record.get("coarse_label")
    if coarse is not None and not isinstance(coarse, int):
        raise RecordParseError(f"line {line_no}: coarse_label must be an integer")
    spans_field = record.get("gold_spans")
    spans: tuple[GoldSpan, ...] | None = None
    if spans_field is not None:
        try:
            spans = tuple(
                GoldSpan(s["text"], int(s["start_char"]), int(s["end_char"]))
                for s in spans_field
            )
        except (TypeError, KeyError, ValueError) as exc:
            raise RecordParseError(f"line {line_no}: bad gold_spans entry: {exc}") from exc
    return Document(id=doc_id, text=text, url=url, coarse_label=coarse, gold_spans=spans)


def load_corpus(path: str | Path) -> list[Document]:
    """Load a JSONL corpus, validating every record.

    Errors name the offending line (parse) or document id (validation).
    """
    docs: list[Document] = []
    with open(path, encoding="utf-8") as handle:
        for line_no, line in enumerate(handle, start=1):
            if not line.strip():
                continue
            try:
                record = json.loads(line)
            except json.JSONDecodeError as exc:
                raise RecordParseError(f"line {line_no}: invalid JSON: {exc}") from exc
            if not isinstance(record, dict):
                raise RecordParseError(f"line {line_no}: record must be a JSON object")
            docs.append(_doc_from_record(record, line_no))
    validate_corpus(docs)
    return docs


def document_to_record(doc: Document) -> dict:
    record: dict = {"id": doc.id}
    if doc.url is not None:
        record["url"] = doc.url
    record["text"] = doc.text
    if doc.coarse_label is not None:
        record["coarse_label"] = doc.coarse_label
    if doc.gold_spans is not None:
        record["gold_spans"] = [
            {"text": s.text, "start_char": s.start_char, "end_char": s.end_char}
            for s in doc.gold_spans
        ]
    return record


def save_corpus(docs: Iterable[Document], path: str | Path) -> None:
    with open(path, "w", encoding="utf-8") as handle:
        for doc in docs:
            handle.write(json.dumps(document_to_record(doc), ensure_ascii=False))
            handle.write("\n")


@dataclass(frozen=True)
class SplitSpec:
    """Four-way split sizes, as absolute counts or ratios, plus a seed."""

    counts: tuple[int, int, int, int] | None = None
    ratios: tuple[float, float, float, float] | None = None
    seed: int = 0

    def validate(self) -> None:
        if (self.counts is None) == (self.ratios is None):
            raise ValidationError("exactly one of counts/ratios must be given")
        if self.counts is not None:
            if len(self.counts) != 4 or any(c < 0 for c in self.counts):
                raise ValidationError("counts must be four nonnegative integers")
        if self.ratios is not None:
            if len(self.ratios) != 4 or any(r < 0 for r in self.ratios):
                raise ValidationError("ratios must be four nonnegative numbers")
            if not math.isclose(sum(self.ratios), 1.0, abs_tol=1e-9):
                raise ValidationError(f"ratios must sum to 1, got {sum(self.ratios)}")


@dataclass(frozen=True)
class SplitResult:
    """Document ids per split; together a partition of the corpus ids."""

    coarse_train: tuple[str, ...]
    gold_span_train: tuple[str, ...]
    validation: tuple[str, ...]
    test: tuple[str, ...]

    def as_dict(self) -> dict[str, tuple[str, ...]]:
        return {
            "coarse_train": self.coarse_train,
            "gold_span_train": self.gold_span_train,
            "validation": self.validation,
            "test": self.test,
        }


def apportion(ratios: Sequence[float], total: int) -> list[int]:
    """Largest-remainder conversion of ratios to counts summing to total."""
    quotas = [r * total for r in ratios]
    counts = [math.floor(q) for q in quotas]
    shortfall = total - sum(counts)
    remainders = sorted(
        range(len(ratios)), key=lambda i: (quotas[i] - counts[i], -i), reverse=True
    )
    for i in remainders[:shortfall]:
        counts[i] += 1
    return counts


def split_corpus(corpus: Sequence[Document], spec: SplitSpec) -> SplitResult:
    """Deterministic seeded shuffle, then partition in the canonical order."""
    spec.validate()
    if not corpus:
        raise ValidationError("cannot split an empty corpus")
    n = len(corpus)
    if spec.counts is not None:
        counts = list(spec.counts)
        if sum(counts) > n:
            raise ValidationError(f"counts sum to {sum(counts)}, corpus has {n}")
        if sum(counts) != n:
            raise ValidationError(
                f"counts must sum to the corpus size ({n}), got {sum(counts)}"
            )
    else:
        counts = apportion(spec.ratios, n)

    ids = [doc.id for doc in corpus]
    random.Random(spec.seed).shuffle(ids)
    parts: list[tuple[str, ...]] = []
    offset = 0
    for count in counts:
        parts.append(tuple(ids[offset : offset + count]))
        offset += count
    return SplitResult(*parts)


_PARAGRAPH = re.compile(r"[^\n]+")


def truncate_to_gold_paragraph(doc: Document) -> Document:
    """Cut a document down to the paragraph containing its first gold span.

    Gold span offsets are rebased; spans outside the chosen paragraph are
    dropped.  Documents without gold spans, or whose first span straddles a
    paragraph boundary, come back unchanged.
    """
    if not doc.gold_spans:
        return doc
    first = min(doc.gold_spans, key=lambda s: s.start_char)
    for m in _PARAGRAPH.finditer(doc.text):
        if m.start() <= first.start_char and first.end_char <= m.end():
            shifted = tuple(
                GoldSpan(s.text, s.start_char - m.start(), s.end_char - m.start())
                for s in doc.gold_spans
                if m.start() <= s.start_char and s.end_char <= m.end()
            )
            return replace(doc, text=m.group(), gold_spans=shifted)
    return doc


def materialize_splits(
    corpus: Sequence[Document],
    result: SplitResult,
    *,
    truncate_gold: bool = True,
) -> dict[str, list[Document]]:
    """Build the four split corpora with the label conventions applied.

    Coarse-train documents lose their gold spans; gold-span-train documents
    lose their coarse labels and (by default) shrink to the paragraph around
    the first gold span.
    """
    by_id = {doc.id: doc for doc in corpus}
    splits: dict[str, list[Document]] = {}
    for name, ids in result.as_dict().items():
        docs = []
        for doc_id in ids:
            doc = by_id[doc_id]
            if name == "coarse_train":
                doc = replace(doc, gold_spans=None)
            elif name == "gold_span_train":
                if truncate_gold:
                    doc = truncate_to_gold_paragraph(doc)
                doc = replace(doc, coarse_label=None)
            docs.append(doc)
        splits[name] = docs
    return splits


def write_splits(
    corpus: Sequence[Document],
    result: SplitResult,
    out_dir: str | Path,
    *,
    seed: int,
    truncate_gold: bool = True,
) -> dict:
    """Write the four split files plus a manifest; returns the manifest."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    splits = materialize_splits(corpus, result, truncate_gold=truncate_gold)
    manifest = {
        "seed": seed,
        "counts": {name: len(docs) for name, docs in splits.items()},
        "files": {name: f"{name}.jsonl" for name in splits},
    }
    for name, docs in splits.items():
        save_corpus(docs, out / f"{name}.jsonl")
    (out / "manifest.json").write_text(
        json.dumps(manifest, indent=2, sort_keys=True) + "\n", encoding="utf-8"
    )
    return manifest


def emit_weak_labels(
    corpus: Sequence[Document],
    extract: Callable[[Document], object],
) -> list[Document]:
    """Replace gold spans with the heuristic extractor's output.

    Every input document must carry a coarse label.  Documents where the
    extractor finds nothing are emitted with an empty gold span list, i.e.
    impossible-answer training examples.
    """
    out: list[Document] = []
    for doc in corpus:
        if doc.coarse_label is None:
            raise ValidationError(f"document {doc.id} has no coarse_label")
        result = extract(doc)
        if getattr(result, "span_text", None) is not None:
            spans: tuple[GoldSpan, ...] = (
                GoldSpan(result.span_text, result.start_char, result.end_char),
            )
        else:
            spans = ()
        weak = replace(doc, gold_spans=spans)
        validate_document(weak)
        out.append(weak)
    return out
