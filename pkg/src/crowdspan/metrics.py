"""Exact-match and token-level F1 scoring with corpus aggregation.

Normalization lowercases and strips edge punctuation per whitespace token.
Articles and hedge words are kept: "about 300" and "300" are different
answers here.  Exact match compares normalized token sequences against any
gold span; F1 takes the best multiset-overlap score over the golds.
"""

from __future__ import annotations

import string
from collections import Counter
from dataclasses import dataclass
from typing import Sequence

from .corpus import Document, GoldSpan
from .errors import ValidationError

_STRIP_CHARS = string.punctuation + "‘’“”–—…"


@dataclass(frozen=True)
class Prediction:
    """A predicted span for one document; absent text means "no answer"."""

    doc_id: str
    span_text: str | None = None
    start_char: int | None = None
    end_char: int | None = None

    def __post_init__(self) -> None:
        has_range = self.start_char is not None or self.end_char is not None
        if has_range and self.span_text is None:
            raise ValidationError(
                f"prediction for {self.doc_id}: char range without span text"
            )


@dataclass(frozen=True)
class DocScore:
    doc_id: str
    em: bool
    f1: float


@dataclass(frozen=True)
class EvalReport:
    exact_match: float
    f1: float
    per_doc: tuple[DocScore, ...]

    @property
    def n_docs(self) -> int:
        return len(self.per_doc)


def normalize(text: str) -> list[str]:
    """Lowercase, split on whitespace, strip edge punctuation per token."""
    out = []
    for raw in text.lower().split():
        tok = raw.strip(_STRIP_CHARS)
        if tok:
            out.append(tok)
    return out


def _pred_tokens(pred: Prediction) -> list[str] | None:
    if pred.span_text is None:
        return None
    return normalize(pred.span_text)


def exact_match(pred: Prediction, golds: Sequence[GoldSpan]) -> bool:
    """True iff the normalized token sequences match some gold exactly.

    A no-answer prediction against an empty gold set also counts as exact.
    """
    tokens = _pred_tokens(pred)
    if not golds:
        return tokens is None
    if tokens is None:
        return False
    return any(tokens == normalize(g.text) for g in golds)


def _pair_f1(pred_tokens: list[str], gold_tokens: list[str]) -> float:
    if not pred_tokens or not gold_tokens:
        return float(pred_tokens == gold_tokens)
    common = Counter(pred_tokens) & Counter(gold_tokens)
    num_same = sum(common.values())
    if num_same == 0:
        return 0.0
    precision = num_same / len(pred_tokens)
    recall = num_same / len(gold_tokens)
    return 2 * precision * recall / (precision + recall)


def token_f1(pred: Prediction, golds: Sequence[GoldSpan]) -> float:
    """Best token-multiset F1 over the gold spans, in [0, 1]."""
    tokens = _pred_tokens(pred)
    if not golds:
        return 1.0 if tokens is None else 0.0
    if tokens is None:
        return 0.0
    return max(_pair_f1(tokens, normalize(g.text)) for g in golds)


def evaluate(
    predictions: Sequence[Prediction], corpus: Sequence[Document]
) -> EvalReport:
    """Score predictions against a corpus; unpredicted docs count as no-answer.

    Corpus-level numbers are unweighted means over all corpus documents.
    A prediction for an id absent from the corpus is an error, as is more
    than one prediction per document.
    """
    known = {doc.id for doc in corpus}
    by_id: dict[str, Prediction] = {}
    for pred in predictions:
        if pred.doc_id not in known:
            raise ValidationError(f"prediction for unknown document {pred.doc_id!r}")
        if pred.doc_id in by_id:
            raise ValidationError(f"multiple predictions for document {pred.doc_id!r}")
        by_id[pred.doc_id] = pred

    per_doc = []
    for doc in corpus:
        pred = by_id.get(doc.id, Prediction(doc.id))
        golds = doc.gold_spans or ()
        per_doc.append(DocScore(doc.id, exact_match(pred, golds), token_f1(pred, golds)))
    n = len(per_doc)
    return EvalReport(
        exact_match=sum(s.em for s in per_doc) / n if n else 0.0,
        f1=sum(s.f1 for s in per_doc) / n if n else 0.0,
        per_doc=tuple(per_doc),
    )
