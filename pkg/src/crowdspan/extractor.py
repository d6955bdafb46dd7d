"""Rule-based crowd-size span extraction.

Pipeline: find number phrases, keep the ones matching the document's
order-of-magnitude label, prefer phrases inside sentences that mention a
crowd keyword, take the earliest, then widen leftward over hedge words
("about", "more than", "at least", ...) without crossing the sentence
start.  When no keyword sentence holds a matching phrase the first match
anywhere is returned, flagged as a fallback.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import TYPE_CHECKING, Mapping, Sequence

from .config import (
    DEFAULT_BUCKET_BOUNDS,
    DEFAULT_KEYWORDS,
    DEFAULT_MODIFIER_PATTERNS,
)
from .quantities import (
    NumberPhrase,
    Sentence,
    Token,
    find_number_phrases,
    magnitude_bucket,
    segment_sentences,
    sentence_index_of,
    tokenize,
)

if TYPE_CHECKING:
    from .corpus import Document

NO_NUMBER_PHRASE = "no_number_phrase"
NO_MAGNITUDE_MATCH = "no_magnitude_match"
FALLBACK_USED = "no_keyword_sentence_fallback_used"


@dataclass(frozen=True)
class Candidate:
    phrase: NumberPhrase
    sentence_index: int
    token_start: int
    token_end: int
    char_start: int
    char_end: int


@dataclass(frozen=True)
class ExtractionResult:
    """A single extracted span, or the reason none was produced.

    ``none_reason`` doubles as an informational flag: when the keyword
    filter found nothing and the document-wide fallback fired, the span is
    present and ``none_reason`` is FALLBACK_USED.
    """

    span_text: str | None = None
    start_char: int | None = None
    end_char: int | None = None
    none_reason: str | None = None

    @property
    def fallback_used(self) -> bool:
        return self.span_text is not None and self.none_reason == FALLBACK_USED


def filter_by_magnitude(
    phrases: Sequence[NumberPhrase],
    coarse: int,
    bounds: Sequence[int] = DEFAULT_BUCKET_BOUNDS,
) -> list[NumberPhrase]:
    """Keep phrases whose magnitude bucket equals the coarse label."""
    return [p for p in phrases if magnitude_bucket(p.value, bounds) == coarse]


def keyword_sentence_indices(
    sentences: Sequence[Sentence],
    tokens: Sequence[Token],
    keywords: Sequence[str] = DEFAULT_KEYWORDS,
) -> list[int]:
    """Sentences containing a crowd keyword (lowercase prefix match)."""
    hits = []
    for idx, sent in enumerate(sentences):
        for tok in tokens[sent.start : sent.end]:
            w = tok.text.lower()
            if any(w.startswith(k) for k in keywords):
                hits.append(idx)
                break
    return hits


def expand_modifiers(
    phrase: NumberPhrase,
    sentence: Sentence,
    tokens: Sequence[Token],
    patterns: Sequence[Sequence[str]] = DEFAULT_MODIFIER_PATTERNS,
) -> tuple[int, int]:
    """Widen the phrase leftward over adjacent hedge patterns.

    Patterns are matched longest-first and absorbed repeatedly ("nearly as
    many as 100"); the sentence start is a hard boundary and nothing is
    ever added to the right of the phrase.
    """
    ordered = sorted(patterns, key=len, reverse=True)
    start = phrase.start
    changed = True
    while changed:
        changed = False
        for pat in ordered:
            k = len(pat)
            if start - k < sentence.start:
                continue
            window = [tokens[start - k + m].text.lower() for m in range(k)]
            if window == list(pat):
                start -= k
                changed = True
                break
    return start, phrase.end


def extract(
    document: "Document",
    coarse: int | None = None,
    *,
    keywords: Sequence[str] = DEFAULT_KEYWORDS,
    bounds: Sequence[int] = DEFAULT_BUCKET_BOUNDS,
    vague: Mapping[str, int] | None = None,
    patterns: Sequence[Sequence[str]] = DEFAULT_MODIFIER_PATTERNS,
) -> ExtractionResult:
    """Run the full heuristic pipeline on one document.

    ``coarse`` defaults to the document's own label.  Total on valid
    documents: the result either carries a span with exact char offsets
    into ``document.text`` or names the reason none was found.
    """
    if coarse is None:
        coarse = document.coarse_label
    if coarse is None:
        raise ValueError(f"document {document.id!r} has no coarse label")

    text = document.text
    tokens = tokenize(text)
    phrases = find_number_phrases(tokens, vague=vague, keywords=keywords)
    if not phrases:
        return ExtractionResult(none_reason=NO_NUMBER_PHRASE)

    matching = filter_by_magnitude(phrases, coarse, bounds)
    if not matching:
        return ExtractionResult(none_reason=NO_MAGNITUDE_MATCH)

    sentences = segment_sentences(tokens)
    keyword_set = set(keyword_sentence_indices(sentences, tokens, keywords))

    chosen: NumberPhrase | None = None
    reason: str | None = None
    for phrase in matching:
        if sentence_index_of(sentences, phrase.start) in keyword_set:
            chosen = phrase
            break
    if chosen is None:
        chosen = matching[0]
        reason = FALLBACK_USED

    sent = sentences[sentence_index_of(sentences, chosen.start)]
    tok_start, tok_end = expand_modifiers(chosen, sent, tokens, patterns)
    char_start = tokens[tok_start].start_char
    char_end = tokens[tok_end - 1].end_char
    return ExtractionResult(
        span_text=text[char_start:char_end],
        start_char=char_start,
        end_char=char_end,
        none_reason=reason,
    )


def candidates(
    document: "Document",
    coarse: int | None = None,
    *,
    keywords: Sequence[str] = DEFAULT_KEYWORDS,
    bounds: Sequence[int] = DEFAULT_BUCKET_BOUNDS,
    vague: Mapping[str, int] | None = None,
    patterns: Sequence[Sequence[str]] = DEFAULT_MODIFIER_PATTERNS,
) -> list[Candidate]:
    """Expanded magnitude-matching candidates, in document order."""
    if coarse is None:
        coarse = document.coarse_label
    if coarse is None:
        raise ValueError(f"document {document.id!r} has no coarse label")
    tokens = tokenize(document.text)
    sentences = segment_sentences(tokens)
    out = []
    for phrase in filter_by_magnitude(
        find_number_phrases(tokens, vague=vague, keywords=keywords), coarse, bounds
    ):
        sidx = sentence_index_of(sentences, phrase.start)
        ts, te = expand_modifiers(phrase, sentences[sidx], tokens, patterns)
        out.append(
            Candidate(
                phrase=phrase,
                sentence_index=sidx,
                token_start=ts,
                token_end=te,
                char_start=tokens[ts].start_char,
                char_end=tokens[te - 1].end_char,
            )
        )
    return out
