"""Tokenization, sentence segmentation, and number-phrase normalization.

Number phrases cover digit tokens ("1,200"), written numerals up to the
millions ("two hundred and fifty", "twenty-five"), and vague quantities
("several dozen" -> 36, "tens of thousands" -> 20000).  Every phrase
carries the positive integer it normalizes to; the magnitude bucket maps
that integer to an order-of-magnitude label in {0,1,2,3}.
"""

from __future__ import annotations

import re
import unicodedata
from bisect import bisect_right
from dataclasses import dataclass
from typing import Iterable, Mapping, Sequence

from .config import DEFAULT_BUCKET_BOUNDS, DEFAULT_KEYWORDS, DEFAULT_VAGUE_QUANTITIES
from .errors import NumberParseError


@dataclass(frozen=True)
class Token:
    text: str
    start_char: int
    end_char: int
    index: int


@dataclass(frozen=True)
class Sentence:
    """Token index range, start inclusive, end exclusive."""

    start: int
    end: int


@dataclass(frozen=True)
class NumberPhrase:
    """Contiguous token range normalizing to a positive integer."""

    start: int
    end: int
    value: int
    surface: str


_CHUNK = re.compile(r"\S+")


def _is_edge_punct(ch: str) -> bool:
    cat = unicodedata.category(ch)
    return cat.startswith("P") or cat == "Sc"


def tokenize(text: str) -> list[Token]:
    """Whitespace tokenizer that peels edge punctuation into its own tokens.

    Internal separators survive, so "1,200" and "twenty-five" stay single
    tokens while "people." becomes ["people", "."].  Offsets slice the
    source text exactly.
    """
    spans: list[tuple[str, int, int]] = []
    for m in _CHUNK.finditer(text):
        chunk, base = m.group(), m.start()
        i, j = 0, len(chunk)
        lead: list[tuple[str, int, int]] = []
        while i < j and _is_edge_punct(chunk[i]):
            lead.append((chunk[i], base + i, base + i + 1))
            i += 1
        trail: list[tuple[str, int, int]] = []
        while j > i and _is_edge_punct(chunk[j - 1]):
            trail.append((chunk[j - 1], base + j - 1, base + j))
            j -= 1
        spans.extend(lead)
        if i < j:
            spans.append((chunk[i:j], base + i, base + j))
        spans.extend(reversed(trail))
    return [Token(t, s, e, k) for k, (t, s, e) in enumerate(spans)]


_TERMINALS = {".", "!", "?"}

# Tokens that keep a following "." from ending the sentence.  Stored without
# the trailing period, lowercase; single capital letters (initials) are
# guarded separately.
_ABBREVIATIONS = {
    "mr", "mrs", "ms", "dr", "st", "prof", "sen", "rep", "gov", "gen",
    "col", "lt", "sgt", "capt", "rev", "jr", "sr", "inc", "corp", "co",
    "vs", "etc", "no", "approx", "dept", "u.s", "u.k", "u.n", "d.c",
    "a.m", "p.m", "jan", "feb", "mar", "apr", "jun", "jul", "aug", "sep",
    "sept", "oct", "nov", "dec",
}


def _guards_period(prev: Token | None) -> bool:
    if prev is None:
        return False
    text = prev.text
    if len(text) == 1 and text.isalpha() and text.isupper():
        return True
    return text.lower() in _ABBREVIATIONS


def segment_sentences(tokens: Sequence[Token], text: str | None = None) -> list[Sentence]:
    """Split after terminal punctuation unless guarded by an abbreviation.

    The trailing partial sentence is always included; sentences tile the
    token sequence.  ``text`` is accepted for signature symmetry with
    :func:`tokenize` and is not consulted.
    """
    del text
    sentences: list[Sentence] = []
    start = 0
    for i, tok in enumerate(tokens):
        if tok.text not in _TERMINALS:
            continue
        prev = tokens[i - 1] if i > 0 else None
        if _guards_period(prev):
            continue
        sentences.append(Sentence(start, i + 1))
        start = i + 1
    if start < len(tokens):
        sentences.append(Sentence(start, len(tokens)))
    return sentences


_UNITS = {
    "one": 1, "two": 2, "three": 3, "four": 4, "five": 5, "six": 6,
    "seven": 7, "eight": 8, "nine": 9,
}
_TEENS = {
    "ten": 10, "eleven": 11, "twelve": 12, "thirteen": 13, "fourteen": 14,
    "fifteen": 15, "sixteen": 16, "seventeen": 17, "eighteen": 18,
    "nineteen": 19,
}
_TENS = {
    "twenty": 20, "thirty": 30, "forty": 40, "fifty": 50, "sixty": 60,
    "seventy": 70, "eighty": 80, "ninety": 90,
}
_WORD_VALUES = {**_UNITS, **_TEENS, **_TENS}

# "hundred" and "dozen" multiply the running count in place; "thousand" and
# "million" close out a group.  Larger scale words are rejected: crowd sizes.
_MULTIPLIERS = {"hundred": 100, "dozen": 12}
_GROUP_SCALES = {"thousand": 1000, "million": 1000000}
_SCALE_WORDS = set(_MULTIPLIERS) | set(_GROUP_SCALES)

_PLURAL_BASE = {
    "tens": 10, "dozens": 12, "hundreds": 100, "thousands": 1000,
    "millions": 1000000,
}
_SEED_WORDS = ("several", "few", "couple")
_CONNECTORS = {"a", "an", "and", "of"}

_DIGIT_TOKEN = re.compile(r"^\d{1,3}(?:,\d{3})+$|^\d+$")


def _digit_value(text: str) -> int | None:
    if _DIGIT_TOKEN.match(text):
        return int(text.replace(",", ""))
    return None


def _word_atoms(word: str) -> list[str]:
    """Split a hyphenated written numeral into parts; [] if not all numeric."""
    parts = word.split("-")
    if len(parts) > 1 and all(
        p in _WORD_VALUES or p in _SCALE_WORDS for p in parts if p
    ):
        return [p for p in parts if p]
    return []


def phrase_to_value(
    words: Sequence[str], vague: Mapping[str, int] | None = None
) -> int:
    """Normalize a number phrase (as token strings) to a positive integer.

    Digits parse directly with comma separators stripped; written numerals
    compose by the usual multiplier-additive grammar; vague words come from
    the supplied table.  Raises NumberParseError for anything else.
    """
    if vague is None:
        vague = DEFAULT_VAGUE_QUANTITIES
    total = 0
    current = 0
    consumed = False

    def flat_words() -> Iterable[str]:
        for raw in words:
            w = raw.lower()
            if w in _CONNECTORS:
                continue
            digit = _digit_value(raw)
            if digit is not None:
                yield raw
                continue
            parts = _word_atoms(w)
            if parts:
                yield from parts
            else:
                yield w

    for w in flat_words():
        digit = _digit_value(w)
        if digit is not None:
            current += digit
        elif w in _WORD_VALUES:
            current += _WORD_VALUES[w]
        elif w in _SEED_WORDS:
            current += vague.get(w, {"couple": 2, "few": 3, "several": 3}[w])
        elif w in _MULTIPLIERS:
            current = max(current, 1) * _MULTIPLIERS[w]
        elif w in _GROUP_SCALES:
            total += max(current, 1) * _GROUP_SCALES[w]
            current = 0
        elif w in _PLURAL_BASE:
            base = _PLURAL_BASE[w]
            if current == 0:
                current = vague.get(w, 2 * base)
            else:
                # "hundreds of thousands": the plural scales the running count.
                total += current * base
                current = 0
        else:
            raise NumberParseError(f"unrecognized number word: {raw!r}")
        consumed = True

    value = total + current
    if not consumed or value < 1:
        raise NumberParseError(f"not a number phrase: {' '.join(words)!r}")
    return value


def _is_bare_year(
    text: str, index: int, lowered: Sequence[str], keywords: Sequence[str]
) -> bool:
    """4-digit tokens 1900-2099 read as years unless flanked by a keyword."""
    if len(text) != 4 or not text.isdigit():
        return False
    if not 1900 <= int(text) <= 2099:
        return False
    for j in (index - 1, index + 1):
        if 0 <= j < len(lowered) and any(
            lowered[j].startswith(k) for k in keywords
        ):
            return False
    return True


def find_number_phrases(
    tokens: Sequence[Token],
    *,
    vague: Mapping[str, int] | None = None,
    keywords: Sequence[str] = DEFAULT_KEYWORDS,
) -> list[NumberPhrase]:
    """Locate maximal runs of numeric tokens and normalize each run.

    Connectors ("a", "an", "and", "of") join a run only in positions the
    grammar sanctions; vague multipliers ("several", "a few", "a couple")
    join only immediately before a scale word.  Ordinals and bare years are
    excluded.  Runs that fail to normalize are skipped.
    """
    if vague is None:
        vague = DEFAULT_VAGUE_QUANTITIES
    n = len(tokens)
    lowered = [t.text.lower() for t in tokens]

    core = [False] * n
    digit = [False] * n
    for i, tok in enumerate(tokens):
        w = lowered[i]
        if _digit_value(tok.text) is not None:
            digit[i] = True
            core[i] = not _is_bare_year(tok.text, i, lowered, keywords)
        elif w in _WORD_VALUES or _word_atoms(w):
            core[i] = True
        elif w in _SCALE_WORDS:
            core[i] = True
        elif w in _PLURAL_BASE and w != "tens":
            core[i] = True

    join = core[:]
    for i in range(n):
        w = lowered[i]
        nxt = lowered[i + 1] if i + 1 < n else ""
        prv = lowered[i - 1] if i > 0 else ""
        if w == "tens":
            join[i] = nxt == "of" and i + 2 < n and lowered[i + 2] in (
                "thousands",
                "millions",
            )
        elif w in _SEED_WORDS:
            join[i] = nxt in _SCALE_WORDS
        elif w in ("a", "an"):
            join[i] = nxt in _SCALE_WORDS or (
                nxt in _SEED_WORDS and i + 2 < n and lowered[i + 2] in _SCALE_WORDS
            )
        elif w == "of":
            join[i] = (
                prv in _PLURAL_BASE
                and i > 0
                and join[i - 1]
                and nxt in ("thousands", "millions")
            )
        elif w == "and":
            join[i] = (
                prv in _SCALE_WORDS or prv in _PLURAL_BASE
            ) and nxt in _WORD_VALUES

    phrases: list[NumberPhrase] = []
    i = 0
    while i < n:
        if not join[i]:
            i += 1
            continue
        j = i + 1
        while j < n and join[j]:
            if digit[j] and digit[j - 1]:
                break  # two adjacent digit tokens never compose
            j += 1
        words = [tokens[k].text for k in range(i, j)]
        try:
            value = phrase_to_value(words, vague)
        except NumberParseError:
            pass
        else:
            phrases.append(NumberPhrase(i, j, value, " ".join(words)))
        i = j
    return phrases


def magnitude_bucket(
    value: int, bounds: Sequence[int] = DEFAULT_BUCKET_BOUNDS
) -> int:
    """Map a positive integer to its order-of-magnitude label.

    With the default bounds this is clamp(floor(log10(value)) - 1, 0, 3):
    1-99 -> 0, 100-999 -> 1, 1000-9999 -> 2, >=10000 -> 3.
    """
    if value < 1:
        raise ValueError(f"magnitude_bucket needs a positive value, got {value}")
    return bisect_right(list(bounds), value)


def sentence_index_of(sentences: Sequence[Sentence], token_index: int) -> int:
    """Index of the sentence containing a token; sentences tile the tokens."""
    starts = [s.start for s in sentences]
    idx = bisect_right(starts, token_index) - 1
    if idx < 0 or token_index >= sentences[idx].end:
        raise ValueError(f"token {token_index} outside sentence tiling")
    return idx
