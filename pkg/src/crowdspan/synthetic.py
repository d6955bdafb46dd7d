"""Deterministic synthetic news corpus with planted crowd-size spans.

Every document gets one keyword sentence holding a span that matches the
document's coarse label, plus 2-4 distractor numbers of other magnitudes
in keyword-free sentences and some numberless filler.  Gold spans carry
exact char offsets, so the corpus doubles as an end-to-end oracle for the
extractor: the planted span is the only magnitude-matching phrase.
"""

from __future__ import annotations

import random

from .corpus import Document, GoldSpan, validate_corpus

# (format string, noun-follows-the-span).  When a bare plural like
# "dozens" lands in a noun-follows template it is rendered "dozens of".
_KEYWORD_TEMPLATES: tuple[tuple[str, bool], ...] = (
    ("{span} protesters marched through downtown {city} on {day}.", True),
    ("Police said {span} people gathered outside the {place}.", True),
    ("A crowd of {span} rallied against the measure near the {place}.", False),
    ("Organizers counted {span} demonstrators along the route.", True),
    ("Witnesses reported that {span} people attended the event at the {place}.", True),
    ("The protest drew {span} people to the {place}.", True),
    ("{span} demonstrators picketed outside the {place} for hours.", True),
)

_DISTRACTOR_TEMPLATES: tuple[str, ...] = (
    "The city budget set aside {n} dollars for repairs.",
    "The venue seats {n} according to county records.",
    "Organizers mailed {n} flyers before the weekend.",
    "The newsletter reached {n} subscribers in March.",
    "Officials logged {n} parking tickets downtown last month.",
    "The county processed {n} ballots by the deadline.",
    "A nearby festival sold {n} tickets last year.",
)

_FILLER_SENTENCES: tuple[str, ...] = (
    "The weather stayed mild through the afternoon.",
    "Traffic slowed near the square as streets closed.",
    "Speakers took turns at a small stage by the fountain.",
    "City officials declined to comment on the permit.",
    "The group has rallied annually since 2015.",
)

_CITIES = ("Riverton", "Lakewood", "Fairview", "Brookfield", "Millbrook", "Ashford")
_PLACES = (
    "courthouse",
    "state capitol",
    "city hall",
    "federal building",
    "convention center",
    "public library",
)
_DAYS = ("Saturday", "Sunday", "Friday", "Monday")

# Hedges only decorate digit renderings; written forms read fine bare.
_HEDGES = (
    "",
    "",
    "about",
    "around",
    "nearly",
    "roughly",
    "over",
    "almost",
    "some",
    "approximately",
    "an estimated",
    "more than",
    "at least",
    "up to",
    "as many as",
)

# (surface, value, needs "of" before a following noun)
_WORD_RENDERINGS: dict[int, tuple[tuple[str, int, bool], ...]] = {
    0: (
        ("several dozen", 36, False),
        ("a few dozen", 36, False),
        ("two dozen", 24, False),
        ("twenty-five", 25, False),
        ("dozens", 24, True),
        ("a dozen", 12, False),
        ("fifty", 50, False),
        ("ninety", 90, False),
    ),
    1: (
        ("two hundred", 200, False),
        ("several hundred", 300, False),
        ("a few hundred", 300, False),
        ("two hundred and fifty", 250, False),
        ("hundreds", 200, True),
        ("three hundred", 300, False),
    ),
    2: (
        ("two thousand", 2000, False),
        ("several thousand", 3000, False),
        ("a couple thousand", 2000, False),
        ("thousands", 2000, True),
        ("nine thousand", 9000, False),
    ),
    3: (
        ("tens of thousands", 20000, True),
        ("fifty thousand", 50000, False),
        ("twenty thousand", 20000, False),
        ("hundreds of thousands", 200000, True),
    ),
}


def _digit_value(bucket: int, rng: random.Random) -> int:
    if bucket == 0:
        return rng.randint(5, 99)
    if bucket == 1:
        return rng.randint(100, 999)
    if bucket == 2:
        # skip 1900-2099: bare 4-digit tokens in that range read as years
        return rng.choice((rng.randint(1000, 1899), rng.randint(2100, 9999)))
    return rng.randint(10000, 99999)


def _format_digits(value: int) -> str:
    return f"{value:,}" if value >= 1000 else str(value)


def _planted_surface(bucket: int, rng: random.Random) -> tuple[str, bool]:
    """Span surface for the planted phrase, and whether "of" must follow."""
    if rng.random() < 0.35:
        surface, _, needs_of = rng.choice(_WORD_RENDERINGS[bucket])
        return surface, needs_of
    digits = _format_digits(_digit_value(bucket, rng))
    hedge = rng.choice(_HEDGES)
    return (f"{hedge} {digits}" if hedge else digits), False


def _planted_sentence(
    bucket: int, rng: random.Random
) -> tuple[str, int, int, str]:
    """Build the keyword sentence; returns (sentence, start, end, span)."""
    template, noun_follows = rng.choice(_KEYWORD_TEMPLATES)
    span, needs_of = _planted_surface(bucket, rng)
    prefix, _, suffix = template.partition("{span}")
    prefix = prefix.format(city=rng.choice(_CITIES), place=rng.choice(_PLACES))
    suffix = suffix.format(
        city=rng.choice(_CITIES), place=rng.choice(_PLACES), day=rng.choice(_DAYS)
    )
    if not prefix:
        span = span[0].upper() + span[1:]
    if needs_of and noun_follows:
        suffix = " of" + suffix
    sentence = prefix + span + suffix
    return sentence, len(prefix), len(prefix) + len(span), span


def make_news_corpus(
    n_docs: int = 240,
    seed: int = 7,
    *,
    min_distractors: int = 2,
    max_distractors: int = 4,
) -> list[Document]:
    """Generate a labeled corpus; deterministic given the seed."""
    rng = random.Random(seed)
    docs = []
    for i in range(n_docs):
        bucket = i % 4
        sentence, rel_start, rel_end, span = _planted_sentence(bucket, rng)

        others = []
        n_distract = rng.randint(min_distractors, max_distractors)
        for _ in range(n_distract):
            other_bucket = rng.choice([b for b in range(4) if b != bucket])
            value = _format_digits(_digit_value(other_bucket, rng))
            others.append(rng.choice(_DISTRACTOR_TEMPLATES).format(n=value))
        for _ in range(rng.randint(1, 2)):
            others.append(rng.choice(_FILLER_SENTENCES))
        rng.shuffle(others)

        position = rng.randint(0, len(others))
        ordered = others[:position] + [None] + others[position:]

        parts: list[str] = []
        offset = 0
        span_start = span_end = -1
        for k, item in enumerate(ordered):
            if k > 0:
                sep = "\n" if rng.random() < 0.15 else " "
                parts.append(sep)
                offset += len(sep)
            if item is None:
                span_start = offset + rel_start
                span_end = offset + rel_end
                parts.append(sentence)
                offset += len(sentence)
            else:
                parts.append(item)
                offset += len(item)
        text = "".join(parts)
        gold = GoldSpan(text[span_start:span_end], span_start, span_end)
        assert gold.text.lower() == span.lower()
        docs.append(
            Document(
                id=f"synth-{i:04d}",
                text=text,
                coarse_label=bucket,
                gold_spans=(gold,),
            )
        )
    validate_corpus(docs)
    return docs
