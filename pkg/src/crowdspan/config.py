"""Run configuration: lexicons, bucket boundaries, windowing and trainer defaults.

All values can be overridden from a JSON file (see :func:`load_config`),
so the lexicon-driven behavior of the extractor and the number parser is
tunable without code changes.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field, fields, replace
from pathlib import Path

from .errors import ConfigError

# Order-of-magnitude bucket boundaries: values below bounds[0] get label 0,
# values in [bounds[i-1], bounds[i]) get label i, values >= bounds[-1] get
# the top label.  Defaults give 1-99 / 100-999 / 1000-9999 / >=10000.
DEFAULT_BUCKET_BOUNDS: tuple[int, ...] = (100, 1000, 10000)

# Sentence-level crowd keywords.  Matching is a lowercase prefix match, so
# "protest" also hits "protests", "protesting", "protested".
DEFAULT_KEYWORDS: tuple[str, ...] = (
    "protesters",
    "demonstrators",
    "gathered",
    "crowd",
    "rallied",
    "attended",
    "picketed",
    "protest",
)

# Vague quantity words and the integer each one stands for.  Plural scale
# words read as "two of the base unit" (dozens = 2 x 12, hundreds = 2 x 100),
# and "tens of thousands" composes as 20 x 1000 = 20000.
DEFAULT_VAGUE_QUANTITIES: dict[str, int] = {
    "couple": 2,
    "few": 3,
    "several": 3,
    "dozen": 12,
    "tens": 20,
    "dozens": 24,
    "hundreds": 200,
    "thousands": 2000,
    "millions": 2000000,
}

# Hedge patterns absorbed to the left of a number phrase, longest match
# first.  Multiword patterns must match whole; the single words are valid
# hedges on their own.
DEFAULT_MODIFIER_PATTERNS: tuple[tuple[str, ...], ...] = (
    ("as", "many", "as"),
    ("an", "estimated"),
    ("more", "than"),
    ("at", "least"),
    ("up", "to"),
    ("about",),
    ("around",),
    ("approximately",),
    ("nearly",),
    ("roughly",),
    ("over",),
    ("some",),
    ("almost",),
    ("estimated",),
)


@dataclass(frozen=True)
class Config:
    """Bundle of all tunables with reproduction-oriented defaults."""

    bucket_bounds: tuple[int, ...] = DEFAULT_BUCKET_BOUNDS
    keywords: tuple[str, ...] = DEFAULT_KEYWORDS
    vague_quantities: dict[str, int] = field(
        default_factory=lambda: dict(DEFAULT_VAGUE_QUANTITIES)
    )
    modifier_patterns: tuple[tuple[str, ...], ...] = DEFAULT_MODIFIER_PATTERNS
    window: int = 450  # shingle width, tokens
    stride: int = 225  # shingle step, tokens
    seq_len: int = 512  # padded sequence length
    question_budget: int = 62  # max question tokens accepted by the layout
    lam: float = 0.01  # L1 weight on the span mask
    lr: float = 0.05
    steps: int = 500
    seed: int = 0

    def validate(self) -> None:
        if not self.bucket_bounds or list(self.bucket_bounds) != sorted(
            set(self.bucket_bounds)
        ):
            raise ConfigError("bucket_bounds must be strictly increasing and nonempty")
        if any(b < 2 for b in self.bucket_bounds):
            raise ConfigError("bucket_bounds must be >= 2")
        if not self.keywords:
            raise ConfigError("keywords must be nonempty")
        if not self.vague_quantities:
            raise ConfigError("vague_quantities must be nonempty")
        if any(v < 1 for v in self.vague_quantities.values()):
            raise ConfigError("vague_quantities values must be positive")
        if not self.modifier_patterns or any(not p for p in self.modifier_patterns):
            raise ConfigError("modifier_patterns must be nonempty patterns")
        if self.window <= 0:
            raise ConfigError("window must be positive")
        if not 0 < self.stride <= self.window:
            raise ConfigError("stride must satisfy 0 < stride <= window")
        # Layout overhead is 2 slots (sequence-start marker + separator).  A
        # full-width window plus the question must leave those 2 slots; the
        # per-call layout check enforces the combined limit since shorter
        # shingles leave room for longer questions.
        if self.window + 2 > self.seq_len:
            raise ConfigError("window + 2 must not exceed seq_len")
        if not 0 <= self.question_budget <= self.seq_len - 3:
            raise ConfigError("question_budget must fit the sequence with overhead")
        if self.lam < 0:
            raise ConfigError("lam must be nonnegative")
        if self.lr <= 0:
            raise ConfigError("lr must be positive")
        if self.steps < 0:
            raise ConfigError("steps must be nonnegative")


def load_config(path: str | Path | None = None, **overrides) -> Config:
    """Build a Config from defaults, an optional JSON file, then overrides.

    The JSON file may set any Config field; ``modifier_patterns`` entries are
    written as plain strings ("more than") and split on whitespace here.
    Unknown keys are rejected.
    """
    data: dict = {}
    if path is not None:
        try:
            data = json.loads(Path(path).read_text(encoding="utf-8"))
        except (OSError, json.JSONDecodeError) as exc:
            raise ConfigError(f"cannot read config {path}: {exc}") from exc
        if not isinstance(data, dict):
            raise ConfigError("config file must hold a JSON object")
    data.update({k: v for k, v in overrides.items() if v is not None})

    known = {f.name for f in fields(Config)}
    unknown = set(data) - known
    if unknown:
        raise ConfigError(f"unknown config keys: {sorted(unknown)}")

    if "bucket_bounds" in data:
        data["bucket_bounds"] = tuple(int(b) for b in data["bucket_bounds"])
    if "keywords" in data:
        data["keywords"] = tuple(str(k).lower() for k in data["keywords"])
    if "vague_quantities" in data:
        data["vague_quantities"] = {
            str(k).lower(): int(v) for k, v in data["vague_quantities"].items()
        }
    if "modifier_patterns" in data:
        patterns = []
        for item in data["modifier_patterns"]:
            words = item.split() if isinstance(item, str) else [str(w) for w in item]
            patterns.append(tuple(w.lower() for w in words))
        data["modifier_patterns"] = tuple(patterns)

    try:
        cfg = replace(Config(), **data)
    except TypeError as exc:
        raise ConfigError(str(exc)) from exc
    cfg.validate()
    return cfg
