"""Fixed-width token windows over long documents and span aggregation.

Documents longer than the window are covered by windows starting every
``stride`` tokens, with the last start pulled back so the final window
ends exactly at the last token.  Per-window span predictions are merged
by keeping the window whose best start score plus best end score is
largest; predicting position 0 as both endpoints means "no answer".
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .errors import ConfigError, ValidationError
from .quantities import Token


@dataclass(frozen=True)
class Shingle:
    doc_id: str
    shingle_index: int
    window_start: int
    window_end: int  # exclusive

    @property
    def width(self) -> int:
        return self.window_end - self.window_start


def make_shingles(
    tokens: Sequence, window: int = 450, stride: int = 225, doc_id: str = ""
) -> list[Shingle]:
    """Window positions covering ``tokens`` left to right.

    A document no longer than ``window`` yields a single covering shingle;
    an empty token sequence yields no shingles.
    """
    if window <= 0 or not 0 < stride <= window:
        raise ConfigError(f"invalid window/stride: ({window}, {stride})")
    n = len(tokens)
    if n == 0:
        return []
    if n <= window:
        return [Shingle(doc_id, 0, 0, n)]
    starts = [0]
    last = n - window
    pos = stride
    while True:
        if pos >= last:
            starts.append(last)
            break
        starts.append(pos)
        pos += stride
    return [
        Shingle(doc_id, i, s, s + window) for i, s in enumerate(starts)
    ]


@dataclass(frozen=True)
class SequenceLayout:
    """Slot layout: [seq-start marker][question][separator][context][padding].

    The map between context slots and context positions is invertible;
    adding the shingle's window start turns context positions into document
    token indices.
    """

    n: int
    question_len: int
    context_len: int

    @property
    def context_offset(self) -> int:
        return self.question_len + 2

    def slot_of_context(self, position: int) -> int:
        if not 0 <= position < self.context_len:
            raise ValueError(f"context position {position} out of range")
        return self.context_offset + position

    def context_of_slot(self, slot: int) -> int | None:
        position = slot - self.context_offset
        if 0 <= position < self.context_len:
            return position
        return None

    def roles(self) -> list[str]:
        out = ["start"]
        out += ["question"] * self.question_len
        out += ["separator"]
        out += ["context"] * self.context_len
        out += ["padding"] * (self.n - len(out))
        return out


def layout_sequence(
    context_len: int,
    question_len: int = 0,
    *,
    n: int = 512,
    max_context: int = 450,
    max_question: int = 62,
) -> SequenceLayout:
    """Validate budgets and build the padded-sequence layout."""
    if context_len < 1:
        raise ConfigError("context must hold at least one token")
    if context_len > max_context:
        raise ConfigError(f"context of {context_len} exceeds budget {max_context}")
    if not 0 <= question_len <= max_question:
        raise ConfigError(f"question of {question_len} exceeds budget {max_question}")
    if question_len + 2 + context_len > n:
        raise ConfigError(
            f"sequence overflow: 2 + {question_len} + {context_len} > {n}"
        )
    return SequenceLayout(n=n, question_len=question_len, context_len=context_len)


@dataclass(frozen=True)
class ShinglePrediction:
    """Per-shingle start/end score distributions over the padded sequence."""

    shingle_index: int
    start_scores: tuple[float, ...]
    end_scores: tuple[float, ...]

    @staticmethod
    def from_arrays(shingle_index: int, start, end) -> "ShinglePrediction":
        return ShinglePrediction(
            shingle_index, tuple(float(v) for v in start), tuple(float(v) for v in end)
        )


def uniform_prediction(shingle_index: int, n: int = 512) -> ShinglePrediction:
    """Constant baseline: uniform scores, which aggregate to "no answer"."""
    flat = (1.0 / n,) * n
    return ShinglePrediction(shingle_index, flat, flat)


def _validate_scores(pred: ShinglePrediction) -> tuple[np.ndarray, np.ndarray]:
    start = np.asarray(pred.start_scores, dtype=float)
    end = np.asarray(pred.end_scores, dtype=float)
    if start.ndim != 1 or start.shape != end.shape:
        raise ValidationError(
            f"shingle {pred.shingle_index}: score vectors must be 1-D and equal length"
        )
    for name, vec in (("start", start), ("end", end)):
        if not np.all(np.isfinite(vec)) or np.any(vec < 0):
            raise ValidationError(
                f"shingle {pred.shingle_index}: {name} scores must be finite and >= 0"
            )
    return start, end


@dataclass(frozen=True)
class AggregatedSpan:
    """Document-level span choice; token indices are inclusive endpoints."""

    shingle_index: int
    start_token: int | None
    end_token: int | None
    start_char: int | None
    end_char: int | None
    is_impossible: bool


def aggregate_predictions(
    predictions: Sequence[ShinglePrediction],
    shingles: Sequence[Shingle],
    *,
    context_offset: int = 0,
    tokens: Sequence[Token] | None = None,
) -> AggregatedSpan:
    """Merge per-shingle predictions into one document-level span.

    The winning shingle maximizes max(start_scores) + max(end_scores),
    lowest shingle index on an exact tie.  Slot indices map to document
    tokens as ``window_start + slot - context_offset``; the default offset
    of 0 suits scorers whose vectors align with the shingle's own tokens.
    Both argmaxes at position 0, argmaxes outside the context region, or an
    inverted span all yield ``is_impossible``.
    """
    if not predictions:
        raise ValidationError("no predictions to aggregate")
    if len(predictions) != len(shingles):
        raise ValidationError(
            f"{len(predictions)} predictions for {len(shingles)} shingles"
        )
    by_index = {s.shingle_index: s for s in shingles}
    if set(p.shingle_index for p in predictions) != set(by_index):
        raise ValidationError("prediction/shingle indices do not align")

    best: tuple[float, int] | None = None
    best_vectors: tuple[np.ndarray, np.ndarray] | None = None
    for pred in sorted(predictions, key=lambda p: p.shingle_index):
        start, end = _validate_scores(pred)
        score = float(start.max() + end.max())
        if best is None or score > best[0]:
            best = (score, pred.shingle_index)
            best_vectors = (start, end)
    assert best is not None and best_vectors is not None
    chosen = by_index[best[1]]
    s_slot = int(np.argmax(best_vectors[0]))
    e_slot = int(np.argmax(best_vectors[1]))

    def impossible() -> AggregatedSpan:
        return AggregatedSpan(chosen.shingle_index, None, None, None, None, True)

    if s_slot == 0 and e_slot == 0:
        return impossible()
    s_pos = s_slot - context_offset
    e_pos = e_slot - context_offset
    if not (0 <= s_pos < chosen.width and 0 <= e_pos < chosen.width):
        return impossible()
    start_token = chosen.window_start + s_pos
    end_token = chosen.window_start + e_pos
    if start_token > end_token:
        return impossible()

    start_char = end_char = None
    if tokens is not None:
        start_char = tokens[start_token].start_char
        end_char = tokens[end_token].end_char
    return AggregatedSpan(
        chosen.shingle_index, start_token, end_token, start_char, end_char, False
    )
