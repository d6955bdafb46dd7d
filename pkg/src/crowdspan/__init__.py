"""Crowd-size span extraction from news text with order-of-magnitude labels.

The package bundles a heuristic keyword extractor, a number-phrase
normalizer, corpus I/O with four-way splitting and weak-label emission,
a token shingler with span aggregation, QA-style evaluation metrics, and
a framework-free numeric kernel for mask-based coarse-to-fine training.
"""

from .config import Config, load_config
from .corpus import (
    Document,
    GoldSpan,
    SplitResult,
    SplitSpec,
    emit_weak_labels,
    load_corpus,
    save_corpus,
    split_corpus,
)
from .errors import (
    ConfigError,
    CrowdspanError,
    NumberParseError,
    RecordParseError,
    ValidationError,
)
from .extractor import ExtractionResult, extract
from .htmltext import ingest_html
from .kernel import (
    build_mask,
    gradients,
    l1_penalty,
    make_toy_dataset,
    predict_coarse,
    softmax,
    total_loss,
    toy_fit,
)
from .metrics import EvalReport, Prediction, evaluate, exact_match, token_f1
from .quantities import (
    NumberPhrase,
    Sentence,
    Token,
    find_number_phrases,
    magnitude_bucket,
    phrase_to_value,
    segment_sentences,
    tokenize,
)
from .shingles import (
    AggregatedSpan,
    SequenceLayout,
    Shingle,
    ShinglePrediction,
    aggregate_predictions,
    layout_sequence,
    make_shingles,
)
from .synthetic import make_news_corpus

__version__ = "0.1.0"
