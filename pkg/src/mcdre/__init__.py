"""Multi-aspect cross-integration sequence tagger.

Three task-specific transformer encoders (semantic entity tagging, POS,
general medical NER) trained jointly, with configurable cross-integration
mechanisms exchanging intermediate states between the encoders, a BIOHD
codec for discontinuous mentions, and span-level lenient/strict micro-F
evaluation.
"""

from .codec import Mention, TagSequence, decode_bio, decode_biohd, encode_bio, encode_biohd
from .config import RunConfig
from .cross import CrossMode
from .data import SentenceRecord, Vocab, load_columnar, load_embeddings, write_columnar
from .estimator import MultiAspectTagger
from .metrics import ScoreReport, breakdown_report, match_lenient, match_strict, micro_f

__all__ = [
    "CrossMode",
    "Mention",
    "MultiAspectTagger",
    "RunConfig",
    "ScoreReport",
    "SentenceRecord",
    "TagSequence",
    "Vocab",
    "breakdown_report",
    "decode_bio",
    "decode_biohd",
    "encode_bio",
    "encode_biohd",
    "load_columnar",
    "load_embeddings",
    "match_lenient",
    "match_strict",
    "micro_f",
    "write_columnar",
]

__version__ = "0.1.0"
