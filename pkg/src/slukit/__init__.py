"""Evaluation and data tooling for end-to-end spoken language understanding."""

__version__ = "0.1.0"

from .alignment import Alignment, AlignmentOp, OpKind, align_words, edit_distance
from .corpus import (
    CorpusStats,
    Manifest,
    ManifestError,
    UtteranceRecord,
    corpus_stats,
    lint_record,
    normalize_text,
    parse_manifest,
    write_manifest,
)
from .metrics import EvalReport, SlotTally, TagMode, evaluate, intent_f1, slots_edit_f1, tally_slots, wer
