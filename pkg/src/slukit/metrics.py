"""WER, intent F1 and slots edit F1 over aligned reference/hypothesis corpora.

Slot counting happens on top of a word alignment: deletions are false
negatives, insertions false positives, and substitutions count as both, even
when the reference and hypothesis slot labels agree. A word that matches but
carries a different slot is a miss for the reference label plus a false alarm
for the hypothesis label. ``O`` never contributes.
"""

from __future__ import annotations

import enum
import logging
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Mapping, Optional, Sequence

from .alignment import Alignment, OpKind, align_words
from .corpus import Manifest, UtteranceRecord

log = logging.getLogger(__name__)

MISSING_INTENT = "<missing>"


class MetricsError(ValueError):
    pass


class TagMode(str, enum.Enum):
    RAW = "raw"
    STRIP_BIO = "strip_bio"

    @classmethod
    def parse(cls, value: "str | TagMode") -> "TagMode":
        if isinstance(value, TagMode):
            return value
        return cls(value.replace("-", "_"))


def slot_label(tag: str, tag_mode: TagMode | str = TagMode.RAW) -> Optional[str]:
    """Label counted for ``tag``; None for ``O``."""
    if tag == "O":
        return None
    if TagMode.parse(tag_mode) is TagMode.STRIP_BIO and tag[:2] in ("B-", "I-"):
        return tag[2:]
    return tag


@dataclass
class SlotTally:
    """Per-label true positive / false positive / false negative counts."""

    counts: dict[str, list[int]] = field(default_factory=dict)

    def _bump(self, label: Optional[str], slot: int) -> None:
        if label is None:
            return
        self.counts.setdefault(label, [0, 0, 0])[slot] += 1

    def add_tp(self, label: Optional[str]) -> None:
        self._bump(label, 0)

    def add_fp(self, label: Optional[str]) -> None:
        self._bump(label, 1)

    def add_fn(self, label: Optional[str]) -> None:
        self._bump(label, 2)

    def tp(self, label: Optional[str] = None) -> int:
        return self._total(0, label)

    def fp(self, label: Optional[str] = None) -> int:
        return self._total(1, label)

    def fn(self, label: Optional[str] = None) -> int:
        return self._total(2, label)

    def _total(self, slot: int, label: Optional[str]) -> int:
        if label is not None:
            return self.counts.get(label, [0, 0, 0])[slot]
        return sum(c[slot] for c in self.counts.values())

    def labels(self) -> list[str]:
        return sorted(self.counts)

    def __add__(self, other: "SlotTally") -> "SlotTally":
        out = SlotTally({k: list(v) for k, v in self.counts.items()})
        for label, (tp, fp, fn) in other.counts.items():
            c = out.counts.setdefault(label, [0, 0, 0])
            c[0] += tp
            c[1] += fp
            c[2] += fn
        return out

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, SlotTally):
            return NotImplemented
        return self.as_dict() == other.as_dict()

    def as_dict(self) -> dict[str, tuple[int, int, int]]:
        return {k: tuple(v) for k, v in sorted(self.counts.items()) if any(v)}

    @classmethod
    def from_dict(cls, counts: Mapping[str, Sequence[int]]) -> "SlotTally":
        return cls({k: [int(x) for x in v] for k, v in counts.items() if any(v)})


def tally_slots(
    ref: UtteranceRecord,
    hyp: UtteranceRecord,
    align: Alignment,
    tag_mode: TagMode | str = TagMode.RAW,
) -> SlotTally:
    tag_mode = TagMode.parse(tag_mode)
    tally = SlotTally()

    def ref_label(i: Optional[int]) -> Optional[str]:
        if i is None or not 0 <= i < len(ref.slots):
            raise MetricsError(f"{ref.id}: ref index {i} out of range")
        return slot_label(ref.slots[i], tag_mode)

    def hyp_label(j: Optional[int]) -> Optional[str]:
        if j is None or not 0 <= j < len(hyp.slots):
            raise MetricsError(f"{hyp.id}: hyp index {j} out of range")
        return slot_label(hyp.slots[j], tag_mode)

    for op in align.ops:
        if op.kind is OpKind.MATCH:
            r, h = ref_label(op.ref_index), hyp_label(op.hyp_index)
            if r == h:
                tally.add_tp(r)
            else:
                tally.add_fn(r)
                tally.add_fp(h)
        elif op.kind is OpKind.SUB:
            tally.add_fn(ref_label(op.ref_index))
            tally.add_fp(hyp_label(op.hyp_index))
        elif op.kind is OpKind.DEL:
            tally.add_fn(ref_label(op.ref_index))
        else:
            tally.add_fp(hyp_label(op.hyp_index))
    return tally


def slots_edit_f1_exact(tallies: SlotTally) -> Optional[Fraction]:
    """Exact score, or None when no slot appears on either side."""
    num = 2 * tallies.tp()
    den = num + tallies.fp() + tallies.fn()
    if den == 0:
        return None
    return Fraction(num, den)


def slots_edit_f1(tallies: SlotTally) -> float:
    score = slots_edit_f1_exact(tallies)
    if score is None:
        log.warning("no slots in reference or hypothesis; slots edit F1 is vacuously 1.0")
        return 1.0
    return float(score)


def wer(ref_words: Sequence[str], hyp_words: Sequence[str]) -> float:
    if not ref_words:
        raise MetricsError("WER is undefined for an empty reference")
    return align_words(ref_words, hyp_words).distance / len(ref_words)


def intent_f1(
    refs: Sequence[str], hyps: Sequence[str], average: str = "micro"
) -> float:
    """Intent F1 with one label per utterance.

    Micro averaging reduces to accuracy here. Macro averages per-label F1
    over every label seen on either side.
    """
    if len(refs) != len(hyps):
        raise MetricsError(f"{len(refs)} reference intents but {len(hyps)} hypotheses")
    if not refs:
        raise MetricsError("no utterances to score")
    tally = SlotTally()
    for r, h in zip(refs, hyps):
        if r == h:
            tally.add_tp(r)
        else:
            tally.add_fn(r)
            tally.add_fp(h)
    if average == "micro":
        return float(slots_edit_f1_exact(tally))
    if average == "macro":
        scores = [
            2 * tp / (2 * tp + fp + fn) for tp, fp, fn in tally.counts.values()
        ]
        return sum(scores) / len(scores)
    raise MetricsError(f"unknown average {average!r}")


@dataclass
class UtteranceScore:
    id: str
    ref_len: int
    hyp_len: int
    sub: int
    dele: int
    ins: int
    tally: SlotTally
    ref_intent: str
    hyp_intent: str
    missing: bool = False


@dataclass
class EvalReport:
    wer: float
    slots_edit_f1: float
    intent_f1: float
    per_slot: SlotTally
    utterance_count: int
    vacuous_slots: bool = False
    utterances: list[UtteranceScore] = field(default_factory=list)

    def to_json(self) -> dict:
        per_slot = {}
        for label, (tp, fp, fn) in self.per_slot.as_dict().items():
            per_slot[label] = {
                "tp": tp,
                "fp": fp,
                "fn": fn,
                "precision": tp / (tp + fp) if tp + fp else 0.0,
                "recall": tp / (tp + fn) if tp + fn else 0.0,
                "f1": 2 * tp / (2 * tp + fp + fn),
            }
        return {
            "wer": self.wer,
            "slots_edit_f1": self.slots_edit_f1,
            "intent_f1": self.intent_f1,
            "utterance_count": self.utterance_count,
            "per_slot": per_slot,
        }

    def to_tsv(self) -> str:
        header = "id\tref_len\thyp_len\tsub\tdel\tins\ttp\tfp\tfn\tref_intent\thyp_intent\tmissing"
        rows = [header]
        for u in self.utterances:
            rows.append(
                "\t".join(
                    str(x)
                    for x in (
                        u.id, u.ref_len, u.hyp_len, u.sub, u.dele, u.ins,
                        u.tally.tp(), u.tally.fp(), u.tally.fn(),
                        u.ref_intent, u.hyp_intent, int(u.missing),
                    )
                )
            )
        return "\n".join(rows) + "\n"

    def to_table(self) -> str:
        return (
            f"{'WER':>8} {'slots edit F1':>14} {'intent F1':>10}\n"
            f"{100 * self.wer:8.2f} {100 * self.slots_edit_f1:14.2f} "
            f"{100 * self.intent_f1:10.2f}\n"
        )


def score_utterance(
    ref: UtteranceRecord, hyp: UtteranceRecord, tag_mode: TagMode | str = TagMode.RAW
) -> UtteranceScore:
    al = align_words(ref.words, hyp.words)
    c = al.counts()
    return UtteranceScore(
        id=ref.id,
        ref_len=len(ref.words),
        hyp_len=len(hyp.words),
        sub=c[OpKind.SUB],
        dele=c[OpKind.DEL],
        ins=c[OpKind.INS],
        tally=tally_slots(ref, hyp, al, tag_mode),
        ref_intent=ref.intent,
        hyp_intent=hyp.intent,
    )


def _empty_hypothesis(ref: UtteranceRecord) -> UtteranceRecord:
    return UtteranceRecord(id=ref.id, words=(), slots=(), intent=MISSING_INTENT)


def aggregate(scores: Iterable[UtteranceScore], intent_average: str = "micro") -> EvalReport:
    scores = list(scores)
    if not scores:
        raise MetricsError("no utterances to score")
    per_slot = SlotTally()
    edits = ref_words = 0
    for s in scores:
        per_slot = per_slot + s.tally
        edits += s.sub + s.dele + s.ins
        ref_words += s.ref_len
    if ref_words == 0:
        raise MetricsError("reference corpus contains no words; WER undefined")
    exact = slots_edit_f1_exact(per_slot)
    return EvalReport(
        wer=edits / ref_words,
        slots_edit_f1=slots_edit_f1(per_slot),
        intent_f1=intent_f1(
            [s.ref_intent for s in scores], [s.hyp_intent for s in scores], intent_average
        ),
        per_slot=per_slot,
        utterance_count=len(scores),
        vacuous_slots=exact is None,
        utterances=scores,
    )


def evaluate(
    ref: Manifest,
    hyp: Manifest,
    tag_mode: TagMode | str = TagMode.RAW,
    intent_average: str = "micro",
) -> EvalReport:
    """Score a hypothesis manifest against its reference, corpus-wide.

    Tallies are summed over all utterances before the F1 is taken. Reference
    utterances without a hypothesis are scored against an empty hypothesis.
    """
    ref_by_id = ref.by_id()
    extra = [h.id for h in hyp if h.id not in ref_by_id]
    if extra:
        raise MetricsError(f"hypothesis ids absent from reference: {', '.join(extra[:5])}")
    hyp_by_id = hyp.by_id()
    scores = []
    for r in ref:
        h = hyp_by_id.get(r.id)
        missing = h is None
        if missing:
            log.warning("no hypothesis for %s; scoring as empty", r.id)
            h = _empty_hypothesis(r)
        s = score_utterance(r, h, tag_mode)
        s.missing = missing
        scores.append(s)
    return aggregate(scores, intent_average)
