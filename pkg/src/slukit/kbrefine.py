"""Knowledge-base refinement of decoded slot values.

Every non-``O`` hypothesis word is snapped to the knowledge-base entry for its
slot with the largest embedding dot product. Words already in the KB are
kept. When embeddings are missing, candidates are ranked by normalized
character edit distance instead.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, replace
from pathlib import Path
from typing import Iterable, Mapping, Optional

import numpy as np

from .alignment import edit_distance
from .corpus import Manifest, UtteranceRecord, normalize_word
from .metrics import TagMode, slot_label

EMBEDDING = "embedding"
FALLBACK = "edit_distance_fallback"
KEPT = "kept"


class EmbeddingError(ValueError):
    pass


KnowledgeBase = Mapping[str, frozenset]


def build_kb(train: Manifest | Iterable[UtteranceRecord], tag_mode: TagMode | str = TagMode.RAW) -> dict[str, frozenset]:
    kb: dict[str, set[str]] = {}
    for rec in train:
        for word, tag in zip(rec.words, rec.slots):
            label = slot_label(tag, tag_mode)
            word = normalize_word(word)
            if label is None or not word:
                continue
            kb.setdefault(label, set()).add(word)
    return {k: frozenset(v) for k, v in sorted(kb.items())}


@dataclass(frozen=True)
class EmbeddingTable:
    vectors: Mapping[str, np.ndarray]
    dim: Optional[int] = None

    def __contains__(self, token: str) -> bool:
        return token in self.vectors

    def __len__(self) -> int:
        return len(self.vectors)

    def dot(self, a: str, b: str) -> float:
        return float(np.dot(self.vectors[a], self.vectors[b]))


def load_embeddings(path: str | Path) -> EmbeddingTable:
    """Parse ``token v1 ... vd`` lines; all rows must share one dimension."""
    vectors: dict[str, np.ndarray] = {}
    dim = None
    with open(path, "r", encoding="utf-8") as handle:
        for lineno, line in enumerate(handle, 1):
            parts = line.split()
            if not parts:
                continue
            token, values = parts[0], parts[1:]
            if not values:
                raise EmbeddingError(f"line {lineno}: token {token!r} has no vector")
            try:
                vec = np.array([float(v) for v in values])
            except ValueError as exc:
                raise EmbeddingError(f"line {lineno}: {exc}") from exc
            if dim is None:
                dim = len(vec)
            elif len(vec) != dim:
                raise EmbeddingError(
                    f"line {lineno}: {token!r} has dimension {len(vec)}, expected {dim}"
                )
            if token in vectors:
                raise EmbeddingError(f"line {lineno}: duplicate token {token!r}")
            vectors[token] = vec
    return EmbeddingTable(vectors, dim)


@dataclass(frozen=True)
class Replacement:
    utterance_id: str
    position: int
    original: str
    slot: str
    replacement: str
    similarity: Optional[float]
    method: str
    iteration: int = 1

    def to_json(self) -> dict:
        return {
            "iteration": self.iteration,
            "utterance_id": self.utterance_id,
            "position": self.position,
            "original": self.original,
            "slot": self.slot,
            "replacement": self.replacement,
            "similarity": self.similarity,
            "method": self.method,
        }


def _best(scored: Iterable[tuple[str, float]]) -> tuple[str, float]:
    # highest score, then lexicographically smallest word
    return min(scored, key=lambda ms: (-ms[1], ms[0]))


def closest_entry(
    word: str, candidates: Iterable[str], emb: EmbeddingTable
) -> tuple[str, float, str]:
    candidates = sorted(candidates)
    if word in emb:
        with_vec = [m for m in candidates if m in emb]
        if with_vec:
            m, score = _best((m, emb.dot(word, m)) for m in with_vec)
            return m, score, EMBEDDING
    m, score = _best(
        (m, 1.0 - edit_distance(word, m) / max(len(word), len(m))) for m in candidates
    )
    return m, score, FALLBACK


def refine(
    hyp: UtteranceRecord,
    kb: KnowledgeBase,
    emb: EmbeddingTable,
    tag_mode: TagMode | str = TagMode.RAW,
) -> tuple[UtteranceRecord, list[Replacement]]:
    """Refine one hypothesis. Slots, intent and length are never changed."""
    words = list(hyp.words)
    report = []
    for i, (word, tag) in enumerate(zip(hyp.words, hyp.slots)):
        label = slot_label(tag, tag_mode)
        if label is None:
            continue
        candidates = kb.get(label)
        key = normalize_word(word)
        if not candidates or key in candidates:
            sim = 1.0 if candidates else None
            report.append(Replacement(hyp.id, i, word, tag, word, sim, KEPT))
            continue
        best, score, method = closest_entry(key, candidates, emb)
        if math.isnan(score):
            raise EmbeddingError(f"{hyp.id}: similarity for {word!r} is NaN")
        words[i] = best
        report.append(Replacement(hyp.id, i, word, tag, best, score, method))
    return replace(hyp, words=tuple(words)), report


def refine_corpus(
    hyp: Manifest,
    kb: KnowledgeBase,
    emb: EmbeddingTable,
    iterations: int = 1,
    tag_mode: TagMode | str = TagMode.RAW,
) -> tuple[Manifest, list[Replacement]]:
    """Apply :func:`refine` ``iterations`` times, reporting every pass."""
    if iterations < 1:
        raise ValueError("iterations must be >= 1")
    records = list(hyp)
    report: list[Replacement] = []
    for it in range(1, iterations + 1):
        refined = []
        for rec in records:
            new, rep = refine(rec, kb, emb, tag_mode)
            refined.append(new)
            report.extend(replace(r, iteration=it) for r in rep)
        records = refined
    return Manifest(records), report


def write_report(report: Iterable[Replacement], path: str | Path) -> None:
    with open(path, "w", encoding="utf-8") as handle:
        for r in report:
            handle.write(json.dumps(r.to_json(), ensure_ascii=False) + "\n")
