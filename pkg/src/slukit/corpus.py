"""Utterance records, JSONL manifests, lint, normalization and corpus statistics."""

from __future__ import annotations

import json
import re
import wave
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Iterator, Optional, Sequence

SLOT_TAG_RE = re.compile(r"^(?:O|[BI]-\S+)$")
DEFAULT_PUNCTUATION = ".,!?;:\"'"

_FIELDS = ("id", "audio_path", "speaker", "words", "slots", "intent")


class ManifestError(ValueError):
    """Raised when a manifest line or record violates the record contract."""

    def __init__(self, message: str, line: Optional[int] = None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)


@dataclass(frozen=True)
class UtteranceRecord:
    id: str
    words: tuple[str, ...]
    slots: tuple[str, ...]
    intent: str
    audio_path: Optional[str] = None
    speaker: Optional[str] = None

    def __post_init__(self) -> None:
        # accept lists from callers, store tuples so records stay hashable
        object.__setattr__(self, "words", tuple(self.words))
        object.__setattr__(self, "slots", tuple(self.slots))

    def validate(self) -> None:
        if not isinstance(self.id, str) or not self.id:
            raise ManifestError("record id must be a non-empty string")
        if not isinstance(self.intent, str):
            raise ManifestError(f"{self.id}: intent must be a string")
        if len(self.words) != len(self.slots):
            raise ManifestError(
                f"{self.id}: {len(self.words)} words but {len(self.slots)} slots"
            )
        for i, w in enumerate(self.words):
            if not isinstance(w, str):
                raise ManifestError(f"{self.id}: word {i} is not a string")
        for i, tag in enumerate(self.slots):
            if not isinstance(tag, str) or not SLOT_TAG_RE.match(tag):
                raise ManifestError(f"{self.id}: bad slot tag {tag!r} at index {i}")

    def to_json(self) -> dict:
        row: dict = {"id": self.id}
        if self.audio_path is not None:
            row["audio_path"] = self.audio_path
        if self.speaker is not None:
            row["speaker"] = self.speaker
        row["words"] = list(self.words)
        row["slots"] = list(self.slots)
        row["intent"] = self.intent
        return row

    @classmethod
    def from_json(cls, row: dict) -> "UtteranceRecord":
        if not isinstance(row, dict):
            raise ManifestError("expected a JSON object")
        missing = [k for k in ("id", "words", "slots", "intent") if k not in row]
        if missing:
            raise ManifestError(f"missing fields: {', '.join(missing)}")
        unknown = sorted(set(row) - set(_FIELDS))
        if unknown:
            raise ManifestError(f"unknown fields: {', '.join(unknown)}")
        if not isinstance(row["words"], list) or not isinstance(row["slots"], list):
            raise ManifestError("words and slots must be JSON arrays")
        for key in ("audio_path", "speaker"):
            if row.get(key) is not None and not isinstance(row[key], str):
                raise ManifestError(f"{key} must be a string")
        return cls(
            id=row["id"],
            words=row["words"],
            slots=row["slots"],
            intent=row["intent"],
            audio_path=row.get("audio_path"),
            speaker=row.get("speaker"),
        )


@dataclass(frozen=True)
class Manifest:
    records: tuple[UtteranceRecord, ...] = field(default_factory=tuple)

    def __post_init__(self) -> None:
        object.__setattr__(self, "records", tuple(self.records))
        seen: set[str] = set()
        for rec in self.records:
            if rec.id in seen:
                raise ManifestError(f"duplicate id {rec.id!r}")
            seen.add(rec.id)

    def __iter__(self) -> Iterator[UtteranceRecord]:
        return iter(self.records)

    def __len__(self) -> int:
        return len(self.records)

    def by_id(self) -> dict[str, UtteranceRecord]:
        return {r.id: r for r in self.records}


@dataclass(frozen=True)
class CorpusStats:
    utterance_count: int
    unique_transcriptions: int
    speaker_count: int
    total_hours: Optional[float] = None

    def to_json(self) -> dict:
        return {
            "utterance_count": self.utterance_count,
            "total_hours": self.total_hours,
            "unique_transcriptions": self.unique_transcriptions,
            "speaker_count": self.speaker_count,
        }


def parse_manifest(path: str | Path) -> Manifest:
    """Read a JSONL manifest, validating every record.

    Blank lines are skipped. Errors carry the 1-based line number.
    """
    records: list[UtteranceRecord] = []
    seen: dict[str, int] = {}
    with open(path, "r", encoding="utf-8") as handle:
        for lineno, raw in enumerate(handle, 1):
            line = raw.strip()
            if not line:
                continue
            try:
                row = json.loads(line)
            except json.JSONDecodeError as exc:
                raise ManifestError(f"malformed JSON ({exc.msg})", lineno) from exc
            try:
                rec = UtteranceRecord.from_json(row)
                rec.validate()
            except ManifestError as exc:
                raise ManifestError(str(exc), lineno) from exc
            if rec.id in seen:
                raise ManifestError(
                    f"duplicate id {rec.id!r} (first seen on line {seen[rec.id]})", lineno
                )
            seen[rec.id] = lineno
            records.append(rec)
    return Manifest(records)


def write_manifest(m: Manifest | Iterable[UtteranceRecord], path: str | Path) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", encoding="utf-8", newline="\n") as handle:
        for rec in m:
            handle.write(json.dumps(rec.to_json(), ensure_ascii=False) + "\n")


def lint_record(r: UtteranceRecord) -> list[str]:
    """Soft checks that never reject a record: BIO continuity and empty words."""
    warnings = []
    prev = "O"
    for i, tag in enumerate(r.slots):
        if tag.startswith("I-"):
            label = tag[2:]
            if prev not in (f"B-{label}", f"I-{label}"):
                warnings.append(
                    f"{r.id}: BIO discontinuity at index {i}: {tag} follows {prev}"
                )
        prev = tag
    for i, w in enumerate(r.words):
        if not w:
            warnings.append(f"{r.id}: empty word at index {i}")
    return warnings


def normalize_word(word: str, punctuation: str = DEFAULT_PUNCTUATION) -> str:
    return word.lower().strip(punctuation)


def normalize_text(
    words: Sequence[str], punctuation: str = DEFAULT_PUNCTUATION
) -> list[str]:
    """Lowercase and strip edge punctuation; words that become empty are dropped."""
    out = []
    for w in words:
        w = normalize_word(w, punctuation)
        if w:
            out.append(w)
    return out


def wav_duration(path: str | Path) -> float:
    """Duration in seconds read from the WAV header."""
    try:
        with wave.open(str(path), "rb") as wf:
            return wf.getnframes() / wf.getframerate()
    except (wave.Error, EOFError) as exc:
        raise ManifestError(f"corrupt WAV {path}: {exc}") from exc


def corpus_stats(m: Manifest, audio_root: str | Path | None = None) -> CorpusStats:
    """Counts for a manifest; hours are only computed when ``audio_root`` is given."""
    total_hours = None
    if audio_root is not None:
        seconds = 0.0
        for rec in m:
            if rec.audio_path is None:
                raise ManifestError(f"{rec.id}: no audio_path, cannot compute hours")
            wav_path = Path(audio_root) / rec.audio_path
            if not wav_path.is_file():
                raise ManifestError(f"{rec.id}: missing audio file {wav_path}")
            seconds += wav_duration(wav_path)
        total_hours = seconds / 3600.0
    return CorpusStats(
        utterance_count=len(m),
        unique_transcriptions=len({" ".join(r.words) for r in m}),
        speaker_count=len({r.speaker for r in m if r.speaker is not None}),
        total_hours=total_hours,
    )
