from __future__ import annotations

import json

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from slukit.corpus import (
    Manifest,
    ManifestError,
    UtteranceRecord,
    corpus_stats,
    lint_record,
    normalize_text,
    parse_manifest,
    write_manifest,
)
from slukit.noisemix import AudioClip, write_wav


def _records(n=3):
    return [
        UtteranceRecord(f"u{i}", ["fly", "to", "boston"], ["O", "O", "B-toloc.city"], "flight")
        for i in range(n)
    ]


def test_parse_three_lines_in_order(tmp_path):
    path = tmp_path / "m.jsonl"
    rows = [r.to_json() for r in _records()]
    path.write_text("".join(json.dumps(r) + "\n" for r in rows), encoding="utf-8")
    m = parse_manifest(path)
    assert [r.id for r in m] == ["u0", "u1", "u2"]
    assert m.records == tuple(_records())


def test_parse_empty_file(tmp_path):
    path = tmp_path / "m.jsonl"
    path.write_text("", encoding="utf-8")
    assert len(parse_manifest(path)) == 0


def test_length_mismatch_names_line_and_lengths(tmp_path):
    path = tmp_path / "m.jsonl"
    good = {"id": "a", "words": ["x"], "slots": ["O"], "intent": "i"}
    bad = {"id": "b", "words": ["w", "x", "y", "z"], "slots": ["O", "O", "O"], "intent": "i"}
    path.write_text(json.dumps(good) + "\n" + json.dumps(bad) + "\n", encoding="utf-8")
    with pytest.raises(ManifestError) as err:
        parse_manifest(path)
    msg = str(err.value)
    assert "line 2" in msg and "4 words" in msg and "3 slots" in msg
    assert err.value.line == 2


@pytest.mark.parametrize(
    "line, fragment",
    [
        ("{not json", "malformed JSON"),
        ('{"id": "a", "words": [], "slots": []}', "missing fields: intent"),
        ('{"id": "a", "words": ["x"], "slots": ["X-y"], "intent": "i"}', "bad slot tag"),
        ('{"id": "a", "words": ["x"], "slots": ["B-"], "intent": "i"}', "bad slot tag"),
        ('{"id": "a", "words": ["x"], "slots": ["B-a b"], "intent": "i"}', "bad slot tag"),
        ('{"id": "", "words": [], "slots": [], "intent": "i"}', "non-empty"),
    ],
)
def test_malformed_lines(tmp_path, line, fragment):
    path = tmp_path / "m.jsonl"
    path.write_text(line + "\n", encoding="utf-8")
    with pytest.raises(ManifestError, match=fragment):
        parse_manifest(path)


def test_duplicate_id(tmp_path):
    path = tmp_path / "m.jsonl"
    row = json.dumps({"id": "a", "words": [], "slots": [], "intent": "i"})
    path.write_text(row + "\n" + row + "\n", encoding="utf-8")
    with pytest.raises(ManifestError, match="line 2: duplicate id"):
        parse_manifest(path)


def test_round_trip(tmp_path):
    m = Manifest(_records())
    write_manifest(m, tmp_path / "m.jsonl")
    assert parse_manifest(tmp_path / "m.jsonl") == m


def test_non_ascii_round_trip_is_byte_exact(tmp_path):
    rec = UtteranceRecord("c", ["un", "café"], ["O", "B-food"], "order")
    path = tmp_path / "m.jsonl"
    write_manifest(Manifest([rec]), path)
    raw = path.read_bytes()
    assert "café".encode("utf-8") in raw
    assert parse_manifest(path).records[0].words[1] == "café"
    write_manifest(parse_manifest(path), tmp_path / "again.jsonl")
    assert (tmp_path / "again.jsonl").read_bytes() == raw


def test_empty_manifest_writes_empty_file(tmp_path):
    write_manifest(Manifest([]), tmp_path / "m.jsonl")
    assert (tmp_path / "m.jsonl").read_bytes() == b""


_word = st.text(alphabet=st.characters(blacklist_categories=("Cs",)), max_size=8)
_tag = st.one_of(
    st.just("O"),
    st.builds(lambda p, lab: f"{p}-{lab}", st.sampled_from("BI"), st.from_regex(r"[a-z._]{1,6}", fullmatch=True)),
)


@st.composite
def _record(draw, uid):
    n = draw(st.integers(0, 6))
    return UtteranceRecord(
        id=uid,
        words=draw(st.lists(_word, min_size=n, max_size=n)),
        slots=draw(st.lists(_tag, min_size=n, max_size=n)),
        intent=draw(st.text(max_size=6)),
        audio_path=draw(st.one_of(st.none(), st.just(f"{uid}.wav"))),
        speaker=draw(st.one_of(st.none(), st.text(max_size=4))),
    )


@st.composite
def _manifest(draw):
    n = draw(st.integers(0, 4))
    return Manifest([draw(_record(f"id{i}")) for i in range(n)])


@settings(max_examples=60, deadline=None)
@given(_manifest())
def test_round_trip_property(tmp_path_factory, m):
    path = tmp_path_factory.mktemp("rt") / "m.jsonl"
    write_manifest(m, path)
    assert parse_manifest(path) == m


def test_lint_clean_bio():
    r = UtteranceRecord("a", ["x", "y", "z"], ["B-fare", "I-fare", "O"], "i")
    assert lint_record(r) == []


def test_lint_discontinuity():
    r = UtteranceRecord("a", ["x", "y"], ["O", "I-fare"], "i")
    warnings = lint_record(r)
    assert len(warnings) == 1 and "index 1" in warnings[0]


def test_lint_adjacent_entities_are_fine():
    r = UtteranceRecord(
        "a",
        ["to", "tacoma", "washington"],
        ["O", "B-toloc.city", "B-toloc.state"],
        "flight",
    )
    assert lint_record(r) == []
    r2 = UtteranceRecord("b", ["x", "y"], ["B-toloc.city", "I-toloc.city"], "flight")
    assert lint_record(r2) == []


def test_lint_label_change_inside_is_discontinuity():
    r = UtteranceRecord("a", ["x", "y"], ["B-a", "I-b"], "i")
    assert len(lint_record(r)) == 1


def test_lint_empty_word():
    r = UtteranceRecord("a", ["", "y"], ["O", "O"], "i")
    assert lint_record(r) == ["a: empty word at index 0"]


@given(_record("x"))
def test_lint_is_total(rec):
    assert isinstance(lint_record(rec), list)


@pytest.mark.parametrize(
    "words, expected",
    [
        (["Round", "trip,"], ["round", "trip"]),
        (["a", "b"], ["a", "b"]),
        (["..."], []),
        (['"Hello!"', "it's"], ["hello", "it's"]),
    ],
)
def test_normalize_text(words, expected):
    assert normalize_text(words) == expected


def test_normalize_custom_punctuation():
    assert normalize_text(["-x-", "y."], punctuation="-") == ["x", "y."]


@given(st.lists(st.text(max_size=6), max_size=6))
def test_normalize_idempotent(words):
    once = normalize_text(words)
    assert normalize_text(once) == once


def test_stats_unique_transcriptions():
    recs = _records(2) + [UtteranceRecord("z", ["hi"], ["O"], "greet")]
    s = corpus_stats(Manifest(recs))
    assert s.utterance_count == 3
    assert s.unique_transcriptions == 2
    assert s.total_hours is None


def test_stats_empty():
    s = corpus_stats(Manifest([]))
    assert (s.utterance_count, s.unique_transcriptions, s.speaker_count) == (0, 0, 0)


def test_stats_hours_from_headers(tmp_path):
    for name in ("a", "b"):
        write_wav(AudioClip(np.zeros(16000), 16000), tmp_path / f"{name}.wav")
    recs = [
        UtteranceRecord("a", ["x"], ["O"], "i", audio_path="a.wav", speaker="s1"),
        UtteranceRecord("b", ["y"], ["O"], "i", audio_path="b.wav", speaker="s2"),
    ]
    s = corpus_stats(Manifest(recs), tmp_path)
    assert s.total_hours == pytest.approx(2 / 3600, abs=1e-15)
    assert s.speaker_count == 2


def test_stats_missing_wav(tmp_path):
    recs = [UtteranceRecord("a", ["x"], ["O"], "i", audio_path="nope.wav")]
    with pytest.raises(ManifestError, match="missing audio"):
        corpus_stats(Manifest(recs), tmp_path)


def test_stats_corrupt_wav(tmp_path):
    (tmp_path / "a.wav").write_bytes(b"RIFFxxxx")
    recs = [UtteranceRecord("a", ["x"], ["O"], "i", audio_path="a.wav")]
    with pytest.raises(ManifestError, match="corrupt"):
        corpus_stats(Manifest(recs), tmp_path)
