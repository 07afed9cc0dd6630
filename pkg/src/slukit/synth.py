"""Small synthetic SLU corpus plus a scripted noisy-hypothesis generator.

Used for smoke tests and demos; nothing here models real speech.
"""

from __future__ import annotations

import random
from pathlib import Path

import numpy as np

from .corpus import Manifest, UtteranceRecord, write_manifest
from .noisemix import AudioClip, write_wav

CITIES = ["boston", "dallas", "denver", "tacoma", "atlanta", "seattle", "phoenix"]
STATES = ["washington", "texas", "colorado", "georgia", "arizona"]
MONTHS = ["june", "july", "may", "april"]
DAYS = ["first", "second", "tenth", "twelfth"]
ARTISTS = ["drake", "adele", "queen", "abba"]
FILLER = ["please", "uh", "the", "a", "now", "so"]

# (intent, template); <label> expands to a word tagged B-label
TEMPLATES = [
    ("flight", "show me flights from <fromloc.city> to <toloc.city> <toloc.state>"),
    ("flight", "i want to fly to <toloc.city> on <depart.month> <depart.day>"),
    ("flight", "find a flight from <fromloc.city> to <toloc.city>"),
    ("play_music", "play something by <artist>"),
    ("play_music", "put on <artist> in the kitchen"),
    ("weather", "what is the weather in <city> <state>"),
]
FILLERS = {
    "fromloc.city": CITIES,
    "toloc.city": CITIES,
    "city": CITIES,
    "toloc.state": STATES,
    "state": STATES,
    "depart.month": MONTHS,
    "depart.day": DAYS,
    "artist": ARTISTS,
}


def generate_corpus(n: int = 50, seed: int = 0, with_audio: bool = False) -> Manifest:
    rng = random.Random(seed)
    records = []
    for k in range(n):
        intent, template = rng.choice(TEMPLATES)
        words, slots = [], []
        for tok in template.split():
            if tok.startswith("<"):
                label = tok[1:-1]
                words.append(rng.choice(FILLERS[label]))
                slots.append(f"B-{label}")
            else:
                words.append(tok)
                slots.append("O")
        uid = f"utt{k:04d}"
        records.append(
            UtteranceRecord(
                id=uid,
                words=words,
                slots=slots,
                intent=intent,
                audio_path=f"{uid}.wav" if with_audio else None,
                speaker=f"spk{k % 5}",
            )
        )
    return Manifest(records)


def noisy_hypothesis(ref: Manifest, seed: int = 0, error_rate: float = 0.15) -> Manifest:
    """Corrupt words, slots and intents with substitutions, deletions and insertions."""
    rng = random.Random(seed)
    intents = sorted({r.intent for r in ref})
    vocab = sorted({w for r in ref for w in r.words} | set(FILLER))
    labels = sorted({t for r in ref for t in r.slots if t != "O"})
    out = []
    for r in ref:
        words, slots = [], []
        for w, s in zip(r.words, r.slots):
            u = rng.random()
            if u < error_rate / 3:
                continue
            if u < 2 * error_rate / 3:
                w = rng.choice(vocab)
            elif u < error_rate:
                s = rng.choice(labels + ["O"])
            words.append(w)
            slots.append(s)
            if rng.random() < error_rate / 3:
                words.append(rng.choice(FILLER))
                slots.append("O")
        intent = r.intent if rng.random() > error_rate else rng.choice(intents)
        out.append(UtteranceRecord(id=r.id, words=words, slots=slots, intent=intent))
    return Manifest(out)


def synth_speech(n_words: int, seed: int, sample_rate: int = 16000) -> AudioClip:
    """One short enveloped tone per word."""
    rng = np.random.default_rng(seed)
    seg = int(0.12 * sample_rate)
    t = np.arange(seg) / sample_rate
    env = np.hanning(seg)
    parts = []
    for _ in range(max(n_words, 1)):
        f0 = rng.uniform(120.0, 400.0)
        parts.append(0.3 * env * np.sin(2 * np.pi * f0 * t))
    return AudioClip(np.concatenate(parts), sample_rate)


def synth_noise(seconds: float, seed: int, sample_rate: int = 16000) -> AudioClip:
    rng = np.random.default_rng(seed)
    x = rng.normal(0.0, 0.1, int(seconds * sample_rate))
    return AudioClip(np.clip(x, -0.9, 0.9), sample_rate)


def write_audio_corpus(
    out_dir: str | Path, n: int = 50, n_noises: int = 6, seed: int = 0
) -> tuple[Path, list[Path]]:
    """Write a manifest, its speech WAVs, and a noise directory under ``out_dir``."""
    out_dir = Path(out_dir)
    m = generate_corpus(n, seed, with_audio=True)
    for i, rec in enumerate(m):
        write_wav(synth_speech(len(rec.words), seed * 100003 + i), out_dir / rec.audio_path)
    noise_paths = []
    for j in range(n_noises):
        p = out_dir / "noise" / f"noise{j:02d}.wav"
        # mixed lengths so both the crop and tile branches get exercised
        write_wav(synth_noise(0.3 + 0.4 * j, seed * 7919 + j), p)
        noise_paths.append(p)
    manifest_path = out_dir / "manifest.jsonl"
    write_manifest(m, manifest_path)
    return manifest_path, noise_paths
