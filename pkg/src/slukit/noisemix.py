"""SNR-controlled noise augmentation for 16-bit PCM mono WAV corpora."""

from __future__ import annotations

import hashlib
import logging
import wave
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, replace
from functools import lru_cache
from pathlib import Path
from typing import Optional, Sequence

import numpy as np

from .corpus import Manifest, UtteranceRecord

log = logging.getLogger(__name__)

DEFAULT_SNRS = (0.0, 10.0, 20.0, 30.0, 40.0)
PEAK_LIMIT = 0.999
FULL_SCALE = 32768


class AudioError(ValueError):
    pass


class ZeroEnergyError(AudioError):
    pass


@dataclass(frozen=True)
class AudioClip:
    samples: np.ndarray
    sample_rate: int = 16000

    def __post_init__(self) -> None:
        object.__setattr__(self, "samples", np.asarray(self.samples, dtype=np.float64))
        if self.samples.ndim != 1:
            raise AudioError(f"expected mono samples, got shape {self.samples.shape}")

    def __len__(self) -> int:
        return len(self.samples)

    @property
    def duration(self) -> float:
        return len(self.samples) / self.sample_rate


def read_wav(path: str | Path) -> AudioClip:
    try:
        with wave.open(str(path), "rb") as wf:
            channels = wf.getnchannels()
            width = wf.getsampwidth()
            rate = wf.getframerate()
            frames = wf.readframes(wf.getnframes())
    except (wave.Error, EOFError) as exc:
        raise AudioError(f"{path}: not a readable PCM WAV ({exc})") from exc
    if channels != 1:
        raise AudioError(f"{path}: expected 1 channel, found {channels}")
    if width != 2:
        raise AudioError(f"{path}: expected 16-bit samples, found {8 * width}-bit")
    pcm = np.frombuffer(frames, dtype="<i2")
    return AudioClip(pcm.astype(np.float64) / FULL_SCALE, rate)


def write_wav(clip: AudioClip, path: str | Path) -> None:
    # saturating round to int16
    pcm = np.clip(np.round(clip.samples * FULL_SCALE), -FULL_SCALE, FULL_SCALE - 1)
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with wave.open(str(path), "wb") as wf:
        wf.setnchannels(1)
        wf.setsampwidth(2)
        wf.setframerate(clip.sample_rate)
        wf.writeframes(pcm.astype("<i2").tobytes())


def rms(clip: AudioClip | np.ndarray) -> float:
    """Root mean square amplitude. Silence returns 0.0; see :func:`is_silent`."""
    x = clip.samples if isinstance(clip, AudioClip) else np.asarray(clip, dtype=np.float64)
    if x.size == 0:
        raise AudioError("rms of an empty clip")
    return float(np.sqrt(np.mean(x * x)))


def is_silent(clip: AudioClip) -> bool:
    return rms(clip) == 0.0


def fit_noise(noise: AudioClip, target_len: int, rng: np.random.Generator) -> AudioClip:
    """Random crop when the noise is longer than ``target_len``, tile when shorter."""
    n = len(noise)
    if n == 0:
        raise AudioError("empty noise clip")
    if n == target_len:
        return noise
    if n > target_len:
        offset = int(rng.integers(0, n - target_len + 1))
        return AudioClip(noise.samples[offset:offset + target_len], noise.sample_rate)
    reps = -(-target_len // n)
    return AudioClip(np.tile(noise.samples, reps)[:target_len], noise.sample_rate)


def snr_gain(speech_rms: float, noise_rms: float, snr_db: float) -> float:
    return speech_rms / (noise_rms * 10.0 ** (snr_db / 20.0))


def mix_components(
    speech: AudioClip, noise: AudioClip, snr_db: float, rng: np.random.Generator
) -> tuple[np.ndarray, np.ndarray]:
    """Return ``(speech, scaled_noise)`` whose RMS ratio realizes ``snr_db``."""
    if speech.sample_rate != noise.sample_rate:
        raise AudioError(
            f"sample rate mismatch: speech {speech.sample_rate} Hz, noise {noise.sample_rate} Hz"
        )
    s_rms = rms(speech)
    if s_rms == 0.0:
        raise ZeroEnergyError("speech has zero energy; SNR is undefined")
    fitted = fit_noise(noise, len(speech), rng)
    n_rms = rms(fitted)
    if n_rms == 0.0:
        raise ZeroEnergyError("noise segment has zero energy; SNR is undefined")
    return speech.samples, snr_gain(s_rms, n_rms, snr_db) * fitted.samples


def mix_at_snr(
    speech: AudioClip, noise: AudioClip, snr_db: float, rng: np.random.Generator
) -> AudioClip:
    """Add noise at the requested SNR; rescale the whole mix if it would clip."""
    s, n = mix_components(speech, noise, snr_db, rng)
    mixed = s + n
    peak = float(np.max(np.abs(mixed)))
    if peak > PEAK_LIMIT:
        mixed = mixed * (PEAK_LIMIT / peak)
    return AudioClip(mixed, speech.sample_rate)


def realized_snr_db(speech: np.ndarray, noise: np.ndarray) -> float:
    return 20.0 * float(np.log10(rms(speech) / rms(noise)))


@dataclass(frozen=True)
class AugmentPlan:
    noise_pool: tuple[str, ...]
    seed: int = 0
    snr_levels_db: tuple[float, ...] = DEFAULT_SNRS
    copies_per_utterance: Optional[int] = None
    strict_sampling: bool = False

    def __post_init__(self) -> None:
        object.__setattr__(self, "noise_pool", tuple(str(p) for p in self.noise_pool))
        object.__setattr__(self, "snr_levels_db", tuple(float(x) for x in self.snr_levels_db))
        if self.copies_per_utterance is None:
            object.__setattr__(self, "copies_per_utterance", len(self.snr_levels_db))
        if self.copies_per_utterance != len(self.snr_levels_db):
            raise ValueError(
                f"copies_per_utterance ({self.copies_per_utterance}) must equal "
                f"the number of SNR levels ({len(self.snr_levels_db)})"
            )
        if len(set(self.snr_levels_db)) != len(self.snr_levels_db):
            raise ValueError(f"duplicate SNR levels: {list(self.snr_levels_db)}")
        if not self.noise_pool:
            raise ValueError("noise pool is empty")


def utterance_rng(seed: int, utterance_id: str) -> np.random.Generator:
    digest = hashlib.sha256(f"{seed}\x00{utterance_id}".encode("utf-8")).digest()
    return np.random.default_rng(int.from_bytes(digest[:16], "little"))


def snr_tag(level: float) -> str:
    return f"snr{level:g}"


@lru_cache(maxsize=256)
def _load_noise(path: str) -> AudioClip:
    return read_wav(path)


def choose_noises(plan: AugmentPlan, rng: np.random.Generator) -> list[int]:
    pool, copies = len(plan.noise_pool), plan.copies_per_utterance
    replace_ = pool < copies
    if replace_ and plan.strict_sampling:
        raise AudioError(
            f"noise pool has {pool} files but {copies} distinct noises are required"
        )
    return [int(i) for i in rng.choice(pool, size=copies, replace=replace_)]


def augment_utterance(
    rec: UtteranceRecord, plan: AugmentPlan, out_dir: str | Path, audio_root: str | Path
) -> list[UtteranceRecord]:
    if rec.audio_path is None:
        raise AudioError(f"{rec.id}: record has no audio_path")
    speech = read_wav(Path(audio_root) / rec.audio_path)
    rng = utterance_rng(plan.seed, rec.id)
    picks = choose_noises(plan, rng)
    out = []
    for level, idx in zip(plan.snr_levels_db, picks):
        noise = _load_noise(plan.noise_pool[idx])
        try:
            mixed = mix_at_snr(speech, noise, level, rng)
        except AudioError as exc:
            raise AudioError(f"{rec.id} + {plan.noise_pool[idx]}: {exc}") from exc
        new_id = f"{rec.id}__{snr_tag(level)}"
        rel = f"{new_id}.wav"
        write_wav(mixed, Path(out_dir) / rel)
        out.append(replace(rec, id=new_id, audio_path=rel))
    return out


def _augment_job(args: tuple) -> list[UtteranceRecord]:
    return augment_utterance(*args)


def augment_corpus(
    m: Manifest,
    plan: AugmentPlan,
    out_dir: str | Path,
    audio_root: str | Path = ".",
    jobs: int = 1,
) -> Manifest:
    """Write ``copies_per_utterance`` noisy copies of every utterance into ``out_dir``.

    Each utterance draws from its own RNG keyed on (seed, id), so results do
    not depend on ``jobs`` or scheduling order.
    """
    if len(plan.noise_pool) < plan.copies_per_utterance and not plan.strict_sampling:
        log.warning(
            "noise pool has %d files for %d copies; sampling with replacement",
            len(plan.noise_pool),
            plan.copies_per_utterance,
        )
    Path(out_dir).mkdir(parents=True, exist_ok=True)
    tasks = [(rec, plan, str(out_dir), str(audio_root)) for rec in m]
    if jobs > 1 and len(tasks) > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            results = list(pool.map(_augment_job, tasks))
    else:
        results = [_augment_job(t) for t in tasks]
    return Manifest([r for group in results for r in group])


def _sha256(path: Path) -> str:
    h = hashlib.sha256()
    with path.open("rb") as handle:
        for chunk in iter(lambda: handle.read(1 << 16), b""):
            h.update(chunk)
    return h.hexdigest()


def check_disjoint_pools(train_pool: Sequence[str | Path], test_pool: Sequence[str | Path]) -> list[str]:
    """List files shared between two noise pools, by resolved path or by content.

    An empty list means the pools are disjoint.
    """
    violations = []
    train_paths = {Path(p).resolve(): Path(p) for p in train_pool}
    test_paths = {Path(p).resolve(): Path(p) for p in test_pool}
    shared = sorted(set(train_paths) & set(test_paths))
    for p in shared:
        violations.append(f"shared path: {p}")

    def hashes(paths: dict[Path, Path]) -> dict[str, list[Path]]:
        out: dict[str, list[Path]] = {}
        for resolved in sorted(paths):
            if resolved.is_file():
                out.setdefault(_sha256(resolved), []).append(resolved)
        return out

    train_h, test_h = hashes(train_paths), hashes(test_paths)
    for digest in sorted(set(train_h) & set(test_h)):
        a = [p for p in train_h[digest] if p not in shared]
        b = [p for p in test_h[digest] if p not in shared]
        if a and b:
            violations.append(
                f"identical content {digest[:12]}: train {', '.join(map(str, a))} "
                f"== test {', '.join(map(str, b))}"
            )
    return violations

