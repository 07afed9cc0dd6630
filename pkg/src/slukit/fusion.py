"""First-subword selection matrices and word-level fusion of two hidden-state matrices.

Two encoders tokenize the same words differently. For each encoder we record
which subword row starts each word; gathering those rows from both hidden-state
matrices and concatenating them gives one vector per word.
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np


class FusionError(ValueError):
    pass


def load_vocab(path: str | Path) -> set[str]:
    with open(path, "r", encoding="utf-8") as handle:
        return {line.rstrip("\n") for line in handle if line.strip()}


def tokenize_greedy(word: str, vocab: Iterable[str], marker: str = "##") -> list[str]:
    """Greedy longest-match-first segmentation.

    Pieces after the first must appear in ``vocab`` with ``marker`` prepended.
    """
    vocab = vocab if isinstance(vocab, (set, frozenset, dict)) else set(vocab)
    pieces = []
    start = 0
    while start < len(word):
        prefix = marker if start > 0 else ""
        for end in range(len(word), start, -1):
            piece = prefix + word[start:end]
            if piece in vocab:
                pieces.append(piece)
                start = end
                break
        else:
            raise FusionError(
                f"cannot tokenize {word!r}: {prefix + word[start]!r} not in vocabulary"
            )
    return pieces


@dataclass(frozen=True)
class Tokenization:
    """Subword pieces per word plus the count of leading/trailing special tokens."""

    pieces: tuple[tuple[str, ...], ...]
    n_prefix: int = 0
    n_suffix: int = 0

    @classmethod
    def from_words(
        cls,
        words: Sequence[str],
        vocab: Iterable[str],
        marker: str = "##",
        n_prefix: int = 0,
        n_suffix: int = 0,
    ) -> "Tokenization":
        vocab = set(vocab)
        return cls(
            tuple(tuple(tokenize_greedy(w, vocab, marker)) for w in words),
            n_prefix,
            n_suffix,
        )

    @property
    def n_rows(self) -> int:
        return self.n_prefix + sum(len(p) for p in self.pieces) + self.n_suffix

    def first_indices(self) -> list[int]:
        out = []
        row = self.n_prefix
        for p in self.pieces:
            if not p:
                raise FusionError("every word must map to at least one subword")
            out.append(row)
            row += len(p)
        return out


@dataclass(frozen=True)
class SelectionMatrix:
    """Sparse 0/1 matrix of shape ``rows x len(selected)``.

    Column ``n`` has its single 1 at row ``selected[n]``.
    """

    rows: int
    selected: tuple[int, ...]

    def __post_init__(self) -> None:
        object.__setattr__(self, "selected", tuple(int(i) for i in self.selected))
        prev = -1
        for i in self.selected:
            if not prev < i < self.rows:
                raise FusionError(
                    f"selected rows must be strictly increasing within [0, {self.rows}): "
                    f"{list(self.selected)}"
                )
            prev = i

    @property
    def cols(self) -> int:
        return len(self.selected)

    @property
    def shape(self) -> tuple[int, int]:
        return (self.rows, self.cols)

    def dense(self) -> np.ndarray:
        m = np.zeros(self.shape)
        m[list(self.selected), list(range(self.cols))] = 1.0
        return m


def build_selection_matrix(words: Sequence[str], tok: Tokenization) -> SelectionMatrix:
    if len(tok.pieces) != len(words):
        raise FusionError(f"tokenization covers {len(tok.pieces)} words, expected {len(words)}")
    return SelectionMatrix(tok.n_rows, tuple(tok.first_indices()))


def fuse(
    h_a: np.ndarray, m_a: SelectionMatrix, h_b: np.ndarray, m_b: SelectionMatrix
) -> np.ndarray:
    """Gather each word's first-subword row from both encoders and concatenate."""
    h_a = np.asarray(h_a, dtype=float)
    h_b = np.asarray(h_b, dtype=float)
    ok = (
        h_a.ndim == 2
        and h_b.ndim == 2
        and h_a.shape[0] == m_a.rows
        and h_b.shape[0] == m_b.rows
        and m_a.cols == m_b.cols
    )
    if not ok:
        raise FusionError(
            f"shape mismatch: H_a {h_a.shape}, M_a {m_a.shape}, "
            f"H_b {h_b.shape}, M_b {m_b.shape}"
        )
    return np.concatenate(
        [h_a[list(m_a.selected)].reshape(m_a.cols, h_a.shape[1]),
         h_b[list(m_b.selected)].reshape(m_b.cols, h_b.shape[1])],
        axis=1,
    )


def read_matrix(path: str | Path) -> np.ndarray:
    with open(path, "r", encoding="utf-8") as handle:
        lines = [ln for ln in handle.read().splitlines() if ln.strip()]
    if not lines:
        raise FusionError(f"{path}: missing header")
    try:
        rows, cols = (int(x) for x in lines[0].split())
    except ValueError as exc:
        raise FusionError(f"{path}: header must be 'rows cols'") from exc
    try:
        body = [[float(x) for x in ln.split()] for ln in lines[1:]]
    except ValueError as exc:
        raise FusionError(f"{path}: {exc}") from exc
    values = [x for row in body for x in row]
    if len(values) != rows * cols:
        raise FusionError(
            f"{path}: header declares {rows}x{cols} but found {len(values)} entries"
        )
    if cols and any(len(row) != cols for row in body):
        raise FusionError(f"{path}: every row must hold {cols} entries")
    return np.array(values, dtype=float).reshape(rows, cols)


def write_matrix(m: np.ndarray, path: str | Path) -> None:
    m = np.asarray(m, dtype=float)
    if m.ndim != 2:
        raise FusionError(f"expected a 2-D matrix, got shape {m.shape}")
    with open(path, "w", encoding="utf-8") as handle:
        handle.write(f"{m.shape[0]} {m.shape[1]}\n")
        for row in m:
            handle.write(" ".join(f"{x:.9g}" for x in row) + "\n")


def read_selection(path: str | Path) -> SelectionMatrix:
    with open(path, "r", encoding="utf-8") as handle:
        lines = handle.read().splitlines()
    try:
        rows, cols = (int(x) for x in lines[0].split())
        selected = [int(x) for x in lines[1].split()] if len(lines) > 1 else []
    except (ValueError, IndexError) as exc:
        raise FusionError(f"{path}: malformed selection file") from exc
    if len(selected) != cols:
        raise FusionError(f"{path}: header declares {cols} columns, found {len(selected)}")
    return SelectionMatrix(rows, tuple(selected))


def write_selection(m: SelectionMatrix, path: str | Path) -> None:
    with open(path, "w", encoding="utf-8") as handle:
        handle.write(f"{m.rows} {m.cols}\n")
        handle.write(" ".join(str(i) for i in m.selected) + "\n")
