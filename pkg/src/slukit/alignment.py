"""Minimum-edit-distance word alignment with a deterministic backtrace."""

from __future__ import annotations

import enum
from typing import Hashable, NamedTuple, Optional, Sequence


class OpKind(str, enum.Enum):
    MATCH = "MATCH"
    SUB = "SUB"
    DEL = "DEL"
    INS = "INS"


_MATCH, _SUB, _DEL, _INS = OpKind.MATCH, OpKind.SUB, OpKind.DEL, OpKind.INS


class AlignmentOp(NamedTuple):
    kind: OpKind
    ref_index: Optional[int] = None
    hyp_index: Optional[int] = None


class Alignment(NamedTuple):
    ops: tuple[AlignmentOp, ...]
    distance: int

    def counts(self) -> dict[OpKind, int]:
        out = {k: 0 for k in OpKind}
        for op in self.ops:
            out[op.kind] += 1
        return out


def _cost_table(ref: Sequence[Hashable], hyp: Sequence[Hashable]) -> list[list[int]]:
    prev = list(range(len(hyp) + 1))
    table = [prev]
    for i, r in enumerate(ref, 1):
        row = [i]
        append = row.append
        left = i
        # inlined min(); this loop dominates scoring time
        for v, up, h in zip(prev, prev[1:], hyp):
            if r != h:
                v += 1
            if up < v:
                v = up + 1
            if left < v:
                v = left + 1
            left = v
            append(v)
        table.append(row)
        prev = row
    return table


def edit_distance(a: Sequence[Hashable], b: Sequence[Hashable]) -> int:
    """Unit-cost Levenshtein distance; works on strings or token lists."""
    if len(a) < len(b):
        a, b = b, a
    prev = list(range(len(b) + 1))
    for i, x in enumerate(a, 1):
        cur = [i]
        for j, y in enumerate(b, 1):
            cur.append(min(prev[j - 1] + (x != y), prev[j] + 1, cur[j - 1] + 1))
        prev = cur
    return prev[-1]


def align_words(ref: Sequence[str], hyp: Sequence[str]) -> Alignment:
    """Align ``hyp`` against ``ref`` under unit costs.

    The backtrace walks from the end and prefers the diagonal (MATCH/SUB),
    then DEL, then INS whenever several moves reach the optimum, so the op
    sequence is fully determined by the inputs.
    """
    n, m = len(ref), len(hyp)
    # a shared suffix is all MATCH: with equal last words the diagonal always
    # attains the optimum, so trimming it leaves the backtrace unchanged
    tail = 0
    while tail < n and tail < m and ref[n - 1 - tail] == hyp[m - 1 - tail]:
        tail += 1
    i, j = n - tail, m - tail
    new = tuple.__new__
    if tail:
        d = _cost_table(ref[:i], hyp[:j])
        ops = [new(AlignmentOp, (_MATCH, i + k, j + k)) for k in range(tail - 1, -1, -1)]
    else:
        d = _cost_table(ref, hyp)
        ops = []
    append = ops.append
    while i and j:
        row, up = d[i], d[i - 1]
        here = row[j]
        if ref[i - 1] == hyp[j - 1]:
            if up[j - 1] == here:
                i -= 1
                j -= 1
                append(new(AlignmentOp, (_MATCH, i, j)))
                continue
        elif up[j - 1] + 1 == here:
            i -= 1
            j -= 1
            append(new(AlignmentOp, (_SUB, i, j)))
            continue
        if up[j] + 1 == here:
            i -= 1
            append(new(AlignmentOp, (_DEL, i, None)))
        else:
            j -= 1
            append(new(AlignmentOp, (_INS, None, j)))
    while i:
        i -= 1
        append(new(AlignmentOp, (_DEL, i, None)))
    while j:
        j -= 1
        append(new(AlignmentOp, (_INS, None, j)))
    ops.reverse()
    return new(Alignment, (tuple(ops), d[-1][-1]))


def format_alignment(
    alignment: Alignment, ref: Sequence[str], hyp: Sequence[str]
) -> str:
    """Tab-separated dump, one op per line; ``-`` marks an absent side."""
    lines = []
    for op in alignment.ops:
        ri = "-" if op.ref_index is None else str(op.ref_index)
        hi = "-" if op.hyp_index is None else str(op.hyp_index)
        rw = "-" if op.ref_index is None else ref[op.ref_index]
        hw = "-" if op.hyp_index is None else hyp[op.hyp_index]
        lines.append("\t".join((op.kind.value, ri, hi, rw, hw)))
    return "".join(line + "\n" for line in lines)
