"""Shared hand-derived fixtures for the worked scoring examples."""

from __future__ import annotations

from pathlib import Path

from slukit.alignment import Alignment, AlignmentOp, OpKind
from slukit.corpus import parse_manifest

FIXTURES = Path(__file__).parent / "fixtures"


def load_one(name: str):
    (rec,) = parse_manifest(FIXTURES / name).records
    return rec


def ops_from_coloring(kinds: str) -> Alignment:
    """Alignment from a compact string such as ``"MSDI"``; indices are implied."""
    ops = []
    i = j = 0
    for k in kinds:
        if k in "MS":
            ops.append(AlignmentOp(OpKind.MATCH if k == "M" else OpKind.SUB, i, j))
            i += 1
            j += 1
        elif k == "D":
            ops.append(AlignmentOp(OpKind.DEL, i, None))
            i += 1
        elif k == "I":
            ops.append(AlignmentOp(OpKind.INS, None, j))
            j += 1
    return Alignment(tuple(ops), sum(k != "M" for k in kinds))


# flight example colored by hand: tacoma deleted, taco+ma
# inserted, francisco deleted and re-inserted with the wrong slot
FLIGHT_COLORING = (
    "SMMS" "MMMMMM" "DII" "MMMMMM" "DI" "M" "S" "MMMMM" "S" "MMMM" "S" "M"
)

# (tp, fp, fn) per raw label, counted by hand from the coloring
FLIGHT_TALLY = {
    "B-roundtrip": (1, 0, 0),
    "I-roundtrip": (1, 0, 0),
    "B-fromloc.city": (1, 0, 0),
    "I-fromloc.city": (1, 0, 0),
    "B-toloc.city": (0, 1, 1),
    "I-toloc.city": (0, 2, 0),
    "B-toloc.state": (1, 0, 0),
    "B-stoploc.city": (1, 0, 0),
    "I-stoploc.city": (0, 0, 1),
    "B-cost.relative": (1, 0, 0),
    "I-cost.relative": (0, 1, 1),
    "B-fare": (1, 0, 0),
    "I-fare": (1, 1, 1),
    "B-depart.month": (1, 0, 0),
    "B-depart.day": (1, 0, 0),
    "B-depart.year": (1, 0, 0),
    "I-depart.year": (1, 1, 1),
}

# food examples under strip_bio (labels are bare, so prefixes must not matter)
FOOD_TALLIES = {
    "food_hyp_slots_wrong.jsonl": {"food": (0, 0, 6), "sports": (0, 6, 0)},
    "food_hyp_high_wer.jsonl": {"food": (6, 0, 0)},
    "food_hyp_values_wrong.jsonl": {"food": (1, 5, 5)},
}
