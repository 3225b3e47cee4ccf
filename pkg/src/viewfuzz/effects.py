"""GUI-effect algebra: deltas between similar-typed layouts and containment.

The delta between two layouts is the multiset of view deletions, additions
and changes recovered from the minimum tree edit script.
"""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass, field
from typing import Iterable, Optional, Set, Tuple

from .gui import (
    IncomparableLayoutsError,
    Layout,
    encode_view,
    similar_layout_type,
    strip_text,
)
from .treedist import INSERT, REMOVE, UPDATE, tree_edit_script

DeltaTuple = Tuple[Optional[str], Optional[str]]


@dataclass(frozen=True)
class EffectDelta:
    """Multiset of (left, right) encoding pairs.

    ``(enc, None)`` is a deletion, ``(None, enc)`` an addition, and two
    distinct encodings a change.
    """

    tuples: tuple = ()

    def __post_init__(self):
        for left, right in self.tuples:
            if left is None and right is None:
                raise ValueError("delta tuple with both sides absent")
            if left == right:
                raise ValueError("delta tuple with equal sides")

    @classmethod
    def from_tuples(cls, tuples: Iterable[DeltaTuple]) -> "EffectDelta":
        return cls(tuples=tuple(sorted(tuples, key=_tuple_key)))

    def counter(self) -> Counter:
        return Counter(self.tuples)

    def __len__(self) -> int:
        return len(self.tuples)

    def __bool__(self) -> bool:
        return bool(self.tuples)


def _tuple_key(t: DeltaTuple):
    return (t[0] or "", t[1] or "")


def render_tuple(t: DeltaTuple) -> str:
    left, right = t
    if right is None:
        return "DEL:%s" % left
    if left is None:
        return "ADD:%s" % right
    return "CHG:%s=>%s" % (left, right)


def gui_effect(
    li: Layout, lj: Layout, volatile: Optional[Set[str]] = None
) -> EffectDelta:
    """Delta of views between two layouts of the same page type.

    ``volatile`` holds text-stripped shallow encodings of views known to
    change on their own; tuples touching them are dropped.
    """
    if not similar_layout_type(li, lj):
        raise IncomparableLayoutsError("incomparable-layouts")
    tuples = []
    for op in tree_edit_script(li.root, lj.root):
        if op.op == REMOVE:
            pair = (encode_view(op.source), None)
        elif op.op == INSERT:
            pair = (None, encode_view(op.target))
        elif op.op == UPDATE:
            pair = (encode_view(op.source), encode_view(op.target))
        else:
            continue
        if volatile and _is_volatile(pair, volatile):
            continue
        tuples.append(pair)
    return EffectDelta.from_tuples(tuples)


def _is_volatile(pair: DeltaTuple, volatile: Set[str]) -> bool:
    left, right = pair
    if left is not None and strip_text(left) in volatile:
        return True
    if right is not None and strip_text(right) in volatile:
        return True
    return False


def delta_contained(d1: EffectDelta, d2: EffectDelta) -> bool:
    """True iff ``d1`` is a sub-multiset of ``d2``."""
    return not (d1.counter() - d2.counter())


def delta_witness(d1: EffectDelta, d2: EffectDelta) -> EffectDelta:
    """Tuples of ``d1`` missing from ``d2`` (with multiplicity)."""
    missing = d1.counter() - d2.counter()
    return EffectDelta.from_tuples(missing.elements())
