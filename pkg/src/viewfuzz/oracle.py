"""GUI-effect containment oracle, violation encoding, dedup and ranking.

A mutant must reproduce every GUI effect its seed showed across the
insertion point.  Each missing effect tuple becomes a violation; identical
violations are deduplicated by a canonical key, and keys seen exactly once
are surfaced first ("deviant behavior" ranking).
"""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence, Set, Tuple

from .effects import (
    DeltaTuple,
    EffectDelta,
    delta_contained,
    delta_witness,
    gui_effect,
)
from .gui import Layout, similar_layout_type
from .seeds import ExecutionTrace


@dataclass
class Violation:
    seed_id: str
    mutant_id: str
    pair: Tuple[int, int]
    witness: EffectDelta
    canonical_key: str

    def __post_init__(self):
        if not self.witness:
            raise ValueError("violation with empty witness")


@dataclass
class BugReport:
    canonical_key: str
    occurrences: int
    surfaced: bool
    exemplar: Violation
    seed_snapshots: List[str] = field(default_factory=list)
    mutant_snapshots: List[str] = field(default_factory=list)

    def to_json(self) -> dict:
        return {
            "canonical_key": self.canonical_key,
            "occurrences": self.occurrences,
            "surfaced": self.surfaced,
            "seed_id": self.exemplar.seed_id,
            "mutant_id": self.exemplar.mutant_id,
            "pair": list(self.exemplar.pair),
            "witness": [_tuple_json(t) for t in self.exemplar.witness.tuples],
            "snapshots": {
                "seed": list(self.seed_snapshots),
                "mutant": list(self.mutant_snapshots),
            },
        }


def _tuple_json(t: DeltaTuple) -> dict:
    left, right = t
    if right is None:
        return {"op": "DEL", "left": left}
    if left is None:
        return {"op": "ADD", "right": right}
    return {"op": "CHG", "left": left, "right": right}


# ── canonical keys ───────────────────────────────────────────────────────────


def short_label(encoding: str) -> str:
    """Most specific populated segment of a shallow encoding.

    Prefers the text, then content description, then resource id, then the
    view type — yielding stable human-readable keys like ``pic_Cinema``.
    """
    head = encoding.split("\n", 1)[0]
    parts = head.split("|")
    view_type, resource_id, content_desc, text = (parts + ["", "", "", ""])[:4]
    return text or content_desc or resource_id or view_type


def _key_tuple(t: DeltaTuple) -> str:
    left, right = t
    if right is None:
        return "DEL:%s" % short_label(left)
    if left is None:
        return "ADD:%s" % short_label(right)
    return "CHG:%s=>%s" % (short_label(left), short_label(right))


def encode_violation(screen_i: str, screen_j: str, witness: EffectDelta) -> str:
    """Canonical key: screen pair plus the sorted witness tuples."""
    return "%s|%s|%s" % (
        screen_i,
        screen_j,
        ";".join(sorted(_key_tuple(t) for t in witness.tuples)),
    )


# ── oracle checking ──────────────────────────────────────────────────────────


def check(
    seed: ExecutionTrace,
    mutant_layouts: Sequence[Layout],
    insert_pos: int,
    trace_len: int,
    volatile: Optional[Set[str]] = None,
    mutant_id: str = "",
) -> List[Violation]:
    """Compare seed and mutant GUI effects across the insertion point.

    Seed layout indices map to mutant indices unchanged up to the pivot and
    shifted by the inserted trace length afterwards.  A pair (i, j) is
    checked when it spans the insertion or lies wholly after it, and both
    layouts are of the same page type; a violation is emitted when the
    seed's delta is not contained in the mutant's.
    """
    n = len(seed.layouts) - 1
    expected = len(seed.test.events) + trace_len + 1
    if len(mutant_layouts) != expected:
        raise ValueError(
            "mutant layout count %d does not match expected alignment %d"
            % (len(mutant_layouts), expected)
        )

    def mapped(i: int) -> int:
        return i if i <= insert_pos else i + trace_len

    out: List[Violation] = []
    for i in range(n + 1):
        for j in range(i + 1, n + 1):
            spans = i <= insert_pos < j
            after = insert_pos < i
            if not (spans or after):
                continue
            li, lj = seed.layouts[i], seed.layouts[j]
            if not similar_layout_type(li, lj):
                continue
            mi, mj = mutant_layouts[mapped(i)], mutant_layouts[mapped(j)]
            if not similar_layout_type(mi, mj):
                continue
            delta_seed = gui_effect(li, lj, volatile)
            delta_mutant = gui_effect(mi, mj, volatile)
            if delta_contained(delta_seed, delta_mutant):
                continue
            witness = delta_witness(delta_seed, delta_mutant)
            out.append(
                Violation(
                    seed_id=seed.test.seed_id,
                    mutant_id=mutant_id,
                    pair=(i, j),
                    witness=witness,
                    canonical_key=encode_violation(li.screen_id, lj.screen_id, witness),
                )
            )
    return out


# ── trivial false-positive filter ────────────────────────────────────────────


def filter_pivot_return(pivot: Layout, trace_end: Layout) -> bool:
    """Keep the mutant only if the trace returned close to the pivot layout.

    Compares the multisets of view texts; a normalized difference above 50%
    means the loop failed to come back and the mutant is discarded.
    """
    texts_a = _texts(pivot)
    texts_b = _texts(trace_end)
    denom = max(len(texts_a), len(texts_b))
    if denom == 0:
        return True
    diff = _multiset_minus(texts_a, texts_b) + _multiset_minus(texts_b, texts_a)
    return (diff / 2) / denom <= 0.5


def _texts(layout: Layout) -> List[str]:
    return [w.text for w in layout.walk() if w.text is not None]


def _multiset_minus(a: List[str], b: List[str]) -> int:
    remaining = Counter(a)
    remaining.subtract(Counter(b))
    return sum(v for v in remaining.values() if v > 0)


# ── dedup and ranking ────────────────────────────────────────────────────────


def dedup_and_rank(violations: Sequence[Violation]) -> List[BugReport]:
    """Group violations by canonical key and rank ascending by occurrences.

    Only 1-occurrence keys are surfaced; the rest stay in the output
    flagged as suppressed.
    """
    ordered = sorted(
        violations,
        key=lambda v: (v.canonical_key, v.seed_id, v.mutant_id, v.pair),
    )
    groups: Dict[str, List[Violation]] = {}
    for v in ordered:
        groups.setdefault(v.canonical_key, []).append(v)
    reports = [
        BugReport(
            canonical_key=key,
            occurrences=len(group),
            surfaced=len(group) == 1,
            exemplar=group[0],
        )
        for key, group in groups.items()
    ]
    reports.sort(key=lambda r: (r.occurrences, r.canonical_key))
    return reports
