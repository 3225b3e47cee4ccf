"""Mutant generation: independent loop traces inserted at pivot layouts.

A candidate trace starts from a pivot layout's state with an event whose
receiver is an independent, inactive view, walks the mined model, and
returns to the pivot state within the length bound.  Inserting it into the
seed yields a mutant that should preserve the seed's GUI effects.
"""

from __future__ import annotations

import random
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence, Set, Tuple

from .gui import Layout, abstract_layout, locate_by_encoding
from .harness import EventSpec, NoReceiverError, ScenarioApp
from .model import AbstractEvent, TransitionalModel, sig_hash
from .seeds import ExecutionTrace, TestCase, independent_views

EXECUTED = "executed"
UNREPLAYABLE = "unreplayable"
SKIPPED = "skipped"

MAX_START_RECEIVERS_PER_GROUP = 3
MAX_SELF_LOOP_USES = 2


@dataclass(frozen=True)
class IndependentTrace:
    """A loop of abstract events anchored at an independent start receiver."""

    events: Tuple[AbstractEvent, ...]

    def to_event_specs(self) -> List[EventSpec]:
        return [e.to_event_spec() for e in self.events]


@dataclass
class Mutant:
    """A seed with an independent trace inserted at one pivot position."""

    mutant_id: str
    seed_id: str
    insert_pos: int
    trace: IndependentTrace
    test: TestCase
    status: str = EXECUTED
    layouts: Optional[List[Layout]] = None
    filtered: bool = False

    def to_json(self) -> dict:
        return {
            "mutant_id": self.mutant_id,
            "seed_id": self.seed_id,
            "insert_pos": self.insert_pos,
            "trace": [e.to_json() for e in self.trace.events],
            "status": self.status,
            "filtered": self.filtered,
        }


# ── trace search ─────────────────────────────────────────────────────────────


def start_transitions(
    model: TransitionalModel,
    pivot_layout: Layout,
    pivot_active: Dict[int, int],
    rng: random.Random,
) -> List[Tuple[AbstractEvent, frozenset]]:
    """Qualified first steps of a trace out of the pivot state.

    The event's receiver must resolve on the pivot layout, be an
    independent view there, and not be any group's active view.  At most
    three distinct start receivers are kept per enclosing group.
    """
    pivot_sig = abstract_layout(pivot_layout)
    independents = independent_views(pivot_layout)
    active_ids = set(pivot_active.values())
    parent_group: Dict[int, Optional[int]] = {}

    def index_groups(node, group):
        parent_group[node.node_id] = group
        for child in node.children:
            index_groups(child, node.node_id if node.is_group else group)

    if pivot_layout.root is not None:
        index_groups(pivot_layout.root, None)

    by_group: Dict[Optional[int], Dict[int, List[Tuple[AbstractEvent, frozenset]]]] = {}
    for event, dst in model.transitions_from(pivot_sig):
        if event.receiver is None:
            continue
        receiver = locate_by_encoding(event.receiver, None, pivot_layout)
        if receiver is None:
            continue
        if receiver.node_id not in independents:
            continue
        if receiver.node_id in active_ids:
            continue
        group = parent_group.get(receiver.node_id)
        by_group.setdefault(group, {}).setdefault(receiver.node_id, []).append(
            (event, dst)
        )

    out: List[Tuple[AbstractEvent, frozenset]] = []
    for group in sorted(by_group, key=lambda g: -1 if g is None else g):
        receivers = sorted(by_group[group])
        if group is not None and len(receivers) > MAX_START_RECEIVERS_PER_GROUP:
            rng.shuffle(receivers)
            receivers = sorted(receivers[:MAX_START_RECEIVERS_PER_GROUP])
        for rid in receivers:
            out.extend(by_group[group][rid])
    return out


def search_traces(
    model: TransitionalModel,
    pivot_layout: Layout,
    pivot_active: Dict[int, int],
    rng: random.Random,
    max_length: int,
    max_num: int,
) -> List[IndependentTrace]:
    """Breadth-first search for loop traces returning to the pivot state.

    Levels are explored in random order; a trace is accepted when it
    re-reaches the pivot state in at most ``max_length`` events.  Accepted
    traces are not extended, and a self-looping abstract event may appear
    at most twice per trace.
    """
    pivot_sig = abstract_layout(pivot_layout)
    accepted: List[IndependentTrace] = []
    seen: Set[Tuple] = set()

    level: List[Tuple[Tuple[AbstractEvent, ...], frozenset]] = []
    for event, dst in start_transitions(model, pivot_layout, pivot_active, rng):
        path = (event,)
        if dst == pivot_sig:
            key = tuple(e.key() for e in path)
            if key not in seen:
                seen.add(key)
                accepted.append(IndependentTrace(events=path))
                if len(accepted) >= max_num:
                    return accepted
        elif max_length > 1:
            level.append((path, dst))

    while level and len(accepted) < max_num:
        rng.shuffle(level)
        next_level: List[Tuple[Tuple[AbstractEvent, ...], frozenset]] = []
        for path, cur in level:
            for event, dst in model.transitions_from(cur):
                if dst == cur and sum(1 for e in path if e == event) >= MAX_SELF_LOOP_USES:
                    continue
                new_path = path + (event,)
                if dst == pivot_sig and len(new_path) <= max_length:
                    key = tuple(e.key() for e in new_path)
                    if key not in seen:
                        seen.add(key)
                        accepted.append(IndependentTrace(events=new_path))
                        if len(accepted) >= max_num:
                            return accepted
                    continue
                if len(new_path) <= max_length - 1:
                    next_level.append((new_path, dst))
        level = next_level
    return accepted


# ── assembly ─────────────────────────────────────────────────────────────────


def connect_with(
    model: TransitionalModel,
    seed: ExecutionTrace,
    pivot: int,
    trace: IndependentTrace,
) -> bool:
    """Check the seed's remainder can resume after the inserted loop.

    The event right after the pivot must find its receiver on the
    representative layout of the trace's final state (the pivot state).
    A pivot after the last event needs no check.
    """
    if pivot >= len(seed.test.events):
        return True
    resume = seed.test.events[pivot]
    if resume.event_type in ("back", "system"):
        return True
    pivot_sig = abstract_layout(seed.layouts[pivot])
    rep = model.representatives.get(pivot_sig)
    if rep is None:
        return False
    return locate_by_encoding(resume.receiver, resume.receiver_subtree, rep) is not None


def generate_mutants(
    model: TransitionalModel,
    seed: ExecutionTrace,
    rng: random.Random,
    max_length: int,
    max_num: int,
) -> List[Mutant]:
    """All mutants of one seed: loop traces inserted at every pivot."""
    mutants: List[Mutant] = []
    events = seed.test.events
    for pivot in range(len(seed.layouts)):
        layout = seed.layouts[pivot]
        if not layout.foreground:
            continue
        if abstract_layout(layout) not in model.representatives:
            model.add_state(layout)
        traces = search_traces(
            model, layout, seed.active[pivot], rng, max_length, max_num
        )
        for trace in traces:
            if not connect_with(model, seed, pivot, trace):
                continue
            test = TestCase(
                seed_id="%s-p%02d-m%03d" % (seed.test.seed_id, pivot, len(mutants)),
                events=list(events[:pivot])
                + trace.to_event_specs()
                + list(events[pivot:]),
            )
            mutants.append(
                Mutant(
                    mutant_id=test.seed_id,
                    seed_id=seed.test.seed_id,
                    insert_pos=pivot,
                    trace=trace,
                    test=test,
                )
            )
    return mutants


# ── execution with unreplayable-prefix skipping ──────────────────────────────


class PrefixRegistry:
    """Unreplayable inserted-trace prefixes, keyed by seed and position."""

    def __init__(self):
        self._prefixes: Set[Tuple[str, int, Tuple]] = set()

    def register(self, seed_id: str, insert_pos: int, prefix: Sequence[AbstractEvent]) -> None:
        self._prefixes.add((seed_id, insert_pos, tuple(e.key() for e in prefix)))

    def covers(self, seed_id: str, insert_pos: int, trace: IndependentTrace) -> bool:
        keys = tuple(e.key() for e in trace.events)
        for n in range(1, len(keys) + 1):
            if (seed_id, insert_pos, keys[:n]) in self._prefixes:
                return True
        return False


def execute_mutant(
    app: ScenarioApp, mutant: Mutant, registry: Optional[PrefixRegistry] = None
) -> Mutant:
    """Run a mutant from a fresh app; mark unreplayable or skipped mutants.

    A mutant whose inserted trace extends an already-failed prefix is
    skipped without execution.  A receiver miss inside the inserted region
    registers the failing prefix for future skips.
    """
    if registry is not None and registry.covers(
        mutant.seed_id, mutant.insert_pos, mutant.trace
    ):
        mutant.status = SKIPPED
        return mutant
    instance = app.clone()
    layout = instance.reset()
    layouts = [layout]
    insert_lo = mutant.insert_pos
    insert_hi = mutant.insert_pos + len(mutant.trace.events)
    for q, e in enumerate(mutant.test.events):
        try:
            layout = instance.fire(e)
        except NoReceiverError:
            mutant.status = UNREPLAYABLE
            if registry is not None and insert_lo <= q < insert_hi:
                registry.register(
                    mutant.seed_id,
                    mutant.insert_pos,
                    mutant.trace.events[: q - insert_lo + 1],
                )
            mutant.layouts = layouts
            return mutant
        layouts.append(layout)
    mutant.status = EXECUTED
    mutant.layouts = layouts
    return mutant
