"""Seed test generation, execution traces and active-view tracking.

A seed is a random weighted walk over the live app.  Executing a test
records the layout before/after every event plus, per layout, the map from
group views to their active members — the view inside each group that an
event most recently fired on, carried forward across similar layouts.
"""

from __future__ import annotations

import random
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence, Set, Tuple

from .gui import (
    Layout,
    ViewNode,
    encode_view,
    layout_to_json,
    locate_by_encoding,
    locate_similar_view,
    strip_text,
)
from .harness import EventSpec, NoReceiverError, ScenarioApp, enabled_events
from .model import AbstractEvent, TransitionalModel

#: Button texts treated as likely state-committing confirmations.
DEFAULT_MOTIF_TEXTS = ("OK", "Yes", "Save", "Done")


@dataclass
class TestCase:
    """An executable event sequence with a stable identifier."""

    seed_id: str
    events: List[EventSpec]

    def to_json(self) -> dict:
        return {"seed_id": self.seed_id, "events": [e.to_json() for e in self.events]}

    @classmethod
    def from_json(cls, data: dict) -> "TestCase":
        return cls(
            seed_id=data["seed_id"],
            events=[EventSpec.from_json(e) for e in data["events"]],
        )


@dataclass
class ExecutionTrace:
    """Layouts and active-view maps recorded while running a test.

    ``layouts[i]`` is the layout the i-th event fired on; ``layouts[n]`` is
    the final layout.  ``active[i]`` maps group node_ids of ``layouts[i]``
    to the node_id of that group's active member; entry ``i`` already
    accounts for the i-th event itself, while the final entry carries only
    what propagated forward.
    """

    test: TestCase
    layouts: List[Layout]
    active: List[Dict[int, int]]

    def to_json(self) -> dict:
        return {
            "test": self.test.to_json(),
            "layouts": [layout_to_json(l) for l in self.layouts],
        }


# ── independence and active views ────────────────────────────────────────────


def independent_views(layout: Layout) -> Set[int]:
    """Node ids of views that may anchor an independent inserted trace.

    Children of a group view are independent of their same-typed siblings;
    views outside every group are assumed independent of grouped views.
    """
    out: Set[int] = set()
    grouped: Set[int] = set()
    for node in layout.walk():
        if not node.is_group:
            continue
        for child in node.children:
            grouped.update(w.node_id for w in child.walk())
        by_type: Dict[str, List[ViewNode]] = {}
        for child in node.children:
            by_type.setdefault(child.view_type, []).append(child)
        for siblings in by_type.values():
            if len(siblings) >= 2:
                out.update(c.node_id for c in siblings)
    for node in layout.walk():
        if node.node_id not in grouped:
            out.add(node.node_id)
    return out


def group_path(layout: Layout, node_id: int) -> List[Tuple[ViewNode, ViewNode]]:
    """(group, member) pairs for every group enclosing ``node_id``.

    The member is the group's direct child on the path down to the node.
    """
    out: List[Tuple[ViewNode, ViewNode]] = []

    def descend(node: ViewNode, path: List[ViewNode]) -> bool:
        if node.node_id == node_id:
            for i, anc in enumerate(path):
                if anc.is_group and i + 1 <= len(path) - 1:
                    out.append((anc, path[i + 1]))
                elif anc.is_group:
                    out.append((anc, node))
            return True
        for child in node.children:
            if descend(child, path + [node]):
                return True
        return False

    if layout.root is not None:
        descend(layout.root, [])
    return out


def annotate_active(layout: Layout, active: Dict[int, int], receiver: ViewNode) -> None:
    """Mark the receiver's enclosing-group members as those groups' active views."""
    for group, member in group_path(layout, receiver.node_id):
        active[group.node_id] = member.node_id


def propagate_active(
    layouts: Sequence[Layout], actives: Sequence[Dict[int, int]], new_layout: Layout
) -> Dict[int, int]:
    """Carry active views from the most recent similar-typed layout forward."""
    for j in range(len(layouts) - 1, -1, -1):
        prev = layouts[j]
        if not prev.foreground or not new_layout.foreground:
            continue
        if prev.screen_id != new_layout.screen_id:
            continue
        carried: Dict[int, int] = {}
        for group_id, active_id in actives[j].items():
            group = locate_similar_view(prev.node(group_id), new_layout)
            active = locate_similar_view(prev.node(active_id), new_layout)
            if group is None or active is None:
                continue
            if any(w.node_id == active.node_id for w in group.walk()):
                carried[group.node_id] = active.node_id
        return carried
    return {}


# ── execution ────────────────────────────────────────────────────────────────


def execute_test(app: ScenarioApp, test: TestCase) -> ExecutionTrace:
    """Run a test from a fresh app state, recording layouts and active maps.

    Raises :class:`NoReceiverError` when an event's receiver is absent.
    """
    layout = app.reset()
    layouts = [layout]
    actives: List[Dict[int, int]] = [propagate_active([], [], layout)]
    for e in test.events:
        if e.event_type not in ("back", "system"):
            receiver = locate_by_encoding(e.receiver, e.receiver_subtree, layout)
            if receiver is None:
                raise NoReceiverError("no-receiver: %s" % e.receiver)
            annotate_active(layout, actives[-1], receiver)
        layout = app.fire(e)
        layouts.append(layout)
        if layout.foreground:
            actives.append(propagate_active(layouts[:-1], actives, layout))
        else:
            actives.append({})
    return ExecutionTrace(test=test, layouts=layouts, active=actives)


# ── seed generation ──────────────────────────────────────────────────────────


def generate_seeds(
    app: ScenarioApp,
    model: TransitionalModel,
    rng: random.Random,
    num_seeds: int,
    seed_len: int,
    motif_texts: Sequence[str] = DEFAULT_MOTIF_TEXTS,
    motif_multiplier: float = 3.0,
) -> List[ExecutionTrace]:
    """Generate and execute seed tests by weighted-random live walks.

    Event weights come from (and feed back into) the model's statistics,
    which persist across seeds.  After an edit or a screen-changing event,
    confirmation-styled receivers (text in ``motif_texts``) get their weight
    multiplied, biasing walks toward committing state changes.  Back events
    are never selected.  A walk that cannot be replayed is regenerated.
    """
    seeds: List[ExecutionTrace] = []
    attempts = 0
    while len(seeds) < num_seeds:
        attempts += 1
        if attempts > num_seeds * 50:
            raise RuntimeError("unable to generate replayable seeds")
        events = _walk(app, model, rng, seed_len, motif_texts, motif_multiplier)
        if len(events) < seed_len:
            continue
        test = TestCase(seed_id="seed-%03d" % len(seeds), events=events)
        try:
            trace = execute_test(app.clone(), test)
        except NoReceiverError:
            continue
        seeds.append(trace)
    return seeds


def _walk(
    app: ScenarioApp,
    model: TransitionalModel,
    rng: random.Random,
    seed_len: int,
    motif_texts: Sequence[str],
    motif_multiplier: float,
) -> List[EventSpec]:
    walker = app.clone()
    layout = walker.reset()
    seen: Set[AbstractEvent] = {
        AbstractEvent.of(e) for e in enabled_events(layout)
    }
    events: List[EventSpec] = []
    boost_next = False
    for _ in range(seed_len):
        if not layout.foreground:
            break
        candidates = [e for e in enabled_events(layout) if e.event_type != "back"]
        if not candidates:
            break
        weights = []
        for e in candidates:
            w = max(model.ensure_stats(AbstractEvent.of(e)).weight, 1e-9)
            if boost_next and _receiver_text(e) in motif_texts:
                w *= motif_multiplier
            weights.append(w)
        chosen = rng.choices(candidates, weights=weights, k=1)[0]
        before_screen = layout.screen_id
        ae = AbstractEvent.of(chosen)
        src = model.add_state(layout)[0]
        layout = walker.fire(chosen)
        events.append(chosen)
        boost_next = chosen.event_type == "edit" or (
            layout.foreground and layout.screen_id != before_screen
        )
        discovered: Set[AbstractEvent] = set()
        if layout.foreground:
            dst = model.add_state(layout)[0]
            for e in enabled_events(layout):
                out_ae = AbstractEvent.of(e)
                if out_ae not in model.stats and out_ae not in seen:
                    discovered.add(out_ae)
                seen.add(out_ae)
            model.add_transition(src, ae, dst)
        model.record_execution(ae, discovered)
    return events


def _receiver_text(e: EventSpec) -> str:
    if not e.receiver:
        return ""
    return e.receiver.rsplit("|", 1)[-1]


# ── volatile-view detection ──────────────────────────────────────────────────


def detect_volatile_views(app: ScenarioApp, test: TestCase) -> Set[str]:
    """Text-stripped encodings of views that differ across two replays.

    The test runs twice on the same app instance; any view whose encoding
    changed between the runs' aligned layouts (clocks, counters) is
    volatile and excluded from GUI-effect comparison.
    """
    first = execute_test(app, test)
    second = execute_test(app, test)
    volatile: Set[str] = set()
    for la, lb in zip(first.layouts, second.layouts):
        if not la.foreground or not lb.foreground:
            continue
        a = {}
        for w in la.walk():
            a.setdefault(strip_text(encode_view(w)), set()).add(w.text or "")
        for w in lb.walk():
            key = strip_text(encode_view(w))
            if key in a and (w.text or "") not in a[key]:
                volatile.add(key)
    return volatile
