"""Transitional-model mining over abstract layout states.

States are abstract layout signatures; transitions are abstract events.
Event selection interleaves a weight-guided systematic strategy with a
random strategy once exploration saturates.  Event weights follow a
decay-and-reward recurrence: each execution divides by the square of the
execution count while newly discovered follow-up events add their weight.
"""

from __future__ import annotations

import hashlib
import json
import random
from dataclasses import dataclass, field
from typing import Dict, FrozenSet, List, Optional, Set, Tuple

from .gui import Layout, abstract_layout, layout_from_json, layout_to_json
from .harness import EventSpec, ScenarioApp, enabled_events

INITIAL_WEIGHT = 100.0

Signature = FrozenSet[Tuple[str, Optional[str], Optional[str]]]


@dataclass(frozen=True)
class AbstractEvent:
    """Model-level event: type, receiver shallow encoding (with text), data class."""

    event_type: str
    receiver: Optional[str] = None
    data_class: str = ""  # "" or "nonempty"

    def key(self) -> Tuple[str, str, str]:
        return (self.event_type, self.receiver or "", self.data_class)

    def to_json(self) -> dict:
        return {
            "type": self.event_type,
            "receiver": self.receiver,
            "data_class": self.data_class,
        }

    @classmethod
    def from_json(cls, data: dict) -> "AbstractEvent":
        return cls(
            event_type=data["type"],
            receiver=data.get("receiver"),
            data_class=data.get("data_class", ""),
        )

    @classmethod
    def of(cls, e: EventSpec) -> "AbstractEvent":
        return cls(
            event_type=e.event_type,
            receiver=e.receiver,
            data_class="nonempty" if e.data else "",
        )

    def to_event_spec(self) -> EventSpec:
        return EventSpec(
            event_type=self.event_type,
            receiver=self.receiver,
            data=("input" if self.data_class else None),
        )


@dataclass
class EventStats:
    weight: float = INITIAL_WEIGHT
    exec_times: int = 1
    new_events: Set[AbstractEvent] = field(default_factory=set)


def sig_hash(sig: Signature) -> str:
    canon = json.dumps(sorted((t, r or "", c or "") for t, r, c in sig))
    return hashlib.sha1(canon.encode()).hexdigest()[:16]


class TransitionalModel:
    """States, transitions and per-event selection statistics."""

    def __init__(self):
        self.representatives: Dict[Signature, Layout] = {}
        self.transitions: Set[Tuple[Signature, AbstractEvent, Signature]] = set()
        self.stats: Dict[AbstractEvent, EventStats] = {}

    # ── states and transitions ───────────────────────────────────────────

    def add_state(self, layout: Layout) -> Tuple[Signature, bool]:
        """Register a layout's state; returns (signature, is_new)."""
        sig = abstract_layout(layout)
        if sig in self.representatives:
            return sig, False
        self.representatives[sig] = layout
        return sig, True

    def find_state(self, layout: Layout) -> Optional[Signature]:
        sig = abstract_layout(layout)
        return sig if sig in self.representatives else None

    def add_transition(
        self, src: Signature, event: AbstractEvent, dst: Signature
    ) -> bool:
        """Record a transition; duplicates (same triple) are pruned."""
        triple = (src, event, dst)
        if triple in self.transitions:
            return False
        self.transitions.add(triple)
        return True

    def transitions_from(self, src: Signature) -> List[Tuple[AbstractEvent, Signature]]:
        out = [(e, dst) for (s, e, dst) in self.transitions if s == src]
        out.sort(key=lambda pair: (pair[0].key(), sig_hash(pair[1])))
        return out

    # ── event statistics (Eq.-style weight recurrence) ───────────────────

    def ensure_stats(self, event: AbstractEvent) -> EventStats:
        if event not in self.stats:
            self.stats[event] = EventStats()
        return self.stats[event]

    def record_execution(self, event: AbstractEvent, discovered: Set[AbstractEvent]) -> None:
        """Count one execution of ``event`` and refresh all weights at once.

        ``discovered`` is the set of events first observed on the resulting
        layout; it replaces the event's reward set.  All weights are updated
        simultaneously from the previous round's values.
        """
        stats = self.ensure_stats(event)
        stats.exec_times += 1
        stats.new_events = set(discovered)
        previous = {e: s.weight for e, s in self.stats.items()}
        for e, s in self.stats.items():
            reward = sum(previous.get(n, INITIAL_WEIGHT) for n in s.new_events)
            s.weight = (previous[e] + reward) / (s.exec_times ** 2)

    # ── serialization ────────────────────────────────────────────────────

    def to_json(self) -> dict:
        states = [
            {"sig_hash": sig_hash(sig), "representative_layout": layout_to_json(rep)}
            for sig, rep in self.representatives.items()
        ]
        states.sort(key=lambda s: s["sig_hash"])
        transitions = [
            {"from": sig_hash(src), "event": e.to_json(), "to": sig_hash(dst)}
            for (src, e, dst) in self.transitions
        ]
        transitions.sort(key=lambda t: (t["from"], t["event"]["type"], t["event"]["receiver"] or "", t["to"]))
        stats = [
            {
                "event": e.to_json(),
                "weight": s.weight,
                "exec_times": s.exec_times,
                "new_events": sorted(
                    (n.to_json() for n in s.new_events),
                    key=lambda d: (d["type"], d["receiver"] or "", d["data_class"]),
                ),
            }
            for e, s in sorted(self.stats.items(), key=lambda kv: kv[0].key())
        ]
        return {"states": states, "transitions": transitions, "stats": stats}

    @classmethod
    def from_json(cls, data: dict) -> "TransitionalModel":
        model = cls()
        by_hash: Dict[str, Signature] = {}
        for s in data.get("states", []):
            rep = layout_from_json(s["representative_layout"])
            sig = abstract_layout(rep)
            model.representatives[sig] = rep
            by_hash[s["sig_hash"]] = sig
        for t in data.get("transitions", []):
            model.transitions.add(
                (by_hash[t["from"]], AbstractEvent.from_json(t["event"]), by_hash[t["to"]])
            )
        for entry in data.get("stats", []):
            event = AbstractEvent.from_json(entry["event"])
            model.stats[event] = EventStats(
                weight=entry["weight"],
                exec_times=entry["exec_times"],
                new_events={AbstractEvent.from_json(n) for n in entry["new_events"]},
            )
        return model

    def dump(self) -> str:
        return json.dumps(self.to_json(), indent=2, sort_keys=True)

    @classmethod
    def load(cls, text: str) -> "TransitionalModel":
        return cls.from_json(json.loads(text))


# ── event selection ──────────────────────────────────────────────────────────


def select_event_systematic(
    model: TransitionalModel, events: List[EventSpec]
) -> Optional[EventSpec]:
    """Highest-weight enabled event; ties go to the smallest preorder index."""
    best = None
    best_key = None
    for e in events:
        if e.event_type == "back":
            continue
        weight = model.ensure_stats(AbstractEvent.of(e)).weight
        key = (-weight, e.path_hint if e.path_hint is not None else 0)
        if best_key is None or key < best_key:
            best, best_key = e, key
    return best


def select_event_random(
    rng: random.Random, events: List[EventSpec]
) -> Optional[EventSpec]:
    """Category mix: 60% touch, 35% long-touch, 5% navigation (back)."""
    touch = [e for e in events if e.event_type in ("click", "edit", "scroll")]
    long_touch = [e for e in events if e.event_type == "long-click"]
    nav = [e for e in events if e.event_type == "back"]
    pools = [(0.60, touch), (0.35, long_touch), (0.05, nav)]
    total = sum(w for w, pool in pools if pool)
    if total == 0:
        return None
    roll = rng.random() * total
    for w, pool in pools:
        if not pool:
            continue
        if roll < w:
            return pool[rng.randrange(len(pool))]
        roll -= w
    return None


# ── mining loop ──────────────────────────────────────────────────────────────


def mine(
    app: ScenarioApp,
    budget: int,
    rng: random.Random,
    saturation_k: int = 30,
    random_r: int = 15,
    model: Optional[TransitionalModel] = None,
) -> TransitionalModel:
    """Explore ``app`` for ``budget`` events and return the mined model.

    Systematic weight-guided selection runs until ``saturation_k`` events
    pass without a new state, then ``random_r`` random events run before
    switching back.  A backgrounded app is restarted.
    """
    model = model if model is not None else TransitionalModel()
    layout = app.reset()
    sig, _ = model.add_state(layout)
    seen_events: Set[AbstractEvent] = set()
    for e in enabled_events(layout):
        ae = AbstractEvent.of(e)
        seen_events.add(ae)
        model.ensure_stats(ae)

    stale = 0
    random_left = 0
    for _ in range(budget):
        if not layout.foreground:
            layout = app.reset()
            sig, is_new = model.add_state(layout)
            if is_new:
                stale = 0

        events = enabled_events(layout)
        if random_left > 0:
            chosen = select_event_random(rng, events)
            random_left -= 1
        else:
            chosen = select_event_systematic(model, events)
            if chosen is None:
                chosen = select_event_random(rng, events)
        if chosen is None:
            break

        ae = AbstractEvent.of(chosen)
        layout = app.fire(chosen)

        discovered: Set[AbstractEvent] = set()
        if layout.foreground:
            dst, is_new = model.add_state(layout)
            for e in enabled_events(layout):
                out_ae = AbstractEvent.of(e)
                if out_ae not in seen_events:
                    seen_events.add(out_ae)
                    model.ensure_stats(out_ae)
                    discovered.add(out_ae)
            model.add_transition(sig, ae, dst)
            sig = dst
            stale = 0 if is_new else stale + 1
        else:
            stale += 1
        model.record_execution(ae, discovered)

        if random_left == 0 and stale >= saturation_k:
            random_left = random_r
            stale = 0
    return model
