"""Deterministic scripted app-under-test.

A scenario file declares screens as tree templates over a mutable item
store, plus transition rules and named fault toggles.  Rendering a screen
expands repeat templates into group-view children, so the same scenario
yields byte-identical layout sequences for identical event sequences
(unless a screen declares volatile fields).
"""

from __future__ import annotations

import copy
import json
import re
from dataclasses import dataclass, field
from pathlib import Path
from typing import Dict, List, Optional

from .gui import (
    DEFAULT_GROUP_VIEW_TYPES,
    BACKGROUND,
    Layout,
    ViewNode,
    encode_view,
    locate_by_encoding,
    make_node,
    number_preorder,
)

_PLACEHOLDER = re.compile(r"\{([a-zA-Z_][a-zA-Z0-9_]*)\}")


class ScenarioError(ValueError):
    """Scenario file failed to parse or validate."""


class NoReceiverError(RuntimeError):
    """An event's receiver view could not be located ("no-receiver")."""


@dataclass(frozen=True)
class EventSpec:
    """A GUI event: type, receiver view encoding, optional data."""

    event_type: str
    receiver: Optional[str] = None  # shallow encoding
    receiver_subtree: Optional[str] = None
    data: Optional[str] = None
    path_hint: Optional[int] = None

    def __post_init__(self):
        if self.event_type in ("back", "system") and self.receiver is not None:
            raise ValueError("%s events carry no receiver" % self.event_type)
        if self.event_type == "edit" and self.data is None:
            raise ValueError("edit events carry data")

    def to_json(self) -> dict:
        out = {"event_type": self.event_type}
        if self.receiver is not None:
            out["receiver"] = self.receiver
        if self.receiver_subtree is not None:
            out["receiver_subtree"] = self.receiver_subtree
        if self.data is not None:
            out["data"] = self.data
        if self.path_hint is not None:
            out["path_hint"] = self.path_hint
        return out

    @classmethod
    def from_json(cls, data: dict) -> "EventSpec":
        return cls(
            event_type=data["event_type"],
            receiver=data.get("receiver"),
            receiver_subtree=data.get("receiver_subtree"),
            data=data.get("data"),
            path_hint=data.get("path_hint"),
        )


def _substitute(value, scope: dict):
    """Fill ``{name}`` placeholders from scope; lists join with '+' (or 'none')."""
    if not isinstance(value, str):
        return value

    def repl(match):
        name = match.group(1)
        if name not in scope:
            return match.group(0)
        val = scope[name]
        if isinstance(val, list):
            return "+".join(str(v) for v in val) if val else "none"
        return str(val)

    return _PLACEHOLDER.sub(repl, value)


def _check_cond(cond: dict, scope: dict) -> bool:
    value = scope.get(cond["field"])
    op = cond.get("op", "eq")
    ref = _substitute(cond.get("value"), scope)
    if op == "eq":
        return value == ref
    if op == "ne":
        return value != ref
    if op == "gt":
        return value is not None and value > ref
    if op == "lt":
        return value is not None and value < ref
    if op == "nonempty":
        return bool(value)
    if op == "empty":
        return not value
    raise ScenarioError("unknown condition op %r" % op)


def _check_conds(conds, scope: dict) -> bool:
    return all(_check_cond(c, scope) for c in conds or ())


class ScenarioApp:
    """One single-threaded instance of a scripted app."""

    def __init__(self, spec: dict, group_types: frozenset = DEFAULT_GROUP_VIEW_TYPES):
        self.spec = spec
        self.group_types = group_types
        self.name = spec.get("name", "scenario")
        self.faults: Dict[str, bool] = dict(spec.get("faults", {}))
        self._screens = {s["id"]: s for s in spec.get("screens", [])}
        self._rules = spec.get("rules", [])
        self._validate()
        self._ticks = 0  # survives reset: models wall-clock volatility
        self._store: dict = {}
        self._screen: str = ""
        self._foreground = False
        self._layout: Layout = BACKGROUND
        self._bindings: Dict[int, dict] = {}
        self.reset()

    # ── configuration ────────────────────────────────────────────────────

    def _validate(self) -> None:
        screens = self.spec.get("screens", [])
        if not screens:
            raise ScenarioError("scenario declares no screens")
        ids = [s["id"] for s in screens]
        if len(ids) != len(set(ids)):
            raise ScenarioError("duplicate screen names")
        if self.spec.get("initial_screen") not in self._screens:
            raise ScenarioError("initial_screen is not a declared screen")
        for rule in self._rules:
            if rule.get("on_screen") not in self._screens:
                raise ScenarioError(
                    "rule on unknown screen %r" % rule.get("on_screen")
                )
            goto = rule.get("goto")
            if goto is not None and goto != "__exit__" and goto not in self._screens:
                raise ScenarioError("rule goto dangling screen %r" % goto)
            if not rule.get("mutate") and (goto is None or goto == rule.get("on_screen")):
                raise ScenarioError("no-op rule on screen %r" % rule.get("on_screen"))

    def set_fault(self, name: str, enabled: bool) -> None:
        if name not in self.faults:
            raise ScenarioError("unknown fault %r" % name)
        self.faults[name] = enabled

    def clone(self) -> "ScenarioApp":
        """Fresh independent instance with the same fault configuration."""
        app = ScenarioApp(self.spec, self.group_types)
        app.faults = dict(self.faults)
        app.reset()
        return app

    # ── lifecycle ────────────────────────────────────────────────────────

    def reset(self) -> Layout:
        self._store = copy.deepcopy(self.spec.get("store", {}))
        self._screen = self.spec["initial_screen"]
        self._foreground = True
        self._render()
        return self._layout

    @property
    def layout(self) -> Layout:
        return self._layout

    def fire(self, e: EventSpec) -> Layout:
        if not self._foreground:
            raise NoReceiverError("no-receiver: app is in the background")
        if e.event_type == "back":
            rule = self._find_rule(e, None, None)
            if rule is None:
                self._foreground = False
                self._layout = BACKGROUND
                return self._layout
            return self._apply_rule(rule, e, None)
        receiver = locate_by_encoding(e.receiver, e.receiver_subtree, self._layout)
        if receiver is None:
            raise NoReceiverError("no-receiver: %s" % e.receiver)
        item = self._bindings.get(receiver.node_id)
        rule = self._find_rule(e, receiver, item)
        if rule is None:
            return self._layout  # event lands on a view with no behavior
        return self._apply_rule(rule, e, receiver)

    # ── rules ────────────────────────────────────────────────────────────

    def _find_rule(self, e: EventSpec, receiver: Optional[ViewNode], item) -> Optional[dict]:
        for rule in self._rules:
            if rule.get("on_screen") != self._screen:
                continue
            ev = rule.get("event", {})
            if ev.get("type") != e.event_type:
                continue
            match = ev.get("receiver_match", {})
            if receiver is None and match:
                continue
            if receiver is not None and not self._match_receiver(match, receiver):
                continue
            fault = rule.get("fault")
            if fault is not None:
                if self.faults.get(fault["name"], False) != fault.get("enabled", True):
                    continue
            scope = self._scope(item, e, receiver)
            if not _check_conds(rule.get("when"), scope):
                continue
            when_item = rule.get("when_item")
            if when_item is not None:
                items = self._store.get(when_item["list"], [])
                if self._find_where(items, when_item["where"], scope) is None:
                    continue
            return rule
        return None

    def _find_where(self, items, conds, scope: dict) -> Optional[dict]:
        for it in items:
            if _check_conds(conds, {**scope, **it}):
                return it
        return None

    def _match_receiver(self, match: dict, receiver: ViewNode) -> bool:
        checks = (
            ("type", receiver.view_type),
            ("resource_id", receiver.resource_id),
            ("content_desc", receiver.content_desc),
            ("text", receiver.text),
        )
        for key, actual in checks:
            if key in match and match[key] != actual:
                return False
        return True

    def _apply_rule(self, rule: dict, e: EventSpec, receiver: Optional[ViewNode]) -> Layout:
        item = self._bindings.get(receiver.node_id) if receiver is not None else None
        scope = self._scope(item, e, receiver)
        for op in rule.get("mutate", ()):
            self._apply_op(op, scope)
        goto = rule.get("goto")
        if goto == "__exit__":
            self._foreground = False
            self._layout = BACKGROUND
            return self._layout
        if goto is not None:
            self._screen = goto
        self._render()
        return self._layout

    def _scope(self, item, e: Optional[EventSpec], receiver: Optional[ViewNode]) -> dict:
        scope = {
            k: v for k, v in self._store.items() if not isinstance(v, (dict,))
        }
        if item is not None:
            scope.update(item)
        if e is not None and e.data is not None:
            scope["data"] = e.data
        if receiver is not None and receiver.text is not None:
            scope["receiver_text"] = receiver.text
        if item is not None:
            scope["__item__"] = item
        return scope

    # ── store mutation ───────────────────────────────────────────────────

    def _select(self, items: List[dict], select, scope: dict) -> Optional[dict]:
        if select == "$item":
            bound = scope.get("__item__")
            if bound is None:
                return None
            for it in items:
                if it is bound:
                    return it
            return None
        if select == "first":
            return items[0] if items else None
        if isinstance(select, dict):
            if "where" in select:
                return self._find_where(items, select["where"], scope)
            want = _substitute(select.get("equals"), scope)
            for it in items:
                if it.get(select["field"]) == want:
                    return it
            return None
        raise ScenarioError("unknown select %r" % select)

    def _apply_op(self, op: dict, scope: dict) -> None:
        kind = op["op"]
        if kind == "set":
            self._store[op["key"]] = _substitute(op["value"], scope)
            return
        if kind == "inc":
            self._store[op["key"]] = self._store.get(op["key"], 0) + op.get("by", 1)
            return
        items = self._store.get(op["list"], []) if "list" in op else None
        if kind == "set_all":
            for it in items:
                it[op["field"]] = _substitute(op["value"], scope)
        elif kind == "set_item_field":
            it = self._select(items, op["select"], scope)
            if it is not None:
                it[op["field"]] = _substitute(op["value"], {**scope, **it})
        elif kind == "append":
            items.append(copy.deepcopy(_substitute(op["value"], scope)))
        elif kind == "remove_item":
            it = self._select(items, op["select"], scope)
            if it is not None:
                items.remove(it)
        elif kind == "append_item_field":
            it = self._select(items, op["select"], scope)
            if it is not None:
                it[op["field"]].append(_substitute(op["value"], {**scope, **it}))
        elif kind == "remove_item_field":
            it = self._select(items, op["select"], scope)
            if it is None:
                return
            values = it[op["field"]]
            if "index" in op:
                if 0 <= op["index"] < len(values):
                    values.pop(op["index"])
            else:
                want = _substitute(op["value"], {**scope, **it})
                if want in values:
                    values.remove(want)
        elif kind == "toggle_value":
            want = _substitute(op["value"], scope)
            if want in items:
                items.remove(want)
            else:
                items.append(want)
        elif kind == "clear":
            items.clear()
        else:
            raise ScenarioError("unknown mutate op %r" % kind)

    # ── rendering ────────────────────────────────────────────────────────

    def _render(self) -> None:
        screen = self._screens[self._screen]
        self._ticks += 1
        volatile = set(screen.get("volatile", ()))
        rendered = self._expand(
            screen["tree-template"], self._scalar_store(), None, volatile
        )
        if len(rendered) != 1:
            raise ScenarioError("screen %r must render exactly one root" % self._screen)
        node, bindings = rendered[0]
        root = number_preorder(node)
        self._bindings = {
            i: bound for i, bound in enumerate(bindings) if bound is not None
        }
        self._layout = Layout(screen_id=self._screen, root=root, foreground=True)
        self._foreground = True

    def _expand(self, template, scope, item, volatile):
        """Expand one template into zero or more (node, preorder bindings)."""
        repeat = template.get("repeat")
        if repeat is None:
            if not _check_conds(template.get("when"), scope):
                return []
            return [self._render_single(template, scope, item, volatile)]
        out = []
        for entry in self._resolve_items(repeat["items"], scope):
            if isinstance(entry, dict):
                entry_scope = {**scope, **entry}
                entry_item = entry
            else:
                entry_scope = {**scope, repeat.get("as", "value"): entry}
                entry_item = item
            if not _check_conds(template.get("when"), entry_scope):
                continue
            out.append(self._render_single(template, entry_scope, entry_item, volatile))
        return out

    def _render_single(self, template, scope, item, volatile):
        text = _substitute(template.get("text"), scope)
        if template.get("resource_id") in volatile:
            text = "t%d" % self._ticks
        children = []
        bindings: List[Optional[dict]] = [item]
        for child_template in template.get("children", ()):
            for node, sub in self._expand(child_template, scope, item, volatile):
                children.append(node)
                bindings.extend(sub)
        node = make_node(
            view_type=template["type"],
            resource_id=template.get("resource_id"),
            content_desc=_substitute(template.get("content_desc"), scope),
            text=text,
            actionable=template.get("actionable", ()),
            children=children,
            is_group=template.get("group"),
            group_types=self.group_types,
        )
        return node, bindings

    def _resolve_items(self, ref: str, scope: dict):
        if ref.startswith("$item."):
            return scope.get(ref[len("$item."):], [])
        return self._store.get(ref, [])

    def _scalar_store(self) -> dict:
        return {k: v for k, v in self._store.items() if not isinstance(v, dict)}


def load_scenario(path, group_types: frozenset = DEFAULT_GROUP_VIEW_TYPES) -> ScenarioApp:
    """Load and validate a scenario file.

    ``path`` is a filesystem path; a bare name resolves to the bundled
    scenario of that name.
    """
    path = Path(path)
    if not path.exists() and path.suffix != ".json":
        bundled = Path(__file__).parent / "scenarios" / (path.name + ".json")
        if bundled.exists():
            path = bundled
    try:
        spec = json.loads(Path(path).read_text())
    except json.JSONDecodeError as exc:
        raise ScenarioError("scenario parse error: %s" % exc) from exc
    return ScenarioApp(spec, group_types)


def enabled_events(layout: Layout) -> List[EventSpec]:
    """All events fireable on a layout, in preorder; back comes last."""
    events: List[EventSpec] = []
    for node in layout.walk():
        shallow = encode_view(node)
        subtree = encode_view(node, with_subtree=True)
        for action in ("click", "long-click", "scroll"):
            if action in node.actionable:
                events.append(
                    EventSpec(action, shallow, subtree, path_hint=node.node_id)
                )
        if "edit" in node.actionable:
            events.append(
                EventSpec("edit", shallow, subtree, data="input", path_hint=node.node_id)
            )
    events.append(EventSpec("back"))
    return events
