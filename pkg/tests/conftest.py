"""Shared helpers: tree builders and scenario-driving utilities."""

from __future__ import annotations

import random
from pathlib import Path

import pytest

from viewfuzz.gui import Layout, encode_view, make_node, number_preorder
from viewfuzz.harness import EventSpec, ScenarioApp, load_scenario

SCENARIO_DIR = Path(__file__).resolve().parents[1] / "src" / "viewfuzz" / "scenarios"


def scenario_path(name: str) -> str:
    return str(SCENARIO_DIR / (name + ".json"))


def tree(view_type, *children, rid=None, cdesc=None, text=None, actionable=()):
    """Build an unnumbered node; wrap the root with :func:`layout`."""
    return make_node(
        view_type,
        resource_id=rid,
        content_desc=cdesc,
        text=text,
        actionable=actionable,
        children=children,
    )


def layout(root, screen_id="screen"):
    return Layout(screen_id=screen_id, root=number_preorder(root), foreground=True)


def find_view(l: Layout, text=None, rid=None):
    for w in l.walk():
        if text is not None and w.text != text:
            continue
        if rid is not None and w.resource_id != rid:
            continue
        return w
    raise AssertionError("no view with text=%r rid=%r" % (text, rid))


def click_event(l: Layout, text=None, rid=None) -> EventSpec:
    w = find_view(l, text=text, rid=rid)
    return EventSpec(
        "click", encode_view(w), encode_view(w, with_subtree=True), path_hint=w.node_id
    )


def click(app: ScenarioApp, text=None, rid=None) -> Layout:
    return app.fire(click_event(app.layout, text=text, rid=rid))


def random_tree(rng: random.Random, max_nodes: int):
    """Random small view tree over a tiny label alphabet."""
    types = ["A", "B", "C"]
    count = rng.randint(1, max_nodes)

    def build(budget):
        t = rng.choice(types)
        node_budget = budget - 1
        kids = []
        while node_budget > 0 and rng.random() < 0.6:
            size = rng.randint(1, node_budget)
            kids.append(build(size))
            node_budget -= size
        return make_node(t, text=rng.choice(["", "x", "y"]) or None, children=kids)

    return number_preorder(build(count))


@pytest.fixture
def diary_app():
    return load_scenario(scenario_path("diary"))
