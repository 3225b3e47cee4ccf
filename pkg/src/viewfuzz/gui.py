"""GUI tree data model: view nodes, layouts, abstraction and similarity.

A layout is an ordered tree of typed, attributed view nodes.  Everything
here is immutable after construction and safe to share across workers.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Iterator, Optional

#: Container types whose children are arranged as functionally independent
#: siblings (list/grid style containers).
DEFAULT_GROUP_VIEW_TYPES = frozenset(
    {
        "RecyclerView",
        "ListView",
        "GridView",
        "ViewGroup",
        "RadioGroup",
        "LinearLayout",
        "GridLayout",
    }
)

ACTIONS = ("click", "long-click", "edit", "scroll")


class BackgroundLayoutError(ValueError):
    """Raised when an operation requires a foreground layout ("abstracting-background")."""


class IncomparableLayoutsError(ValueError):
    """Raised when two layouts of different page types are diffed ("incomparable-layouts")."""


@dataclass(frozen=True)
class ViewNode:
    """One GUI view.  ``node_id`` is the preorder index within its layout."""

    node_id: int
    view_type: str
    resource_id: Optional[str] = None
    content_desc: Optional[str] = None
    text: Optional[str] = None
    actionable: frozenset = frozenset()
    is_group: bool = False
    children: tuple = ()

    def walk(self) -> Iterator["ViewNode"]:
        """Yield this node and all descendants in preorder."""
        yield self
        for child in self.children:
            yield from child.walk()

    def size(self) -> int:
        return sum(1 for _ in self.walk())


@dataclass(frozen=True)
class Layout:
    """A runtime GUI page.  ``foreground=False`` means the app left the screen."""

    screen_id: str
    root: Optional[ViewNode]
    foreground: bool = True

    def walk(self) -> Iterator[ViewNode]:
        if self.root is None:
            return
        yield from self.root.walk()

    def node(self, node_id: int) -> ViewNode:
        for w in self.walk():
            if w.node_id == node_id:
                return w
        raise KeyError(node_id)


BACKGROUND = Layout(screen_id="", root=None, foreground=False)


def make_node(
    view_type: str,
    resource_id: Optional[str] = None,
    content_desc: Optional[str] = None,
    text: Optional[str] = None,
    actionable=(),
    children=(),
    is_group: Optional[bool] = None,
    group_types: frozenset = DEFAULT_GROUP_VIEW_TYPES,
) -> ViewNode:
    """Build an unnumbered node; call :func:`number_preorder` on the root."""
    if is_group is None:
        is_group = view_type in group_types
    return ViewNode(
        node_id=-1,
        view_type=view_type,
        resource_id=resource_id,
        content_desc=content_desc,
        text=text,
        actionable=frozenset(actionable),
        is_group=is_group,
        children=tuple(children),
    )


def number_preorder(root: ViewNode) -> ViewNode:
    """Return a copy of the tree with node_ids assigned 0..N-1 in preorder."""
    counter = [0]

    def rebuild(node: ViewNode) -> ViewNode:
        nid = counter[0]
        counter[0] += 1
        kids = tuple(rebuild(c) for c in node.children)
        return ViewNode(
            node_id=nid,
            view_type=node.view_type,
            resource_id=node.resource_id,
            content_desc=node.content_desc,
            text=node.text,
            actionable=node.actionable,
            is_group=node.is_group,
            children=kids,
        )

    return rebuild(root)


# ── Canonical encodings ──────────────────────────────────────────────────────


def encode_view(w: ViewNode, with_subtree: bool = False) -> str:
    """Deterministic canonical string for a view.

    Shallow form is ``type|resource_id|content_desc|text`` with absent fields
    empty.  The subtree form appends every descendant's shallow encoding in
    preorder, prefixed by its depth below ``w``.
    """
    shallow = "|".join(
        (w.view_type, w.resource_id or "", w.content_desc or "", w.text or "")
    )
    if not with_subtree:
        return shallow
    parts = [shallow]
    stack = [(c, 1) for c in reversed(w.children)]
    while stack:
        node, depth = stack.pop()
        parts.append("%d>%s" % (depth, encode_view(node, with_subtree=False)))
        stack.extend((c, depth + 1) for c in reversed(node.children))
    return "\n".join(parts)


def strip_text(encoding: str) -> str:
    """Drop the text segment of a shallow encoding (volatile-view identity)."""
    head = encoding.split("\n", 1)[0]
    return head.rsplit("|", 1)[0]


def levenshtein(a: str, b: str) -> int:
    """Plain Levenshtein distance between two strings."""
    if a == b:
        return 0
    if not a:
        return len(b)
    if not b:
        return len(a)
    prev = list(range(len(b) + 1))
    for i, ca in enumerate(a, start=1):
        cur = [i]
        for j, cb in enumerate(b, start=1):
            cur.append(min(prev[j] + 1, cur[j - 1] + 1, prev[j - 1] + (ca != cb)))
        prev = cur
    return prev[-1]


# ── Abstraction and equivalence ──────────────────────────────────────────────


def abstract_layout(l: Layout) -> frozenset:
    """Set of (view_type, resource_id, content_desc) triples; text is ignored."""
    if not l.foreground:
        raise BackgroundLayoutError("abstracting-background")
    return frozenset((w.view_type, w.resource_id, w.content_desc) for w in l.walk())


def equivalent_with(l1: Layout, l2: Layout) -> bool:
    """Structural equivalence: equal abstract signatures (text excluded)."""
    if not l1.foreground or not l2.foreground:
        return (not l1.foreground) and (not l2.foreground)
    return abstract_layout(l1) == abstract_layout(l2)


def similar_layout_type(l1: Layout, l2: Layout) -> bool:
    """Coarse page-type match: both foreground with the same screen tag."""
    if not l1.foreground or not l2.foreground:
        return False
    return l1.screen_id == l2.screen_id


# ── Similar-view location ────────────────────────────────────────────────────


def locate_similar_view(w: ViewNode, l_prime: Layout) -> Optional[ViewNode]:
    """Find the receiver that ``w``'s event would target on another layout.

    Stage 1 requires an exact shallow-encoding match; stage 2 picks the
    candidate whose subtree encoding is closest by edit distance, ties going
    to the smallest preorder index.
    """
    return locate_by_encoding(
        encode_view(w, with_subtree=False), encode_view(w, with_subtree=True), l_prime
    )


def locate_by_encoding(
    shallow: str, subtree: Optional[str], l_prime: Layout
) -> Optional[ViewNode]:
    if not l_prime.foreground:
        return None
    candidates = [
        n for n in l_prime.walk() if encode_view(n, with_subtree=False) == shallow
    ]
    if not candidates:
        return None
    if len(candidates) == 1 or subtree is None:
        return candidates[0]
    best = None
    best_cost = None
    for cand in candidates:
        cost = levenshtein(subtree, encode_view(cand, with_subtree=True))
        if best_cost is None or cost < best_cost:
            best, best_cost = cand, cost
    return best


# ── Serialization ────────────────────────────────────────────────────────────


def node_to_json(w: ViewNode) -> dict:
    out: dict = {"type": w.view_type}
    if w.resource_id is not None:
        out["resource_id"] = w.resource_id
    if w.content_desc is not None:
        out["content_desc"] = w.content_desc
    if w.text is not None:
        out["text"] = w.text
    if w.is_group:
        out["group"] = True
    if w.actionable:
        out["actionable"] = sorted(w.actionable)
    out["children"] = [node_to_json(c) for c in w.children]
    return out


def node_from_json(data: dict, group_types: frozenset = DEFAULT_GROUP_VIEW_TYPES) -> ViewNode:
    return make_node(
        view_type=data["type"],
        resource_id=data.get("resource_id"),
        content_desc=data.get("content_desc"),
        text=data.get("text"),
        actionable=data.get("actionable", ()),
        children=[node_from_json(c, group_types) for c in data.get("children", ())],
        is_group=data.get("group"),
        group_types=group_types,
    )


def layout_to_json(l: Layout) -> dict:
    out = {"screen_id": l.screen_id, "foreground": l.foreground}
    if l.root is not None:
        out["root"] = node_to_json(l.root)
    return out


def layout_from_json(data: dict, group_types: frozenset = DEFAULT_GROUP_VIEW_TYPES) -> Layout:
    root = data.get("root")
    return Layout(
        screen_id=data["screen_id"],
        root=number_preorder(node_from_json(root, group_types)) if root else None,
        foreground=data["foreground"],
    )


def dump_layout(l: Layout) -> str:
    return json.dumps(layout_to_json(l), indent=2, sort_keys=True)


def load_layout(text: str) -> Layout:
    return layout_from_json(json.loads(text))
