"""Ordered-tree edit distance with script recovery (Zhang–Shasha scheme).

Nodes are labeled by their shallow canonical encoding; unit costs apply to
insert, delete and relabel.  The returned script transforms the first tree
into the second and its length equals the optimal distance.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import List, Optional

from .gui import ViewNode, encode_view

REMOVE = "remove"
INSERT = "insert"
UPDATE = "update"
MATCH = "match"


@dataclass(frozen=True)
class EditOp:
    op: str
    source: Optional[ViewNode] = None  # node in t1 (remove/update/match)
    target: Optional[ViewNode] = None  # node in t2 (insert/update/match)


class _Annotated:
    """Postorder node list, leftmost-leaf-descendant indices and keyroots."""

    def __init__(self, root: ViewNode):
        self.nodes: List[ViewNode] = []
        self.lmds: List[int] = []
        self.labels: List[str] = []
        keyroot_for_lmd = {}

        def visit(node: ViewNode) -> int:
            lmd = None
            for child in node.children:
                child_lmd = visit(child)
                if lmd is None:
                    lmd = child_lmd
            index = len(self.nodes)
            self.nodes.append(node)
            self.labels.append(encode_view(node, with_subtree=False))
            if lmd is None:
                lmd = index
            self.lmds.append(lmd)
            keyroot_for_lmd[lmd] = index
            return lmd

        visit(root)
        self.keyroots = sorted(keyroot_for_lmd.values())


def tree_edit_script(t1: ViewNode, t2: ViewNode):
    """Minimum-cost edit script from ``t1`` to ``t2`` (match ops excluded)."""
    ops, _ = tree_edit_script_with_cost(t1, t2)
    return ops


def tree_edit_distance(t1: ViewNode, t2: ViewNode) -> int:
    return tree_edit_script_with_cost(t1, t2)[1]


def tree_edit_script_with_cost(t1: ViewNode, t2: ViewNode):
    a, b = _Annotated(t1), _Annotated(t2)
    size_a, size_b = len(a.nodes), len(b.nodes)
    treedists = [[0] * size_b for _ in range(size_a)]
    tree_ops: List[List[list]] = [[[] for _ in range(size_b)] for _ in range(size_a)]

    for i in a.keyroots:
        for j in b.keyroots:
            _treedist(a, b, i, j, treedists, tree_ops)

    full = tree_ops[size_a - 1][size_b - 1]
    script = [op for op in full if op.op != MATCH]
    return script, treedists[size_a - 1][size_b - 1]


def _treedist(a: _Annotated, b: _Annotated, i: int, j: int, treedists, tree_ops) -> None:
    al, bl = a.lmds, b.lmds
    an, bn = a.nodes, b.nodes

    m = i - al[i] + 2
    n = j - bl[j] + 2
    ioff = al[i] - 1
    joff = bl[j] - 1

    fd = [[0] * n for _ in range(m)]
    partial: List[List[list]] = [[[] for _ in range(n)] for _ in range(m)]

    for x in range(1, m):
        fd[x][0] = fd[x - 1][0] + 1
        partial[x][0] = partial[x - 1][0] + [EditOp(REMOVE, source=an[x + ioff])]
    for y in range(1, n):
        fd[0][y] = fd[0][y - 1] + 1
        partial[0][y] = partial[0][y - 1] + [EditOp(INSERT, target=bn[y + joff])]

    for x in range(1, m):
        for y in range(1, n):
            node_a = an[x + ioff]
            node_b = bn[y + joff]
            if al[i] == al[x + ioff] and bl[j] == bl[y + joff]:
                # both prefixes are whole trees
                relabel = 0 if a.labels[x + ioff] == b.labels[y + joff] else 1
                costs = (
                    fd[x - 1][y] + 1,
                    fd[x][y - 1] + 1,
                    fd[x - 1][y - 1] + relabel,
                )
                best = min(costs)
                fd[x][y] = best
                if best == costs[2]:
                    op = MATCH if relabel == 0 else UPDATE
                    partial[x][y] = partial[x - 1][y - 1] + [
                        EditOp(op, source=node_a, target=node_b)
                    ]
                elif best == costs[0]:
                    partial[x][y] = partial[x - 1][y] + [EditOp(REMOVE, source=node_a)]
                else:
                    partial[x][y] = partial[x][y - 1] + [EditOp(INSERT, target=node_b)]
                treedists[x + ioff][y + joff] = fd[x][y]
                tree_ops[x + ioff][y + joff] = partial[x][y]
            else:
                p = al[x + ioff] - 1 - ioff
                q = bl[y + joff] - 1 - joff
                costs = (
                    fd[x - 1][y] + 1,
                    fd[x][y - 1] + 1,
                    fd[p][q] + treedists[x + ioff][y + joff],
                )
                best = min(costs)
                fd[x][y] = best
                if best == costs[2]:
                    partial[x][y] = partial[p][q] + tree_ops[x + ioff][y + joff]
                elif best == costs[0]:
                    partial[x][y] = partial[x - 1][y] + [EditOp(REMOVE, source=node_a)]
                else:
                    partial[x][y] = partial[x][y - 1] + [EditOp(INSERT, target=node_b)]


def brute_force_distance(t1: ViewNode, t2: ViewNode) -> int:
    """Exhaustive minimum over all valid ordered-tree edit mappings.

    A mapping is valid iff it preserves both preorder and postorder node
    order; cost is unmapped nodes plus relabels.  Exponential — test oracle
    for small trees only.
    """
    nodes1 = _orders(t1)
    nodes2 = _orders(t2)
    n1, n2 = len(nodes1), len(nodes2)
    best = [n1 + n2]  # empty mapping

    def extend(idx: int, chosen: list, relabels: int) -> None:
        if idx == n1:
            total = relabels + (n1 - len(chosen)) + (n2 - len(chosen))
            if total < best[0]:
                best[0] = total
            return
        if relabels >= best[0]:
            return
        pre1, post1, label1 = nodes1[idx]
        # option: leave nodes1[idx] unmapped
        extend(idx + 1, chosen, relabels)
        for cand in range(n2):
            pre2, post2, label2 = nodes2[cand]
            ok = True
            for (p1, q1, c) in chosen:
                if c == cand:
                    ok = False
                    break
                cpre2, cpost2, _ = nodes2[c]
                if (pre1 > p1) != (pre2 > cpre2) or (post1 > q1) != (post2 > cpost2):
                    ok = False
                    break
            if ok:
                chosen.append((pre1, post1, cand))
                extend(idx + 1, chosen, relabels + (label1 != label2))
                chosen.pop()

    extend(0, [], 0)
    return best[0]


def _orders(root: ViewNode):
    pre = {}
    post = {}
    counter = [0, 0]

    def visit(node: ViewNode) -> None:
        pre[id(node)] = counter[0]
        counter[0] += 1
        for c in node.children:
            visit(c)
        post[id(node)] = counter[1]
        counter[1] += 1

    visit(root)
    return [
        (pre[id(n)], post[id(n)], encode_view(n, with_subtree=False))
        for n in root.walk()
    ]
