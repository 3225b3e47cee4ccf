"""View encodings, abstraction, layout equivalence, and view location."""

import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import layout, random_tree, tree
from viewfuzz.gui import (
    BackgroundLayoutError,
    Layout,
    abstract_layout,
    dump_layout,
    encode_view,
    equivalent_with,
    layout_from_json,
    layout_to_json,
    levenshtein,
    load_layout,
    locate_by_encoding,
    number_preorder,
    similar_layout_type,
    strip_text,
)

BACKGROUND = Layout(screen_id="", root=None, foreground=False)


# ── encodings ────────────────────────────────────────────────────────────────


def test_encode_view_shallow_fixture():
    w = layout(tree("Button", rid="ok", cdesc="confirm", text="OK")).root
    assert encode_view(w) == "Button|ok|confirm|OK"


def test_encode_view_empty_fields():
    w = layout(tree("TextView")).root
    assert encode_view(w) == "TextView|||"


def test_encode_view_subtree_fixture():
    root = layout(
        tree("LinearLayout", tree("Button", text="A"), rid="box")
    ).root
    # depth-prefixed preorder below the root, hand-assembled
    assert encode_view(root, with_subtree=True) == (
        "LinearLayout|box||\n1>Button|||A"
    )


def test_encode_view_subtree_depths():
    root = layout(tree("A", tree("B", tree("C")), tree("D"))).root
    assert encode_view(root, with_subtree=True).split("\n") == [
        "A|||",
        "1>B|||",
        "2>C|||",
        "1>D|||",
    ]


def test_strip_text():
    assert strip_text("Button|ok|confirm|OK") == "Button|ok|confirm"
    assert strip_text("Button|ok|confirm|OK\n1>X|||") == "Button|ok|confirm"


# ── levenshtein ──────────────────────────────────────────────────────────────


def test_levenshtein_fixtures():
    # hand-checked distances
    assert levenshtein("", "") == 0
    assert levenshtein("abc", "abc") == 0
    assert levenshtein("kitten", "sitting") == 3
    assert levenshtein("abc", "") == 3
    assert levenshtein("ab", "ba") == 2


@given(st.text(max_size=8), st.text(max_size=8), st.text(max_size=8))
@settings(max_examples=100, deadline=None)
def test_levenshtein_metric_properties(a, b, c):
    assert levenshtein(a, b) == levenshtein(b, a)
    assert (levenshtein(a, b) == 0) == (a == b)
    assert levenshtein(a, c) <= levenshtein(a, b) + levenshtein(b, c)


# ── abstraction ──────────────────────────────────────────────────────────────


def test_abstract_layout_ignores_text():
    l1 = layout(tree("TextView", rid="t", text="hello"))
    l2 = layout(tree("TextView", rid="t", text="world"))
    assert abstract_layout(l1) == abstract_layout(l2)


def test_abstract_layout_sees_content_desc():
    l1 = layout(tree("TextView", rid="t", cdesc="a"))
    l2 = layout(tree("TextView", rid="t", cdesc="b"))
    assert abstract_layout(l1) != abstract_layout(l2)


def test_abstract_layout_background_raises():
    with pytest.raises(BackgroundLayoutError):
        abstract_layout(BACKGROUND)


def test_set_collapse_one_vs_many_identical_children():
    one = layout(tree("ListView", tree("TextView", rid="row")))
    three = layout(
        tree(
            "ListView",
            tree("TextView", rid="row"),
            tree("TextView", rid="row"),
            tree("TextView", rid="row"),
        )
    )
    assert equivalent_with(one, three)


def test_equivalence_background_cases():
    fg = layout(tree("TextView"))
    assert equivalent_with(BACKGROUND, BACKGROUND)
    assert not equivalent_with(fg, BACKGROUND)


def _random_layouts(count):
    rng = random.Random(7)
    return [
        Layout(screen_id="s%d" % rng.randint(0, 2), root=random_tree(rng, 6))
        for _ in range(count)
    ]


def test_equivalence_relation_laws_500_layouts():
    layouts = _random_layouts(500)
    rng = random.Random(11)
    for l in layouts:
        assert equivalent_with(l, l)
    for _ in range(2000):
        a, b, c = rng.choice(layouts), rng.choice(layouts), rng.choice(layouts)
        assert equivalent_with(a, b) == equivalent_with(b, a)
        if equivalent_with(a, b) and equivalent_with(b, c):
            assert equivalent_with(a, c)


def test_similar_layout_type_uses_screen_tag():
    a = Layout(screen_id="main", root=number_preorder(tree("A")))
    b = Layout(screen_id="main", root=number_preorder(tree("B")))
    c = Layout(screen_id="other", root=number_preorder(tree("A")))
    assert similar_layout_type(a, b)
    assert not similar_layout_type(a, c)
    assert not similar_layout_type(a, BACKGROUND)


# ── view location ────────────────────────────────────────────────────────────


def test_locate_exact_match_required():
    l = layout(tree("FrameLayout", tree("Button", rid="x", text="Go")))
    assert locate_by_encoding("Button|x||Go", None, l) is not None
    # text differs -> no candidate at all
    assert locate_by_encoding("Button|x||Stop", None, l) is None


def test_locate_subtree_tiebreak():
    l = layout(
        tree(
            "FrameLayout",
            tree("LinearLayout", tree("TextView", text="other"), rid="row"),
            tree("LinearLayout", tree("TextView", text="inner"), rid="row"),
        )
    )
    wanted_subtree = "LinearLayout|row||\n1>TextView|||inner"
    found = locate_by_encoding("LinearLayout|row||", wanted_subtree, l)
    assert found is not None
    assert [c.text for c in found.children] == ["inner"]


def test_locate_tie_goes_to_first_preorder():
    l = layout(
        tree(
            "FrameLayout",
            tree("Button", rid="b", text="Hi"),
            tree("Button", rid="b", text="Hi"),
        )
    )
    found = locate_by_encoding("Button|b||Hi", "Button|b||Hi", l)
    assert found.node_id == min(
        w.node_id for w in l.walk() if w.resource_id == "b"
    )


def test_locate_on_background_is_none():
    assert locate_by_encoding("Button|||", None, BACKGROUND) is None


# ── serialization ────────────────────────────────────────────────────────────


def test_layout_json_roundtrip_random():
    rng = random.Random(3)
    for _ in range(50):
        l = Layout(screen_id="s", root=random_tree(rng, 8))
        back = layout_from_json(layout_to_json(l))
        assert dump_layout(back) == dump_layout(l)
        assert [encode_view(w) for w in back.walk()] == [
            encode_view(w) for w in l.walk()
        ]


def test_dump_load_roundtrip_text():
    l = layout(tree("FrameLayout", tree("Button", rid="x", text="Go")))
    assert dump_layout(load_layout(dump_layout(l))) == dump_layout(l)
