"""Loop-trace search, mutant assembly, and replay bookkeeping."""

import random

from conftest import click_event, scenario_path
from viewfuzz.gui import abstract_layout
from viewfuzz.harness import EventSpec, NoReceiverError, load_scenario
from viewfuzz.model import AbstractEvent, mine
from viewfuzz.mutants import (
    EXECUTED,
    SKIPPED,
    UNREPLAYABLE,
    IndependentTrace,
    Mutant,
    PrefixRegistry,
    connect_with,
    execute_mutant,
    generate_mutants,
    search_traces,
    start_transitions,
)
from viewfuzz.seeds import ExecutionTrace, TestCase, execute_test


def _mined_diary(budget=300, seed=0):
    app = load_scenario(scenario_path("diary"))
    return app, mine(app, budget, random.Random(seed))


def _run_seed(app, texts, seed_id="seed-000"):
    events = []
    probe = app.clone()
    for t in texts:
        e = click_event(probe.layout, text=t)
        events.append(e)
        probe.fire(e)
    return execute_test(app.clone(), TestCase(seed_id=seed_id, events=events))


def _text_of(receiver):
    parts = (receiver or "").split("\n")[0].split("|")
    return parts[3] if len(parts) > 3 else ""


def _texts(trace):
    return [_text_of(e.receiver) for e in trace.events]


PHOTO_CINEMA = ["Cinema", "Camera:Cinema", "Shutter"]


# ── trace search ─────────────────────────────────────────────────────────────


def test_search_finds_camera_loop_at_pictured_pivot():
    """At a main pivot with Cinema pictured, the four-event camera loop on a
    sibling activity (photograph it, come back) is found within bound 4."""
    app, model = _mined_diary(seed=1)
    seed = _run_seed(app, PHOTO_CINEMA)
    pivot = 3  # main screen, Cinema active with its picture showing
    traces = search_traces(
        model, seed.layouts[pivot], seed.active[pivot], random.Random(0), 4, 200
    )
    triggers = [
        t
        for t in traces
        if len(t.events) == 4
        and _texts(t)[0] in ("Sleeping", "Cleaning")
        and _texts(t)[1] == "Camera:%s" % _texts(t)[0]
        and _texts(t)[2] == "Shutter"
        and _texts(t)[3] == "Cinema*"
    ]
    assert triggers


def test_length_bound_is_inclusive_and_tight():
    app, model = _mined_diary()
    seed = _run_seed(app, PHOTO_CINEMA)
    pivot = 3

    def lengths(bound):
        traces = search_traces(
            model, seed.layouts[pivot], seed.active[pivot],
            random.Random(0), bound, 500,
        )
        return [len(t.events) for t in traces]

    assert max(lengths(4)) == 4  # bound itself is admitted
    assert all(n <= 3 for n in lengths(3))
    # the camera loop needs all four events, so bound 3 loses every Shutter
    traces3 = search_traces(
        model, seed.layouts[pivot], seed.active[pivot], random.Random(0), 3, 500
    )
    assert not [t for t in traces3 if "Shutter" in _texts(t)]


def test_replayable_traces_loop_back_to_pivot_state():
    """Every searched trace that replays ends in the pivot state.

    Traces built from stale-text receivers (the model abstracts text away)
    simply fail to replay; those become unreplayable mutants downstream.
    """
    app, model = _mined_diary()
    seed = _run_seed(app, PHOTO_CINEMA)
    pivot = 3
    pivot_sig = abstract_layout(seed.layouts[pivot])
    traces = search_traces(
        model, seed.layouts[pivot], seed.active[pivot], random.Random(3), 4, 50
    )
    assert traces
    replayed = 0
    for t in traces:
        instance = app.clone()
        instance.reset()
        for e in seed.test.events:
            instance.fire(e)
        try:
            for e in t.to_event_specs():
                instance.fire(e)
        except NoReceiverError:
            continue
        replayed += 1
        assert abstract_layout(instance.layout) == pivot_sig
    assert replayed > 0


def test_start_excludes_active_view():
    app, model = _mined_diary()
    seed = _run_seed(app, ["Cinema", "Nav.", "Nav."])
    pivot = 3  # back on main; Cinema is the list's active member
    starts = start_transitions(
        model, seed.layouts[pivot], seed.active[pivot], random.Random(0)
    )
    start_texts = {_text_of(e.receiver) for e, _ in starts}
    assert "Cinema" not in start_texts  # the active activity button
    assert "Sleeping" in start_texts or "Cleaning" in start_texts


def test_start_excludes_non_independent_views():
    app, model = _mined_diary()
    seed = _run_seed(app, PHOTO_CINEMA + ["Nav."])
    pivot = 4  # diary screen; the lone pic inside its entry is not independent
    starts = start_transitions(
        model, seed.layouts[pivot], seed.active[pivot], random.Random(0)
    )
    start_texts = {_text_of(e.receiver) for e, _ in starts}
    assert "pic_Cinema" not in start_texts


def test_search_respects_max_num():
    app, model = _mined_diary()
    seed = _run_seed(app, PHOTO_CINEMA)
    traces = search_traces(
        model, seed.layouts[3], seed.active[3], random.Random(0), 4, 2
    )
    assert len(traces) == 2


def test_search_is_deterministic():
    def run():
        app, model = _mined_diary()
        seed = _run_seed(app, PHOTO_CINEMA)
        traces = search_traces(
            model, seed.layouts[3], seed.active[3], random.Random(9), 4, 100
        )
        return [[e.key() for e in t.events] for t in traces]

    assert run() == run()


# ── connecting the seed remainder ────────────────────────────────────────────


def test_connect_trailing_pivot_always_ok():
    app, model = _mined_diary()
    seed = _run_seed(app, ["Cinema"])
    trace = IndependentTrace(events=(AbstractEvent("click", "Button|nav||Nav."),))
    assert connect_with(model, seed, len(seed.test.events), trace)


def test_connect_fails_when_resume_receiver_missing():
    app, model = _mined_diary()
    seed = _run_seed(app, ["Cinema", "Nav."])
    ghost = EventSpec("click", "Button|ghost||Nope", "Button|ghost||Nope")
    fake = ExecutionTrace(
        test=TestCase(seed_id="s", events=[seed.test.events[0], ghost]),
        layouts=seed.layouts,
        active=seed.active,
    )
    trace = IndependentTrace(events=(AbstractEvent("click", "Button|nav||Nav."),))
    assert not connect_with(model, fake, 1, trace)
    assert connect_with(model, seed, 1, trace)


def test_connect_back_resume_needs_no_receiver():
    app, model = _mined_diary()
    seed = _run_seed(app, ["Cinema"])
    fake = ExecutionTrace(
        test=TestCase(seed_id="s", events=[EventSpec("back")]),
        layouts=seed.layouts[:2],
        active=seed.active[:2],
    )
    trace = IndependentTrace(events=(AbstractEvent("click", "Button|nav||Nav."),))
    assert connect_with(model, fake, 0, trace)


# ── mutant assembly ──────────────────────────────────────────────────────────


def test_generate_mutants_ids_and_shape():
    app, model = _mined_diary()
    seed = _run_seed(app, PHOTO_CINEMA)
    mutants = generate_mutants(model, seed, random.Random(0), 4, 20)
    assert mutants
    for m in mutants:
        assert m.seed_id == "seed-000"
        assert m.mutant_id.startswith("seed-000-p")
        assert 0 <= m.insert_pos <= len(seed.test.events)
        inserted = m.test.events[
            m.insert_pos : m.insert_pos + len(m.trace.events)
        ]
        assert [AbstractEvent.of(e) for e in inserted] == list(m.trace.events)
        assert m.test.events[: m.insert_pos] == seed.test.events[: m.insert_pos]
        assert m.test.events[m.insert_pos + len(m.trace.events) :] == (
            seed.test.events[m.insert_pos :]
        )
    assert len({m.mutant_id for m in mutants}) == len(mutants)


def test_generate_mutants_deterministic():
    def run():
        app, model = _mined_diary()
        seed = _run_seed(app, PHOTO_CINEMA)
        mutants = generate_mutants(model, seed, random.Random(2), 4, 30)
        return [m.to_json() for m in mutants]

    assert run() == run()


# ── execution, prefix registry ───────────────────────────────────────────────


def test_prefix_registry_covers_extensions():
    reg = PrefixRegistry()
    a = AbstractEvent("click", "Button|a||A")
    b = AbstractEvent("click", "Button|b||B")
    reg.register("s", 2, [a])
    assert reg.covers("s", 2, IndependentTrace(events=(a,)))
    assert reg.covers("s", 2, IndependentTrace(events=(a, b)))
    assert not reg.covers("s", 2, IndependentTrace(events=(b, a)))
    assert not reg.covers("s", 3, IndependentTrace(events=(a,)))
    assert not reg.covers("other", 2, IndependentTrace(events=(a,)))


def _ghost_mutant(seed, pos, extra=(), mid="m0"):
    ghost = AbstractEvent("click", "Button|ghost||Nope")
    events = (ghost,) + tuple(extra)
    trace = IndependentTrace(events=events)
    test = TestCase(
        seed_id=mid,
        events=list(seed.test.events[:pos])
        + trace.to_event_specs()
        + list(seed.test.events[pos:]),
    )
    return Mutant(
        mutant_id=mid, seed_id=seed.test.seed_id, insert_pos=pos,
        trace=trace, test=test,
    )


def test_execute_mutant_marks_unreplayable_and_registers_prefix():
    app, _ = _mined_diary(budget=50)
    seed = _run_seed(app, ["Cinema", "Nav."])
    reg = PrefixRegistry()
    m1 = execute_mutant(app, _ghost_mutant(seed, 1), reg)
    assert m1.status == UNREPLAYABLE
    assert len(m1.layouts) == 2  # prefix fired, ghost did not
    # a second mutant extending the failed prefix is skipped unexecuted
    nav = AbstractEvent("click", "Button|nav||Nav.")
    m2 = execute_mutant(app, _ghost_mutant(seed, 1, extra=(nav,), mid="m1"), reg)
    assert m2.status == SKIPPED
    assert m2.layouts is None
    # same trace at another pivot is not covered
    m3 = execute_mutant(app, _ghost_mutant(seed, 0, mid="m2"), reg)
    assert m3.status == UNREPLAYABLE


def test_execute_mutant_success_records_all_layouts():
    app, model = _mined_diary()
    seed = _run_seed(app, PHOTO_CINEMA)
    mutants = generate_mutants(model, seed, random.Random(0), 4, 10)
    m = execute_mutant(app, mutants[0])
    assert m.status == EXECUTED
    assert len(m.layouts) == len(m.test.events) + 1
