"""Static HTML bug-report pages, occurrence chart, and CSV summary.

Each surfaced report becomes one self-contained HTML page that aligns the
seed and mutant layout sequences side by side, boxes the inserted-trace
region, and highlights the witness views and every divergence between the
aligned columns.  An index page links the report pages, a bar chart of
per-key occurrences is rendered to PNG, and the run counters plus the
per-key table are written as CSV.  Output is byte-identical across
regenerations from the same run.
"""

from __future__ import annotations

import csv
import html
import io
from pathlib import Path
from typing import Dict, List, Optional, Sequence

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt

from .gui import Layout, ViewNode, encode_view
from .mutants import Mutant
from .oracle import BugReport, short_label
from .pipeline import RunResult
from .seeds import ExecutionTrace

_CSS = """
body { font-family: sans-serif; margin: 1.5em; background: #fafafa; }
h1 { font-size: 1.3em; }
table.columns { border-collapse: collapse; }
table.columns > tbody > tr > td { vertical-align: top; padding: 4px 10px; }
.cell { border: 1px solid #ccc; border-radius: 4px; background: #fff;
        padding: 4px 8px; margin: 3px 0; min-width: 22em; }
.cell h3 { margin: 0 0 4px 0; font-size: 0.85em; color: #555; }
.cell ul { margin: 0; padding-left: 1.1em; list-style: none; }
.cell li { font-family: monospace; font-size: 0.8em; white-space: nowrap; }
.inserted { border: 2px solid #d97706; background: #fff7ed; }
.pair { border: 2px solid #2563eb; }
.witness { background: #fecaca; font-weight: bold; }
.extra { background: #d1fae5; }
.removed { color: #b91c1c; text-decoration: line-through; }
.chip { display: inline-block; font-family: monospace; background: #fee2e2;
        border: 1px solid #ef4444; border-radius: 3px; padding: 1px 6px;
        margin: 2px; font-size: 0.85em; }
.meta { color: #555; font-size: 0.9em; }
"""


# ── layout cell rendering ────────────────────────────────────────────────────


def _node_label(w: ViewNode) -> str:
    bits = [w.view_type]
    if w.resource_id:
        bits.append("#" + w.resource_id)
    if w.content_desc:
        bits.append("(%s)" % w.content_desc)
    if w.text:
        bits.append("%r" % w.text)
    return " ".join(bits)


def _shallow(w: ViewNode) -> str:
    return encode_view(w)


def _render_tree(
    layout: Layout, witness_encodings: frozenset, ghost: Sequence[str]
) -> str:
    """Nested list for one layout; witness views and removed ghosts marked."""
    lines: List[str] = ["<ul>"]

    def emit(w: ViewNode, depth: int) -> None:
        classes = []
        if _shallow(w) in witness_encodings:
            classes.append("witness")
        cls = ' class="%s"' % " ".join(classes) if classes else ""
        pad = "&nbsp;" * (2 * depth)
        lines.append("<li%s>%s%s</li>" % (cls, pad, html.escape(_node_label(w))))
        for child in w.children:
            emit(child, depth + 1)

    if layout.root is not None:
        emit(layout.root, 0)
    else:
        lines.append("<li><em>(background)</em></li>")
    for enc in ghost:
        label = short_label(enc)
        lines.append(
            '<li class="removed">&#8998; %s</li>' % html.escape(label or enc)
        )
    lines.append("</ul>")
    return "\n".join(lines)


def _ghosts(prev: Optional[Layout], cur: Layout) -> List[str]:
    """Shallow encodings present in ``prev`` but gone from ``cur``."""
    if prev is None or prev.root is None or cur.root is None:
        return []
    remaining: Dict[str, int] = {}
    for w in prev.walk():
        enc = _shallow(w)
        remaining[enc] = remaining.get(enc, 0) + 1
    for w in cur.walk():
        enc = _shallow(w)
        if remaining.get(enc, 0) > 0:
            remaining[enc] -= 1
    return sorted(enc for enc, n in remaining.items() if n > 0 for _ in range(n))


def _cell(
    title: str,
    layout: Layout,
    witness_encodings: frozenset,
    ghost: Sequence[str],
    classes: Sequence[str],
) -> str:
    cls = " ".join(["cell"] + list(classes))
    return '<div class="%s"><h3>%s</h3>%s</div>' % (
        cls,
        html.escape(title),
        _render_tree(layout, witness_encodings, ghost),
    )


# ── report pages ─────────────────────────────────────────────────────────────


def _witness_encodings(report: BugReport) -> frozenset:
    encs = set()
    for left, right in report.exemplar.witness.tuples:
        for enc in (left, right):
            if enc is not None:
                encs.add(enc.split("\n", 1)[0])
    return frozenset(encs)


def _witness_chips(report: BugReport) -> str:
    chips = []
    for t in sorted(report.to_json()["witness"], key=str):
        label = t["op"]
        if "left" in t:
            label += " " + (short_label(t["left"]) or t["left"])
        if "right" in t:
            label += " => " + (short_label(t["right"]) or t["right"])
        chips.append('<span class="chip">%s</span>' % html.escape(label))
    return "".join(chips)


def _column(
    header: str,
    layouts: Sequence[Layout],
    witness_encodings: frozenset,
    pair_indices: frozenset,
    boxed: range,
) -> str:
    cells = [
        _cell(
            "%s L%02d [%s]" % (header, k, layouts[k].screen_id or "background"),
            layouts[k],
            witness_encodings,
            _ghosts(layouts[k - 1] if k > 0 else None, layouts[k]),
            (["inserted"] if k in boxed else [])
            + (["pair"] if k in pair_indices else []),
        )
        for k in range(len(layouts))
    ]
    return "\n".join(cells)


def render_report_page(
    report: BugReport, seed: ExecutionTrace, mutant: Mutant
) -> str:
    """One self-contained HTML page aligning seed and mutant sequences."""
    i, j = report.exemplar.pair
    trace_len = len(mutant.trace.events)
    pivot = mutant.insert_pos

    def mapped(k: int) -> int:
        return k if k <= pivot else k + trace_len

    witness_encodings = _witness_encodings(report)
    seed_col = _column(
        "seed", seed.layouts, witness_encodings, frozenset({i, j}), range(0)
    )
    mutant_col = _column(
        "mutant",
        mutant.layouts or [],
        witness_encodings,
        frozenset({mapped(i), mapped(j)}),
        range(pivot + 1, pivot + trace_len + 1),
    )
    return (
        "<!DOCTYPE html>\n<html><head><meta charset='utf-8'>"
        "<title>%(key)s</title><style>%(css)s</style></head><body>"
        "<h1>Violation %(key)s</h1>"
        "<p class='meta'>seed %(seed)s &middot; mutant %(mutant)s &middot; "
        "pair (%(i)d, %(j)d) &middot; inserted trace of %(tlen)d event(s) "
        "at position %(pivot)d &middot; occurrences %(occ)d</p>"
        "<p>Missing seed effects (witness): %(chips)s</p>"
        "<table class='columns'><tbody><tr><td>%(seedcol)s</td>"
        "<td>%(mutantcol)s</td></tr></tbody></table>"
        "</body></html>\n"
    ) % {
        "key": html.escape(report.canonical_key),
        "css": _CSS,
        "seed": html.escape(report.exemplar.seed_id),
        "mutant": html.escape(report.exemplar.mutant_id),
        "i": i,
        "j": j,
        "tlen": trace_len,
        "pivot": pivot,
        "occ": report.occurrences,
        "chips": _witness_chips(report),
        "seedcol": seed_col,
        "mutantcol": mutant_col,
    }


def render_index(reports: Sequence[BugReport], pages: Sequence[str]) -> str:
    surfaced = [r for r in reports if r.surfaced]
    if not surfaced:
        body = "<p>no violations</p>"
    else:
        items = "".join(
            '<li><a href="%s">%s</a> (occurrences %d)</li>'
            % (html.escape(page), html.escape(r.canonical_key), r.occurrences)
            for r, page in zip(surfaced, pages)
        )
        body = "<ul>%s</ul>" % items
    suppressed = [r for r in reports if not r.surfaced]
    if suppressed:
        body += "<h2>Suppressed (multi-occurrence) keys</h2><ul>%s</ul>" % "".join(
            "<li>%s (occurrences %d)</li>"
            % (html.escape(r.canonical_key), r.occurrences)
            for r in suppressed
        )
    return (
        "<!DOCTYPE html>\n<html><head><meta charset='utf-8'>"
        "<title>Fuzzing report</title><style>%s</style></head><body>"
        "<h1>Fuzzing report</h1>%s</body></html>\n" % (_CSS, body)
    )


# ── chart and CSV ────────────────────────────────────────────────────────────


def render_occurrence_chart(reports: Sequence[BugReport]) -> bytes:
    """Horizontal bar chart of per-key occurrences as PNG bytes."""
    fig, ax = plt.subplots(figsize=(8, max(2, 0.5 * len(reports) + 1)))
    if reports:
        keys = [r.canonical_key for r in reports]
        counts = [r.occurrences for r in reports]
        colors = ["#dc2626" if r.surfaced else "#9ca3af" for r in reports]
        ax.barh(range(len(keys)), counts, color=colors)
        ax.set_yticks(range(len(keys)))
        ax.set_yticklabels(keys, fontsize=7)
        ax.invert_yaxis()
        ax.set_xlabel("occurrences")
        ax.set_title("violations per canonical key (red = surfaced)")
    else:
        ax.set_axis_off()
        ax.text(0.5, 0.5, "no violations", ha="center", va="center")
    fig.tight_layout()
    buf = io.BytesIO()
    fig.savefig(buf, format="png", metadata={"Software": "viewfuzz"})
    plt.close(fig)
    return buf.getvalue()


def write_summary_csv(result: RunResult, path: Path) -> None:
    with path.open("w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(sorted(result.summary))
        writer.writerow(result.summary[k] for k in sorted(result.summary))
        writer.writerow([])
        writer.writerow(["canonical_key", "occurrences", "surfaced"])
        for r in result.reports:
            writer.writerow([r.canonical_key, r.occurrences, r.surfaced])


# ── top-level entry ──────────────────────────────────────────────────────────


def emit_html_report(result: RunResult, outdir) -> List[Path]:
    """Write index, per-surfaced-report pages, occurrence PNG, and CSV."""
    out = Path(outdir)
    out.mkdir(parents=True, exist_ok=True)
    by_seed = {s.test.seed_id: s for s in result.seeds}
    by_mutant = {m.mutant_id: m for m in result.mutants}
    written: List[Path] = []

    surfaced = [r for r in result.reports if r.surfaced]
    pages: List[str] = []
    for n, report in enumerate(surfaced, start=1):
        name = "report-%03d.html" % n
        seed = by_seed[report.exemplar.seed_id]
        mutant = by_mutant[report.exemplar.mutant_id]
        page = render_report_page(report, seed, mutant)
        (out / name).write_text(page)
        written.append(out / name)
        pages.append(name)

    (out / "index.html").write_text(render_index(result.reports, pages))
    written.append(out / "index.html")
    (out / "occurrences.png").write_bytes(render_occurrence_chart(result.reports))
    written.append(out / "occurrences.png")
    write_summary_csv(result, out / "summary.csv")
    written.append(out / "summary.csv")
    return written
