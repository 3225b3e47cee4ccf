"""End-to-end fuzzing pipeline: mine, seed, mutate, check, reduce, persist.

Artifacts are plain JSON files; with a single worker and a fixed rng seed
every run is byte-identical.  Mutant execution is the only parallel stage;
each worker owns an isolated app instance.
"""

from __future__ import annotations

import json
import random
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Dict, List, Optional, Sequence, Set

from .gui import DEFAULT_GROUP_VIEW_TYPES, dump_layout
from .harness import ScenarioApp, load_scenario
from .model import TransitionalModel, mine
from .mutants import (
    EXECUTED,
    SKIPPED,
    UNREPLAYABLE,
    Mutant,
    PrefixRegistry,
    execute_mutant,
    generate_mutants,
)
from .oracle import BugReport, Violation, check, dedup_and_rank, filter_pivot_return
from .seeds import (
    DEFAULT_MOTIF_TEXTS,
    ExecutionTrace,
    detect_volatile_views,
    generate_seeds,
)


@dataclass
class RunConfig:
    """All knobs of one pipeline run; defaults match the reference setup."""

    scenario: str
    budget: int = 500
    num_seeds: int = 20
    seed_len: int = 15
    max_mutants: int = 300
    max_trace_len: int = 8  # inclusive bound on inserted-trace length
    workers: int = 1
    rng_seed: int = 0
    motif_texts: Sequence[str] = DEFAULT_MOTIF_TEXTS
    motif_multiplier: float = 3.0
    group_types: frozenset = DEFAULT_GROUP_VIEW_TYPES
    out: str = "out"
    faults: Dict[str, bool] = field(default_factory=dict)
    volatile_filter: bool = True

    def __post_init__(self):
        for name, value in (
            ("budget", self.budget),
            ("num_seeds", self.num_seeds),
            ("seed_len", self.seed_len),
            ("max_mutants", self.max_mutants),
            ("max_trace_len", self.max_trace_len),
            ("workers", self.workers),
        ):
            if value <= 0:
                raise ValueError("%s must be positive" % name)


@dataclass
class RunResult:
    config: RunConfig
    model: TransitionalModel
    seeds: List[ExecutionTrace]
    mutants: List[Mutant]
    reports: List[BugReport]
    summary: dict


def _stage(name: str):
    """Decorator-free stage guard: re-raise with a stage tag."""

    class _Ctx:
        def __enter__(self):
            return self

        def __exit__(self, exc_type, exc, tb):
            if exc is not None and not isinstance(exc, _StageError):
                raise _StageError("stage '%s' failed: %s" % (name, exc)) from exc
            return False

    return _Ctx()


class _StageError(RuntimeError):
    pass


def build_app(cfg: RunConfig) -> ScenarioApp:
    app = load_scenario(cfg.scenario, cfg.group_types)
    for name, enabled in cfg.faults.items():
        app.set_fault(name, enabled)
    return app


def run_pipeline(cfg: RunConfig) -> RunResult:
    rng = random.Random(cfg.rng_seed)
    app = build_app(cfg)

    with _stage("mine"):
        model = mine(app, cfg.budget, rng)

    with _stage("seeds"):
        seeds = generate_seeds(
            app,
            model,
            rng,
            cfg.num_seeds,
            cfg.seed_len,
            cfg.motif_texts,
            cfg.motif_multiplier,
        )
        volatile: Dict[str, Set[str]] = {}
        for seed in seeds:
            volatile[seed.test.seed_id] = (
                detect_volatile_views(app.clone(), seed.test)
                if cfg.volatile_filter
                else set()
            )

    with _stage("mutants"):
        mutants: List[Mutant] = []
        for seed in seeds:
            mutants.extend(
                generate_mutants(model, seed, rng, cfg.max_trace_len, cfg.max_mutants)
            )
        registry = PrefixRegistry()
        if cfg.workers <= 1:
            for m in mutants:
                execute_mutant(app, m, registry)
        else:
            with ThreadPoolExecutor(max_workers=cfg.workers) as pool:
                list(pool.map(lambda m: execute_mutant(app, m, registry), mutants))

    with _stage("oracle"):
        by_seed = {s.test.seed_id: s for s in seeds}
        violations: List[Violation] = []
        for m in mutants:
            if m.status != EXECUTED:
                continue
            seed = by_seed[m.seed_id]
            trace_len = len(m.trace.events)
            pivot = seed.layouts[m.insert_pos]
            trace_end = m.layouts[m.insert_pos + trace_len]
            if not filter_pivot_return(pivot, trace_end):
                m.filtered = True
                continue
            found = check(
                seed,
                m.layouts,
                m.insert_pos,
                trace_len,
                volatile[m.seed_id],
                mutant_id=m.mutant_id,
            )
            per_key: Dict[str, Violation] = {}
            for v in found:
                per_key.setdefault(v.canonical_key, v)
            violations.extend(per_key[k] for k in sorted(per_key))
        reports = dedup_and_rank(violations)

    summary = {
        "scenario": app.name,
        "rng_seed": cfg.rng_seed,
        "generated": len(mutants),
        "executed": sum(1 for m in mutants if m.status == EXECUTED),
        "unreplayable": sum(1 for m in mutants if m.status == UNREPLAYABLE),
        "skipped": sum(1 for m in mutants if m.status == SKIPPED),
        "filtered": sum(1 for m in mutants if m.filtered),
        "error_mutants": len(violations),
        "distinct": len(reports),
        "surfaced": sum(1 for r in reports if r.surfaced),
    }
    return RunResult(
        config=cfg,
        model=model,
        seeds=seeds,
        mutants=mutants,
        reports=reports,
        summary=summary,
    )


# ── artifact persistence ─────────────────────────────────────────────────────


def write_artifacts(result: RunResult, outdir) -> None:
    out = Path(outdir)
    out.mkdir(parents=True, exist_ok=True)
    (out / "model.json").write_text(result.model.dump() + "\n")
    seeds_json = [s.to_json() for s in result.seeds]
    (out / "seeds.json").write_text(
        json.dumps(seeds_json, indent=2, sort_keys=True) + "\n"
    )
    with (out / "mutants.jsonl").open("w") as fh:
        for m in result.mutants:
            fh.write(json.dumps(m.to_json(), sort_keys=True) + "\n")
    _write_snapshots(result, out)
    reports_json = [r.to_json() for r in result.reports]
    (out / "reports.json").write_text(
        json.dumps(reports_json, indent=2, sort_keys=True) + "\n"
    )
    (out / "summary.json").write_text(
        json.dumps(result.summary, indent=2, sort_keys=True) + "\n"
    )


def _write_snapshots(result: RunResult, out: Path) -> None:
    """Layout sequences for every seed and for surfaced exemplar mutants."""
    snapdir = out / "snapshots"
    snapdir.mkdir(exist_ok=True)
    by_id = {m.mutant_id: m for m in result.mutants}
    for seed in result.seeds:
        _dump_sequence(snapdir / seed.test.seed_id, seed.layouts)
    for report in result.reports:
        if not report.surfaced:
            continue
        seed_dir = snapdir / report.exemplar.seed_id
        seed = next(
            s for s in result.seeds if s.test.seed_id == report.exemplar.seed_id
        )
        report.seed_snapshots = _sequence_paths(out, seed_dir, len(seed.layouts))
        mutant = by_id[report.exemplar.mutant_id]
        if mutant.layouts is not None:
            mdir = snapdir / mutant.mutant_id
            _dump_sequence(mdir, mutant.layouts)
            report.mutant_snapshots = _sequence_paths(out, mdir, len(mutant.layouts))


def _dump_sequence(directory: Path, layouts) -> None:
    directory.mkdir(parents=True, exist_ok=True)
    for i, layout in enumerate(layouts):
        (directory / ("L%02d.json" % i)).write_text(dump_layout(layout) + "\n")


def _sequence_paths(out: Path, directory: Path, count: int) -> List[str]:
    return [str((directory / ("L%02d.json" % i)).relative_to(out)) for i in range(count)]
