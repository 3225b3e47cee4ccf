"""Command-line interface for the fuzzing pipeline.

Subcommands run successive prefixes of the pipeline (``mine``, ``seeds``),
the full fuzzing loop with JSON artifacts (``fuzz``), the rendered HTML /
PNG / CSV report (``report``), or everything (``run``).  Exit status is 0
for a clean run, 2 when surfaced violations exist, and 1 on error.
"""

from __future__ import annotations

import argparse
import json
import random
import sys
from pathlib import Path
from typing import List, Optional

from .model import mine
from .pipeline import RunConfig, RunResult, build_app, run_pipeline, write_artifacts
from .report import emit_html_report
from .seeds import generate_seeds

EXIT_CLEAN = 0
EXIT_ERROR = 1
EXIT_SURFACED = 2


def _parse_fault(value: str):
    name, sep, state = value.partition("=")
    if not sep or state not in ("on", "off") or not name:
        raise argparse.ArgumentTypeError(
            "expected NAME=on or NAME=off, got %r" % value
        )
    return name, state == "on"


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="viewfuzz",
        description="Metamorphic GUI fuzzing for non-crashing functional bugs.",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    for name, help_text in (
        ("mine", "mine the transitional model and stop"),
        ("seeds", "mine the model and generate seed tests"),
        ("fuzz", "full fuzzing run; write JSON artifacts"),
        ("report", "full fuzzing run; write the rendered report"),
        ("run", "full fuzzing run; write JSON artifacts and rendered report"),
    ):
        p = sub.add_parser(name, help=help_text)
        p.add_argument("--scenario", required=True, help="scenario file or bundled name")
        p.add_argument("--budget", type=int, default=500, help="mining event budget")
        p.add_argument("--seeds", type=int, default=20, dest="num_seeds",
                       help="number of seed tests")
        p.add_argument("--seed-len", type=int, default=15, help="events per seed")
        p.add_argument("--max-mutants", type=int, default=300,
                       help="mutants per pivot position")
        p.add_argument("--max-trace-len", type=int, default=8,
                       help="inserted-trace length bound (inclusive)")
        p.add_argument("--workers", type=int, default=1,
                       help="parallel mutant-execution workers")
        p.add_argument("--rng-seed", type=int, default=0, help="rng seed")
        p.add_argument("--out", default="out", help="output directory")
        p.add_argument("--fault", type=_parse_fault, action="append", default=[],
                       metavar="NAME=on|off", help="toggle a scenario fault")
    return parser


def _config(args: argparse.Namespace) -> RunConfig:
    return RunConfig(
        scenario=args.scenario,
        budget=args.budget,
        num_seeds=args.num_seeds,
        seed_len=args.seed_len,
        max_mutants=args.max_mutants,
        max_trace_len=args.max_trace_len,
        workers=args.workers,
        rng_seed=args.rng_seed,
        out=args.out,
        faults=dict(args.fault),
    )


def _cmd_mine(cfg: RunConfig) -> int:
    app = build_app(cfg)
    model = mine(app, cfg.budget, random.Random(cfg.rng_seed))
    out = Path(cfg.out)
    out.mkdir(parents=True, exist_ok=True)
    (out / "model.json").write_text(model.dump() + "\n")
    print("mined %d states; wrote %s" % (len(model.representatives), out / "model.json"))
    return EXIT_CLEAN


def _cmd_seeds(cfg: RunConfig) -> int:
    app = build_app(cfg)
    rng = random.Random(cfg.rng_seed)
    model = mine(app, cfg.budget, rng)
    seeds = generate_seeds(app, model, rng, cfg.num_seeds, cfg.seed_len)
    out = Path(cfg.out)
    out.mkdir(parents=True, exist_ok=True)
    (out / "model.json").write_text(model.dump() + "\n")
    (out / "seeds.json").write_text(
        json.dumps([s.to_json() for s in seeds], indent=2, sort_keys=True) + "\n"
    )
    print("generated %d seeds; wrote %s" % (len(seeds), out / "seeds.json"))
    return EXIT_CLEAN


def _finish(result: RunResult) -> int:
    print(json.dumps(result.summary, indent=2, sort_keys=True))
    return EXIT_SURFACED if result.summary["surfaced"] > 0 else EXIT_CLEAN


def _cmd_fuzz(cfg: RunConfig) -> int:
    result = run_pipeline(cfg)
    write_artifacts(result, cfg.out)
    return _finish(result)


def _cmd_report(cfg: RunConfig) -> int:
    result = run_pipeline(cfg)
    emit_html_report(result, cfg.out)
    return _finish(result)


def _cmd_run(cfg: RunConfig) -> int:
    result = run_pipeline(cfg)
    write_artifacts(result, cfg.out)
    emit_html_report(result, cfg.out)
    return _finish(result)


_COMMANDS = {
    "mine": _cmd_mine,
    "seeds": _cmd_seeds,
    "fuzz": _cmd_fuzz,
    "report": _cmd_report,
    "run": _cmd_run,
}


def main(argv: Optional[List[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        cfg = _config(args)
        return _COMMANDS[args.command](cfg)
    except Exception as exc:  # surface any stage failure as exit 1
        print("error: %s" % exc, file=sys.stderr)
        return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())
