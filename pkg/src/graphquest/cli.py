"""Command-line interface: run one question, evaluate a dataset, or
inspect a saved trace."""

from __future__ import annotations

import argparse
import logging
import os
import sys
import time
from pathlib import Path

from .config import (
    AppConfig,
    ConfigError,
    build_app_config,
    build_backends,
    load_config_file,
)
from .harness.datasets import FLAVORS, load_dataset
from .harness.evaluate import ablation_matrix, run_eval, summary_rows
from .llm.accounting import usage_total
from .planner.engine import Planner, PlannerRunError
from .planner.state import Question
from .trace import RunTrace

logger = logging.getLogger(__name__)

ABLATION_NAMES = ("no_guidance", "no_memory", "no_reflection")


def _add_shared_flags(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--config", metavar="PATH",
                        help="flat key=value config file")
    parser.add_argument("--kg", metavar="PATH",
                        help="triple file for the in-memory backend")
    parser.add_argument("--endpoint", metavar="URL",
                        help="SPARQL endpoint URL (remote backend)")
    parser.add_argument("--llm", choices=("scripted", "http"),
                        help="language-model backend kind")
    parser.add_argument("--script", metavar="PATH",
                        help="scripted responder rule file")
    parser.add_argument("--model", metavar="NAME",
                        help="model name for the http backend")
    parser.add_argument("--depth", metavar="N", type=int,
                        help="iteration cap")
    parser.add_argument("--out", metavar="DIR",
                        help="directory that receives run outputs")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="graphquest",
        description=("Answer questions over a knowledge graph with an "
                     "LLM-guided, self-correcting exploration loop."),
        epilog=("API credentials are taken from GRAPHQUEST_API_KEY "
                "(or OPENAI_API_KEY); they are never read from files "
                "or flags."),
    )
    sub = parser.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="answer a single question")
    run.add_argument("--question", required=True, help="question text")
    run.add_argument("--topic", action="append", required=True,
                     metavar="ID=LABEL",
                     help="topic entity, repeatable (e.g. m.0f8l9c=France)")
    _add_shared_flags(run)
    run.set_defaults(handler=cmd_run)

    ev = sub.add_parser("eval", help="evaluate a dataset")
    ev.add_argument("dataset", help="dataset JSON file")
    ev.add_argument("--flavor", choices=FLAVORS, default="normalized",
                    help="dataset layout (default: normalized)")
    ev.add_argument("--ablate", action="append", default=[],
                    metavar="SPEC",
                    help=("ablation variant to add, repeatable: "
                          "no_guidance | no_memory | no_reflection | "
                          "fixed_breadth=N, comma-combinable"))
    ev.add_argument("--parallel", type=int, default=1, metavar="N",
                    help="worker threads (default: 1)")
    _add_shared_flags(ev)
    ev.set_defaults(handler=cmd_eval)

    ins = sub.add_parser("inspect-trace", help="pretty-print a saved trace")
    ins.add_argument("trace", help="trace .jsonl file")
    ins.set_defaults(handler=cmd_inspect)
    return parser


def _overrides_from_flags(args: argparse.Namespace) -> dict[str, str]:
    overrides: dict[str, str] = {}
    if args.kg:
        overrides["kg.mode"] = "memory"
        overrides["kg.path"] = args.kg
    if args.endpoint:
        overrides["kg.mode"] = "sparql"
        overrides["kg.endpoint"] = args.endpoint
    if args.llm:
        overrides["llm.mode"] = args.llm
    if args.script:
        overrides["llm.mode"] = "scripted"
        overrides["llm.script"] = args.script
    if args.model:
        overrides["llm.model"] = args.model
    if args.depth is not None:
        overrides["planner.max_depth"] = str(args.depth)
    if args.out:
        overrides["output.dir"] = args.out
    return overrides


def _assemble(args: argparse.Namespace) -> AppConfig:
    file_values = load_config_file(args.config) if args.config else {}
    return build_app_config(file_values, _overrides_from_flags(args))


def _make_run_dir(root: str) -> Path:
    base = Path(root)
    base.mkdir(parents=True, exist_ok=True)
    stamp = time.strftime("%Y%m%d-%H%M%S")
    run_dir = base / stamp
    serial = 1
    while run_dir.exists():
        run_dir = base / f"{stamp}-{serial}"
        serial += 1
    run_dir.mkdir()
    latest = base / "latest"
    try:
        if latest.is_symlink() or latest.exists():
            latest.unlink()
        os.symlink(run_dir.name, latest)
    except OSError as exc:
        logger.warning("could not refresh latest link: %s", exc)
    return run_dir


def _parse_topics(specs: list[str]) -> tuple[tuple[str, str], ...]:
    topics = []
    for spec in specs:
        if "=" in spec:
            eid, label = spec.split("=", 1)
        else:
            eid, label = spec, spec
        eid = eid.strip()
        label = label.strip()
        if not eid:
            raise ConfigError(f"bad --topic value {spec!r}")
        topics.append((eid, label or eid))
    return tuple(topics)


def _parse_ablation(spec: str) -> tuple[str, dict]:
    overrides: dict = {}
    for part in spec.split(","):
        part = part.strip()
        if part in ABLATION_NAMES:
            overrides[part] = True
        elif part.startswith("fixed_breadth="):
            try:
                overrides["fixed_breadth"] = int(part.split("=", 1)[1])
            except ValueError:
                raise ConfigError(
                    f"bad fixed_breadth value in --ablate {spec!r}") from None
        else:
            raise ConfigError(
                f"unknown --ablate value {part!r}; expected one of "
                f"{ABLATION_NAMES} or fixed_breadth=N")
    if not overrides:
        raise ConfigError(f"empty --ablate value {spec!r}")
    return spec, overrides


def cmd_run(args: argparse.Namespace) -> int:
    app = _assemble(args)
    backends = build_backends(app)
    question = Question(args.question, _parse_topics(args.topic))
    run_dir = _make_run_dir(app.output_dir)
    trace_path = run_dir / "trace.jsonl"
    planner = Planner(backends.kg, backends.llm, app.planner,
                      scorer=backends.scorer)
    try:
        result = planner.run(question)
    except PlannerRunError as exc:
        exc.trace.save(str(trace_path))
        print(f"run failed: {exc}", file=sys.stderr)
        print(f"partial trace: {trace_path}", file=sys.stderr)
        return 1
    result.trace.save(str(trace_path))
    usage, calls = usage_total(result.trace)
    verdict = result.verdict
    print(f"Answer: {verdict.answer if verdict.answer else '(none)'}")
    if verdict.reason:
        print(f"Reason: {verdict.reason}")
    if verdict.forced:
        print("Note: exploration budget exhausted; answer was forced.")
    print(f"Iterations: {result.iterations}")
    print(f"LLM calls: {calls} "
          f"(input {usage.input_tokens} + output {usage.output_tokens} "
          f"= {usage.total_tokens} tokens)")
    print(f"Time: {result.elapsed_seconds:.2f}s")
    print(f"Trace: {trace_path}")
    return 0


def cmd_eval(args: argparse.Namespace) -> int:
    app = _assemble(args)
    backends = build_backends(app)
    records = load_dataset(args.dataset, args.flavor)
    if not records:
        print("dataset has no usable records", file=sys.stderr)
        return 1
    run_dir = _make_run_dir(app.output_dir)
    if args.ablate:
        variants = [("full", {})]
        variants += [_parse_ablation(spec) for spec in args.ablate]
        rows = ablation_matrix(records, app.planner, variants, backends,
                               parallelism=args.parallel, out_dir=run_dir)
        reports = [report for _, report in rows]
    else:
        reports = [run_eval(records, app.planner, backends,
                            parallelism=args.parallel, out_dir=run_dir)]
    table = summary_rows(reports)
    widths = [max(len(row[i]) for row in table) for i in range(len(table[0]))]
    for row in table:
        print("  ".join(cell.ljust(width)
                        for cell, width in zip(row, widths)).rstrip())
    print(f"Outputs: {run_dir}")
    return 0


def cmd_inspect(args: argparse.Namespace) -> int:
    trace = RunTrace.load(args.trace)
    for event in trace.events:
        print(f"{event.seq:4d}  iter {event.iteration}  "
              f"{event.kind:<13} {_summarize(event)}")
    usage, calls = usage_total(trace)
    print(f"-- {len(trace.events)} events, {calls} llm calls, "
          f"{usage.input_tokens} input + {usage.output_tokens} output "
          f"= {usage.total_tokens} tokens")
    return 0


def _clip(text: str, limit: int = 70) -> str:
    flat = " ".join(str(text).split())
    return flat if len(flat) <= limit else flat[:limit - 3] + "..."


def _summarize(event) -> str:
    p = event.payload
    if event.kind == "llm_call":
        cost = ""
        if event.usage:
            cost = (f" [{event.usage.input_tokens}+"
                    f"{event.usage.output_tokens} tok]")
        return f"{p.get('stage')}{cost} -> {_clip(p.get('response', ''))}"
    if event.kind == "kg_query":
        op = p.get("op")
        if op == "relations":
            return (f"relations of {p.get('entity')} "
                    f"({p.get('direction')}): {p.get('count')}")
        if op == "entities":
            return (f"entities via {p.get('relation')} "
                    f"({p.get('direction')}) from {p.get('entity')}: "
                    f"{p.get('count')}")
        return f"label {p.get('entity')} -> {p.get('label')}"
    if event.kind == "selection":
        return f"{p.get('stage')}: {_clip(p.get('selected', p))}"
    if event.kind == "memory_update":
        return (f"paths={p.get('paths')} pool={len(p.get('candidate_pool', []))} "
                f"status={_clip(p.get('status'))}")
    if event.kind == "verdict":
        mark = "sufficient" if p.get("sufficient") else "insufficient"
        forced = " (forced)" if p.get("forced") else ""
        return f"{mark}{forced} answer={p.get('answer')!r}"
    if event.kind == "reflection":
        return f"add={p.get('add')} backtrack={p.get('backtrack')}"
    if event.kind == "final":
        if "error" in p:
            return f"error: {_clip(p['error'])}"
        return (f"answer={p.get('answer')!r} iterations={p.get('iterations')} "
                f"{p.get('elapsed_seconds')}s")
    return _clip(p)


def main(argv: list[str] | None = None) -> int:
    logging.basicConfig(level=os.environ.get("GRAPHQUEST_LOG", "WARNING"))
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.handler(args)
    except ConfigError as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return 2
    except FileNotFoundError as exc:
        print(f"file not found: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    raise SystemExit(main())
