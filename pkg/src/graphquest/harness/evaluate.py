"""Batch evaluation: run many questions, score them, tally cost."""

from __future__ import annotations

import dataclasses
import json
import logging
import re
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from pathlib import Path

from ..llm.accounting import usage_total
from ..planner.engine import Backends, Planner, PlannerRunError
from ..planner.state import AblationFlags, PlannerConfig, Question
from ..trace import RunTrace
from .datasets import DatasetRecord
from .metrics import hits_at_1

logger = logging.getLogger(__name__)

_SAFE_NAME = re.compile(r"[^A-Za-z0-9._-]+")

SUMMARY_COLUMNS = ("Method", "Hits@1", "LLM Call", "Input Token",
                   "Output Token", "Total Token", "Time (s)")


class HarnessError(ValueError):
    pass


@dataclass(frozen=True)
class QuestionResult:
    id: str
    question: str
    predicted: str
    correct: bool
    llm_calls: int
    input_tokens: int
    output_tokens: int
    seconds: float
    iterations: int
    error: str | None = None

    @property
    def total_tokens(self) -> int:
        return self.input_tokens + self.output_tokens


@dataclass
class EvalReport:
    name: str
    results: list[QuestionResult]

    @property
    def hits_at_1(self) -> float:
        if not self.results:
            return 0.0
        return sum(1 for r in self.results if r.correct) / len(self.results)

    def aggregates(self) -> dict:
        count = len(self.results)
        totals = {
            "llm_calls": sum(r.llm_calls for r in self.results),
            "input_tokens": sum(r.input_tokens for r in self.results),
            "output_tokens": sum(r.output_tokens for r in self.results),
            "total_tokens": sum(r.total_tokens for r in self.results),
            "seconds": sum(r.seconds for r in self.results),
        }
        means = {f"mean_{key}": (value / count if count else 0.0)
                 for key, value in totals.items()}
        return {
            "questions": count,
            "hits_at_1": self.hits_at_1,
            **{f"total_{key}": value for key, value in totals.items()},
            **means,
        }

    def to_dict(self) -> dict:
        return {
            "name": self.name,
            "aggregates": self.aggregates(),
            "results": [dataclasses.asdict(r) for r in self.results],
        }


def apply_overrides(config: PlannerConfig, overrides: dict) -> PlannerConfig:
    """Produce a config variant; ablation keys land on the flag set."""
    ablation_keys = {"no_guidance", "no_memory", "no_reflection",
                     "fixed_breadth"}
    flag_values = {}
    direct = {}
    for key, value in overrides.items():
        if key in ablation_keys:
            flag_values[key] = value
        elif key == "max_depth":
            direct["max_depth"] = int(value)
        else:
            raise HarnessError(f"unknown config override {key!r}")
    if flag_values:
        direct["ablations"] = dataclasses.replace(
            config.ablations, **flag_values)
    return dataclasses.replace(config, **direct) if direct else config


def _trace_filename(record_id: str) -> str:
    return _SAFE_NAME.sub("_", record_id) or "record"


def _run_record(record: DatasetRecord, config: PlannerConfig,
                backends: Backends) -> tuple[QuestionResult, RunTrace]:
    question = Question(record.question, tuple(record.topic_entities))
    planner = Planner(backends.kg, backends.llm, config,
                      scorer=backends.scorer)
    error: str | None = None
    predicted = ""
    iterations = 0
    try:
        outcome = planner.run(question)
        trace = outcome.trace
        predicted = outcome.verdict.answer or ""
        iterations = outcome.iterations
    except PlannerRunError as exc:
        trace = exc.trace
        error = str(exc)
    if error is None and record.answers:
        correct = hits_at_1(predicted, record.answers)
    else:
        correct = False
        if error is None and not record.answers:
            error = "no gold answers"
    usage, calls = usage_total(trace)
    final = trace.final_event()
    seconds = float(final.payload.get("elapsed_seconds", 0.0)) if final else 0.0
    result = QuestionResult(
        id=record.id,
        question=record.question,
        predicted=predicted,
        correct=correct,
        llm_calls=calls,
        input_tokens=usage.input_tokens,
        output_tokens=usage.output_tokens,
        seconds=seconds,
        iterations=iterations,
        error=error,
    )
    return result, trace


def run_eval(records: list[DatasetRecord], config: PlannerConfig,
             backends: Backends, *, parallelism: int = 1,
             out_dir: str | Path | None = None,
             name: str = "full") -> EvalReport:
    """Evaluate every record; result order always follows input order."""
    if not records:
        raise HarnessError("no records to evaluate")
    if parallelism < 1:
        raise HarnessError(f"parallelism must be >= 1, got {parallelism}")
    trace_dir: Path | None = None
    if out_dir is not None:
        trace_dir = Path(out_dir) / "traces"
        trace_dir.mkdir(parents=True, exist_ok=True)

    def worker(record: DatasetRecord) -> tuple[QuestionResult, RunTrace]:
        return _run_record(record, config, backends)

    if parallelism == 1:
        outcomes = [worker(record) for record in records]
    else:
        with ThreadPoolExecutor(max_workers=parallelism) as pool:
            outcomes = list(pool.map(worker, records))
    results = []
    for record, (result, trace) in zip(records, outcomes):
        results.append(result)
        if trace_dir is not None:
            trace.save(str(trace_dir / f"{_trace_filename(record.id)}.jsonl"))
    report = EvalReport(name=name, results=results)
    if out_dir is not None:
        save_report(report, Path(out_dir) / "report.json")
        write_summary_tsv([report], Path(out_dir) / "summary.tsv")
    return report


def ablation_matrix(records: list[DatasetRecord], base_config: PlannerConfig,
                    variants: list[tuple[str, dict]], backends: Backends, *,
                    parallelism: int = 1,
                    out_dir: str | Path | None = None
                    ) -> list[tuple[str, EvalReport]]:
    """Run the same records once per config variant."""
    if not variants:
        raise HarnessError("no variants to run")
    rows: list[tuple[str, EvalReport]] = []
    for variant_name, overrides in variants:
        config = apply_overrides(base_config, overrides)
        variant_dir = None
        if out_dir is not None:
            variant_dir = Path(out_dir) / _trace_filename(variant_name)
        report = run_eval(records, config, backends,
                          parallelism=parallelism, out_dir=variant_dir,
                          name=variant_name)
        rows.append((variant_name, report))
    if out_dir is not None:
        write_summary_tsv([report for _, report in rows],
                          Path(out_dir) / "summary.tsv")
    return rows


def save_report(report: EvalReport, path: str | Path) -> None:
    with open(path, "w", encoding="utf-8") as handle:
        json.dump(report.to_dict(), handle, ensure_ascii=False, indent=2)
        handle.write("\n")


def summary_rows(reports: list[EvalReport]) -> list[list[str]]:
    rows = [list(SUMMARY_COLUMNS)]
    for report in reports:
        agg = report.aggregates()
        rows.append([
            report.name,
            f"{100.0 * agg['hits_at_1']:.1f}",
            f"{agg['mean_llm_calls']:.1f}",
            f"{agg['mean_input_tokens']:.1f}",
            f"{agg['mean_output_tokens']:.1f}",
            f"{agg['mean_total_tokens']:.1f}",
            f"{agg['mean_seconds']:.1f}",
        ])
    return rows


def write_summary_tsv(reports: list[EvalReport], path: str | Path) -> None:
    with open(path, "w", encoding="utf-8") as handle:
        for row in summary_rows(reports):
            handle.write("\t".join(row))
            handle.write("\n")
