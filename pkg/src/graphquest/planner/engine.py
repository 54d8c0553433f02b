"""The planning loop: explore, remember, evaluate, reflect.

Each iteration expands the frontier one hop (relation selection, then
entity selection), folds the findings into memory, and asks whether the
gathered evidence suffices to answer. When it does not, a reflection
step may re-open entities seen earlier, which is how a run recovers from
a wrong turn instead of deepening it.
"""

from __future__ import annotations

import json
import logging
import re
import time
from dataclasses import dataclass

from ..kg.types import Direction, KGBackend, Triplet
from ..llm.parsing import (
    ParseError,
    extract_json_object,
    normalize_bool,
    parse_json_object,
    parse_list,
)
from ..llm.types import CompletionBackend
from ..prompts import PromptLibrary
from ..recall import Scorer, TrigramScorer, top_k
from ..trace import RunTrace
from .state import (
    Frontier,
    Memory,
    PathStep,
    PlannerConfig,
    Question,
    ReasoningPath,
    ReflectionDecision,
    SubObjectiveStatus,
    SubObjectives,
    Subgraph,
    Verdict,
)

logger = logging.getLogger(__name__)

# Answer strings that mean "not answered yet" (compared case-insensitively).
INSUFFICIENT_ANSWERS = frozenset({"", "unknown", "insufficient", "no"})

_INDEX_RE = re.compile(r"(\d+)")


class PlannerRunError(Exception):
    """A backend failure aborted the run; carries the partial trace."""

    def __init__(self, message: str, trace: RunTrace):
        super().__init__(message)
        self.trace = trace


@dataclass(frozen=True)
class PendingExpansion:
    """A path waiting to be extended over one (relation, direction)."""

    path: ReasoningPath
    relation: str
    direction: Direction


@dataclass
class Backends:
    kg: KGBackend
    llm: CompletionBackend
    scorer: Scorer | None = None


@dataclass
class RunResult:
    verdict: Verdict
    trace: RunTrace
    memory: Memory
    frontier: Frontier
    sub_objectives: SubObjectives
    iterations: int
    elapsed_seconds: float


class Planner:
    """Drives one question at a time; not safe for concurrent runs."""

    def __init__(self, kg: KGBackend, llm: CompletionBackend,
                 config: PlannerConfig | None = None, *,
                 scorer: Scorer | None = None,
                 prompts: PromptLibrary | None = None):
        self.kg = kg
        self.llm = llm
        self.config = config or PlannerConfig()
        self.scorer = scorer or TrigramScorer()
        self.prompts = prompts or PromptLibrary()
        self._labels: dict[str, str] = {}

    # -- entry points ----------------------------------------------------

    def run(self, question: Question) -> RunResult:
        trace = RunTrace()
        started = time.perf_counter()
        try:
            return self._run(question, trace, started)
        except Exception as exc:
            elapsed = time.perf_counter() - started
            trace.record("final", 0, {
                "error": str(exc),
                "elapsed_seconds": round(elapsed, 6),
            })
            raise PlannerRunError(f"run aborted: {exc}", trace) from exc

    def _run(self, question: Question, trace: RunTrace,
             started: float) -> RunResult:
        ablations = self.config.ablations
        self._labels = dict(question.topic_entities)
        objectives = self.decompose(question, trace)
        memory = Memory(
            subgraph=Subgraph(),
            paths=[ReasoningPath(origin=eid)
                   for eid, _ in question.topic_entities],
            status=SubObjectiveStatus.initial(len(objectives.items)),
        )
        frontier = Frontier(
            iteration=0,
            tail_entities=list(question.topic_entities),
            tail_relations=[],
            candidate_pool=dict(question.topic_entities),
        )
        verdict: Verdict | None = None
        iterations = 0
        for depth in range(1, self.config.max_depth + 1):
            iterations = depth
            frontier.iteration = depth
            if ablations.no_memory:
                # keep only what the current iteration discovers
                memory.subgraph = Subgraph()
                frontier.candidate_pool = dict(frontier.tail_entities)
            pending = self.explore_relations(
                question, objectives, frontier, memory, trace)
            new_paths = self.explore_entities(
                question, pending, memory, frontier, trace)
            self.update_memory(
                question, objectives, memory, new_paths, frontier, trace)
            verdict = self.evaluate(question, memory, trace, depth)
            if verdict.sufficient:
                break
            decision = self.reflect(question, frontier, memory, trace)
            if decision.add:
                present = {eid for eid, _ in frontier.tail_entities}
                for eid in decision.backtrack_entities:
                    if eid not in present:
                        frontier.tail_entities.append(
                            (eid, self._cached_label(eid)))
                        present.add(eid)
        exhausted = verdict is None or not verdict.sufficient
        if exhausted:
            verdict = self.evaluate(
                question, memory, trace, iterations, forced=True)
        elapsed = time.perf_counter() - started
        trace.record("final", iterations, {
            "answer": verdict.answer,
            "reason": verdict.reason,
            "sufficient": verdict.sufficient,
            "forced": verdict.forced,
            "exhausted": exhausted,
            "iterations": iterations,
            "elapsed_seconds": round(elapsed, 6),
        })
        return RunResult(verdict, trace, memory, frontier, objectives,
                         iterations, elapsed)

    # -- stage: task decomposition --------------------------------------

    def decompose(self, question: Question, trace: RunTrace) -> SubObjectives:
        if self.config.ablations.no_guidance:
            trace.record("selection", 0, {
                "stage": "decompose",
                "selected": [question.text],
                "note": "guidance disabled",
            })
            return SubObjectives((question.text,))
        prompt = self.prompts.render("decompose", question=question.text)
        items, warning = self._ask_list(prompt, trace, 0, "decompose")
        if not items:
            items = [question.text]
            warning = warning or "empty sub-objective list"
        payload: dict = {"stage": "decompose", "selected": list(items)}
        if warning:
            payload["warning"] = warning
        trace.record("selection", 0, payload)
        return SubObjectives(tuple(items))

    # -- stage: relation exploration ------------------------------------

    def explore_relations(self, question: Question, objectives: SubObjectives,
                          frontier: Frontier, memory: Memory,
                          trace: RunTrace) -> list[PendingExpansion]:
        pending: list[PendingExpansion] = []
        frontier.tail_relations = []
        breadth = self.config.ablations.fixed_breadth
        for eid, label in frontier.tail_entities:
            tagged: list[tuple[str, Direction]] = []
            for direction in (Direction.OUTGOING, Direction.INCOMING):
                relations = self.kg.search_relations(eid, direction)
                trace.record("kg_query", frontier.iteration, {
                    "op": "relations",
                    "entity": eid,
                    "direction": direction.value,
                    "count": len(relations),
                })
                for relation in relations:
                    memory.subgraph.relation_edges.add(
                        (eid, relation, direction))
                    # pairs expanded in an earlier iteration are spent;
                    # re-offering them would just repeat the same hop
                    if (eid, relation, direction) not in memory.subgraph.expanded:
                        tagged.append((relation, direction))
            names = sorted({relation for relation, _ in tagged})
            if not names:
                trace.record("selection", frontier.iteration, {
                    "stage": "relations", "entity": eid,
                    "candidates": [], "selected": [],
                })
                continue
            prompt = self.prompts.render(
                "relation_selection",
                question=question.text,
                sub_objectives=json.dumps(list(objectives.items),
                                          ensure_ascii=False),
                topic_entity=label,
                relations="; ".join(names),
            )
            raw, warning = self._ask_list(
                prompt, trace, frontier.iteration, "relation_selection")
            chosen: list[str] = []
            dropped: list[str] = []
            for item in raw:
                name = item.strip()
                if name in names:
                    if name not in chosen:
                        chosen.append(name)
                else:
                    dropped.append(item)
            if breadth is not None:
                chosen = chosen[:breadth]
            payload: dict = {
                "stage": "relations",
                "entity": eid,
                "candidates": names,
                "selected": list(chosen),
            }
            if dropped:
                payload["dropped"] = dropped
            if warning:
                payload["warning"] = warning
            trace.record("selection", frontier.iteration, payload)
            if not chosen:
                continue
            extendable = [p for p in memory.paths if p.tail_entity() == eid]
            if not extendable:
                # reached by backtracking with no live path ending here
                extendable = [ReasoningPath(origin=eid)]
            for path in extendable:
                if len(path.steps) >= self.config.max_depth:
                    continue
                for relation, direction in tagged:
                    if relation in chosen:
                        pending.append(
                            PendingExpansion(path, relation, direction))
            for relation, direction in tagged:
                if relation in chosen:
                    frontier.tail_relations.append((relation, direction))
        return pending

    # -- stage: entity exploration --------------------------------------

    def explore_entities(self, question: Question,
                         pending: list[PendingExpansion], memory: Memory,
                         frontier: Frontier,
                         trace: RunTrace) -> list[ReasoningPath]:
        iteration = frontier.iteration
        if not pending:
            frontier.tail_entities = []
            return []
        results: dict[tuple, list[tuple[str, str]]] = {}
        groups: list[tuple[PendingExpansion, list[tuple[str, str]]]] = []
        for expansion in pending:
            tail = expansion.path.tail_entity()
            pair = (tail, expansion.relation, expansion.direction)
            if pair not in results:
                found = self.kg.search_entities(
                    tail, expansion.relation, expansion.direction)
                trace.record("kg_query", iteration, {
                    "op": "entities",
                    "entity": tail,
                    "relation": expansion.relation,
                    "direction": expansion.direction.value,
                    "count": len(found),
                })
                memory.subgraph.expanded.add(pair)
                labeled = [(cid, self._label_of(cid, trace, iteration))
                           for cid in found]
                for cid, clabel in labeled:
                    if expansion.direction is Direction.OUTGOING:
                        triple = Triplet(tail, expansion.relation, cid)
                    else:
                        triple = Triplet(cid, expansion.relation, tail)
                    memory.subgraph.triples.add(triple)
                    frontier.candidate_pool.setdefault(cid, clabel)
                if len(labeled) > self.config.recall.threshold:
                    kept = top_k(question.text, labeled,
                                 self.config.recall.k, self.scorer)
                    trace.record("selection", iteration, {
                        "stage": "recall",
                        "entity": tail,
                        "relation": expansion.relation,
                        "direction": expansion.direction.value,
                        "before": len(labeled),
                        "after": len(kept),
                    })
                    labeled = [(c.entity, c.label) for c in kept]
                results[pair] = labeled
            groups.append((expansion, results[pair]))
        parts: list[str] = []
        rendered: list[tuple[PendingExpansion, list[tuple[str, str]]]] = []
        for expansion, labeled in groups:
            if not labeled:
                continue
            tail_label = self._cached_label(expansion.path.tail_entity())
            names = ", ".join(clabel for _, clabel in labeled)
            if expansion.direction is Direction.OUTGOING:
                parts.append(f"({tail_label}, {expansion.relation}, [{names}])")
            else:
                parts.append(f"([{names}], {expansion.relation}, {tail_label})")
            rendered.append((expansion, labeled))
        if not parts:
            frontier.tail_entities = []
            trace.record("selection", iteration, {
                "stage": "entities", "selected": [], "tails": [],
            })
            return []
        prompt = self.prompts.render(
            "entity_selection",
            question=question.text,
            triplets="; ".join(parts),
        )
        raw, warning = self._ask_list(
            prompt, trace, iteration, "entity_selection")
        selected: list[str] = []
        for item in raw:
            name = item.strip()
            if name and name not in selected:
                selected.append(name)
        known: set[str] = set()
        for _, labeled in rendered:
            for cid, clabel in labeled:
                known.add(cid)
                known.add(clabel)
        valid = [name for name in selected if name in known]
        dropped = [name for name in selected if name not in known]
        breadth = self.config.ablations.fixed_breadth
        if breadth is not None:
            valid = valid[:breadth]
        new_paths: list[ReasoningPath] = []
        new_tails: list[tuple[str, str]] = []
        seen_tails: set[str] = set()
        cycles: list[str] = []
        for expansion, labeled in rendered:
            tail = expansion.path.tail_entity()
            for cid, clabel in labeled:
                if clabel not in valid and cid not in valid:
                    continue
                if cid in expansion.path.entities():
                    cycles.append(clabel)
                    continue
                if expansion.direction is Direction.OUTGOING:
                    step = PathStep(tail, expansion.relation, cid,
                                    expansion.direction)
                else:
                    step = PathStep(cid, expansion.relation, tail,
                                    expansion.direction)
                new_paths.append(expansion.path.extended(step))
                if cid not in seen_tails:
                    seen_tails.add(cid)
                    new_tails.append((cid, clabel))
        frontier.tail_entities = new_tails
        payload: dict = {
            "stage": "entities",
            "selected": valid,
            "tails": [cid for cid, _ in new_tails],
        }
        if dropped:
            payload["dropped"] = dropped
        if cycles:
            payload["cycles"] = sorted(set(cycles))
        if warning:
            payload["warning"] = warning
        trace.record("selection", iteration, payload)
        return new_paths

    # -- stage: memory update -------------------------------------------

    def update_memory(self, question: Question, objectives: SubObjectives,
                      memory: Memory, new_paths: list[ReasoningPath],
                      frontier: Frontier, trace: RunTrace) -> None:
        if new_paths:
            prefixes = {(p.origin, p.steps[:-1]) for p in new_paths}
            memory.paths = [p for p in memory.paths
                            if (p.origin, p.steps) not in prefixes]
            memory.paths.extend(new_paths)
        warning = None
        if self.config.ablations.no_memory:
            memory.status = SubObjectiveStatus.initial(len(objectives.items))
        else:
            prompt = self.prompts.render(
                "memory_update",
                question=question.text,
                sub_objectives=json.dumps(list(objectives.items),
                                          ensure_ascii=False),
                memory=self._render_status(memory.status),
                triplets=self._render_paths(memory),
            )
            data, warning = self._ask_json(
                prompt, trace, frontier.iteration, "memory_update",
                required=None)
            if data:
                for key, value in data.items():
                    index = self._status_index(key)
                    if index is not None and 1 <= index <= len(objectives.items):
                        memory.status.entries[index - 1] = str(value)
        payload: dict = {
            "status": list(memory.status.entries),
            "paths": len(memory.paths),
            "tail_entities": [eid for eid, _ in frontier.tail_entities],
            "candidate_pool": sorted(frontier.candidate_pool),
            "subgraph": memory.subgraph.size_summary(),
        }
        if warning:
            payload["warning"] = warning
        trace.record("memory_update", frontier.iteration, payload)

    # -- stage: evaluation ----------------------------------------------

    def evaluate(self, question: Question, memory: Memory, trace: RunTrace,
                 iteration: int, forced: bool = False) -> Verdict:
        prompt = self.prompts.render(
            "answer",
            question=question.text,
            memory=self._render_status(memory.status),
            triplets=self._render_paths(memory),
        )
        stage = "forced_answer" if forced else "evaluate"
        data, warning = self._ask_json(
            prompt, trace, iteration, stage, required={"A", "R"})
        if data is None:
            verdict = Verdict(False, None, "evaluation response unparseable",
                              forced=forced)
        else:
            raw_answer = data["A"]
            if isinstance(raw_answer, (list, tuple)):
                primary = str(raw_answer[0]).strip() if raw_answer else ""
            else:
                primary = str(raw_answer).strip()
            reason = str(data.get("R", "")).strip()
            sufficient = primary.lower() not in INSUFFICIENT_ANSWERS
            if forced:
                verdict = Verdict(sufficient, primary or None, reason,
                                  forced=True)
            elif sufficient:
                verdict = Verdict(True, primary, reason)
            else:
                verdict = Verdict(False, None, reason)
        payload: dict = {
            "sufficient": verdict.sufficient,
            "answer": verdict.answer,
            "reason": verdict.reason,
            "forced": forced,
        }
        if warning:
            payload["warning"] = warning
        trace.record("verdict", iteration, payload)
        return verdict

    # -- stage: reflection ----------------------------------------------

    def reflect(self, question: Question, frontier: Frontier, memory: Memory,
                trace: RunTrace) -> ReflectionDecision:
        iteration = frontier.iteration
        if self.config.ablations.no_reflection:
            decision = ReflectionDecision(False, "reflection disabled")
            trace.record("reflection", iteration, {
                "add": False, "reason": decision.reason, "backtrack": [],
                "note": "reflection disabled",
            })
            return decision
        prompt = self.prompts.render(
            "reflection",
            question=question.text,
            entities=json.dumps([label for _, label in frontier.tail_entities],
                                ensure_ascii=False),
            memory=self._render_status(memory.status),
            triplets=self._render_paths(memory),
        )
        data, warning = self._ask_json(
            prompt, trace, iteration, "reflection",
            required={"Add", "Reason"})
        if data is None:
            decision = ReflectionDecision(False,
                                          "reflection response unparseable")
            trace.record("reflection", iteration, {
                "add": False, "reason": decision.reason, "backtrack": [],
                "warning": warning,
            })
            return decision
        flag = normalize_bool(data["Add"])
        reason = str(data.get("Reason", "")).strip()
        if flag is None:
            warning = self._join_warnings(
                warning, f"unrecognized Add value {data['Add']!r}")
            flag = False
        if not flag:
            decision = ReflectionDecision(False, reason)
            payload = {"add": False, "reason": reason, "backtrack": []}
            if warning:
                payload["warning"] = warning
            trace.record("reflection", iteration, payload)
            return decision
        pool = frontier.candidate_pool
        prompt2 = self.prompts.render(
            "backtrack_selection",
            question=question.text,
            reason=reason,
            candidates=json.dumps(sorted(set(pool.values())),
                                  ensure_ascii=False),
            memory=self._render_status(memory.status),
        )
        names, warning2 = self._ask_list(
            prompt2, trace, iteration, "backtrack_selection")
        warning = self._join_warnings(warning, warning2)
        current = {eid for eid, _ in frontier.tail_entities}
        label_to_ids: dict[str, list[str]] = {}
        for eid, clabel in pool.items():
            label_to_ids.setdefault(clabel, []).append(eid)
        chosen: list[str] = []
        dropped: list[str] = []
        for raw_name in names:
            name = raw_name.strip()
            if name in pool:
                ids = [name]
            elif name in label_to_ids:
                ids = sorted(label_to_ids[name])
            else:
                lowered = name.lower()
                ids = sorted({
                    eid for clabel, eids in label_to_ids.items()
                    if clabel.lower() == lowered for eid in eids
                })
            if not ids:
                dropped.append(name)
                continue
            for eid in ids:
                if eid in current or eid in chosen:
                    dropped.append(name)
                else:
                    chosen.append(eid)
        if chosen:
            decision = ReflectionDecision(True, reason, tuple(chosen))
        else:
            decision = ReflectionDecision(False, reason)
            warning = self._join_warnings(
                warning, "no valid backtrack entity; add withdrawn")
        payload = {
            "add": decision.add,
            "reason": reason,
            "backtrack": list(decision.backtrack_entities),
            "candidate_pool": sorted(pool),
            "tails": sorted(current),
        }
        if dropped:
            payload["dropped"] = dropped
        if warning:
            payload["warning"] = warning
        trace.record("reflection", iteration, payload)
        return decision

    # -- helpers ---------------------------------------------------------

    def _complete(self, prompt: str, trace: RunTrace, iteration: int,
                  stage: str) -> str:
        completion = self.llm.complete(prompt, self.config.generation)
        trace.record("llm_call", iteration, {
            "stage": stage,
            "prompt": prompt,
            "response": completion.text,
        }, usage=completion.usage)
        return completion.text

    def _ask_list(self, prompt: str, trace: RunTrace, iteration: int,
                  stage: str) -> tuple[list[str], str | None]:
        text = self._complete(prompt, trace, iteration, stage)
        try:
            return parse_list(text), None
        except ParseError as first:
            text = self._complete(prompt, trace, iteration, stage + "_retry")
            try:
                return parse_list(text), f"first response unparseable ({first})"
            except ParseError as second:
                return [], f"unparseable after retry ({second})"

    def _ask_json(self, prompt: str, trace: RunTrace, iteration: int,
                  stage: str,
                  required: set[str] | None) -> tuple[dict | None, str | None]:
        if required:
            decode = lambda t: parse_json_object(t, required)  # noqa: E731
        else:
            decode = extract_json_object
        text = self._complete(prompt, trace, iteration, stage)
        try:
            return decode(text), None
        except ParseError as first:
            text = self._complete(prompt, trace, iteration, stage + "_retry")
            try:
                return decode(text), f"first response unparseable ({first})"
            except ParseError as second:
                return None, f"unparseable after retry ({second})"

    def _label_of(self, entity: str, trace: RunTrace, iteration: int) -> str:
        hit = self._labels.get(entity)
        if hit is not None:
            return hit
        resolved = self.kg.resolve_label(entity)
        trace.record("kg_query", iteration, {
            "op": "label",
            "entity": entity,
            "label": resolved.label,
            "fallback": resolved.is_fallback,
        })
        self._labels[entity] = resolved.label
        return resolved.label

    def _cached_label(self, entity: str) -> str:
        hit = self._labels.get(entity)
        if hit is None:
            hit = self.kg.resolve_label(entity).label
            self._labels[entity] = hit
        return hit

    def _render_status(self, status: SubObjectiveStatus) -> str:
        return json.dumps(
            {f"#{i}": entry
             for i, entry in enumerate(status.entries, start=1)},
            ensure_ascii=False,
        )

    def _render_paths(self, memory: Memory) -> str:
        lines: list[str] = []
        seen: set[str] = set()
        for path in memory.paths:
            for step in path.steps:
                line = (f"{self._cached_label(step.subject)}, "
                        f"{step.relation}, "
                        f"{self._cached_label(step.object)}")
                if line not in seen:
                    seen.add(line)
                    lines.append(line)
        return "\n".join(lines)

    @staticmethod
    def _status_index(key: str) -> int | None:
        match = _INDEX_RE.search(str(key))
        return int(match.group(1)) if match else None

    @staticmethod
    def _join_warnings(*parts: str | None) -> str | None:
        present = [p for p in parts if p]
        return "; ".join(present) if present else None


def run_question(question: Question, config: PlannerConfig,
                 backends: Backends) -> tuple[Verdict, RunTrace]:
    """Convenience wrapper: one fresh planner, one question."""
    planner = Planner(backends.kg, backends.llm, config,
                      scorer=backends.scorer)
    result = planner.run(question)
    return result.verdict, result.trace
