import pytest

from graphquest.kg.types import Direction, Triplet
from graphquest.planner.state import (
    AblationFlags,
    PathStep,
    PlannerConfig,
    Question,
    ReasoningPath,
    ReflectionDecision,
    StateError,
    SubObjectiveStatus,
    SubObjectives,
    Subgraph,
    Verdict,
)

OUT = Direction.OUTGOING
IN = Direction.INCOMING


class TestQuestion:
    def test_valid(self):
        q = Question("Who wrote it?", (("m.0a", "The Book"),))
        assert q.topic_entities[0] == ("m.0a", "The Book")

    def test_blank_text_rejected(self):
        with pytest.raises(StateError):
            Question("   ", (("m.0a", "A"),))

    def test_no_topics_rejected(self):
        with pytest.raises(StateError):
            Question("Who?", ())


class TestSubObjectives:
    def test_empty_rejected(self):
        with pytest.raises(StateError):
            SubObjectives(())

    def test_status_starts_all_unknown_same_length(self):
        status = SubObjectiveStatus.initial(3)
        assert status.entries == ["unknown", "unknown", "unknown"]


class TestPathSteps:
    def test_outgoing_orientation(self):
        step = PathStep("m.0a", "r.x.y", "m.0b", OUT)
        assert step.source == "m.0a"
        assert step.target == "m.0b"
        assert step.as_triplet() == Triplet("m.0a", "r.x.y", "m.0b")

    def test_incoming_step_keeps_kg_orientation(self):
        # path stepped from m.0b backwards along (m.0a, r, m.0b)
        step = PathStep("m.0a", "r.x.y", "m.0b", IN)
        assert step.source == "m.0b"
        assert step.target == "m.0a"
        assert step.as_triplet() == Triplet("m.0a", "r.x.y", "m.0b")


class TestReasoningPath:
    def test_root_path(self):
        path = ReasoningPath("m.0a")
        assert path.tail_entity() == "m.0a"
        assert path.entities() == ("m.0a",)
        path.validate()

    def test_extension_is_persistent(self):
        root = ReasoningPath("m.0a")
        longer = root.extended(PathStep("m.0a", "r.x.y", "m.0b", OUT))
        assert root.steps == ()
        assert longer.tail_entity() == "m.0b"
        assert longer.entities() == ("m.0a", "m.0b")

    def test_mixed_direction_chain_validates(self):
        # m.0a -r1-> m.0b, then backwards along (m.0c, r2, m.0b)
        path = ReasoningPath("m.0a", (
            PathStep("m.0a", "r.one", "m.0b", OUT),
            PathStep("m.0c", "r.two", "m.0b", IN),
        ))
        assert path.tail_entity() == "m.0c"
        path.validate(max_length=2)

    def test_broken_linkage_rejected(self):
        path = ReasoningPath("m.0a", (
            PathStep("m.0x", "r.one", "m.0b", OUT),
        ))
        with pytest.raises(StateError):
            path.validate()

    def test_cycle_rejected(self):
        path = ReasoningPath("m.0a", (
            PathStep("m.0a", "r.one", "m.0b", OUT),
            PathStep("m.0b", "r.two", "m.0a", OUT),
        ))
        with pytest.raises(StateError):
            path.validate()

    def test_length_cap(self):
        path = ReasoningPath("m.0a", (
            PathStep("m.0a", "r.one", "m.0b", OUT),
            PathStep("m.0b", "r.two", "m.0c", OUT),
        ))
        path.validate(max_length=2)
        with pytest.raises(StateError):
            path.validate(max_length=1)


class TestVerdict:
    def test_sufficient_needs_answer(self):
        Verdict(True, "Panama", "found it")
        with pytest.raises(StateError):
            Verdict(True, None, "claims done without answer")

    def test_insufficient_must_not_carry_answer(self):
        Verdict(False, None, "keep going")
        with pytest.raises(StateError):
            Verdict(False, "Panama", "contradiction")

    def test_forced_verdict_may_hedge(self):
        # after exhaustion the best guess is recorded without sufficiency
        Verdict(False, "Panama", "best effort", forced=True)
        Verdict(False, None, "nothing found", forced=True)


class TestReflectionDecision:
    def test_backtrack_requires_add(self):
        ReflectionDecision(True, "revisit", ("m.0a",))
        ReflectionDecision(False, "press on")
        with pytest.raises(StateError):
            ReflectionDecision(False, "inconsistent", ("m.0a",))


class TestSubgraph:
    def test_size_summary(self):
        sub = Subgraph()
        sub.relation_edges.add(("m.0a", "r.one", OUT))
        sub.triples.add(Triplet("m.0a", "r.one", "m.0b"))
        sub.expanded.add(("m.0a", "r.one", OUT))
        assert sub.size_summary() == {"relation_edges": 1, "triples": 1,
                                      "expanded": 1}


class TestConfigs:
    def test_planner_defaults(self):
        config = PlannerConfig()
        assert config.max_depth == 4
        assert config.generation.temperature == 0.3
        assert config.generation.max_tokens == 1024
        assert config.generation.frequency_penalty == 0.0
        assert config.generation.presence_penalty == 0.0
        assert config.recall.threshold == 30
        assert config.ablations.active() == ()

    def test_depth_must_be_positive(self):
        with pytest.raises(StateError):
            PlannerConfig(max_depth=0)

    def test_ablation_names(self):
        flags = AblationFlags(no_guidance=True, no_reflection=True,
                              fixed_breadth=3)
        assert flags.active() == ("no_guidance", "no_reflection",
                                  "fixed_breadth=3")

    def test_fixed_breadth_must_be_positive(self):
        AblationFlags(fixed_breadth=1)
        with pytest.raises(StateError):
            AblationFlags(fixed_breadth=0)
