from __future__ import annotations

import json

import pytest

from mtplan.errors import IllegalSuccessorError, PreconditionViolatedError, SessionError
from mtplan.pddl import atom
from mtplan.sim import (
    AdversarialLowestChooser,
    InteractiveChooser,
    RandomChooser,
    ScriptedChooser,
    SimSession,
    classify_transition,
    run_session,
)


def S(*atoms_):
    return frozenset(atoms_)


class TestClassify:
    def test_clean_move_explained_everywhere(self, nonrunning):
        got = classify_transition(nonrunning, S(atom("at", "c2")), "walk_c2_c1", S(atom("at", "c1")))
        assert got == frozenset({"d1", "d2", "d3"})

    def test_fresh_scratch_outside_idealized_tier(self, nonrunning):
        got = classify_transition(
            nonrunning, S(atom("at", "c2")), "walk_c2_c1", S(atom("at", "c1"), atom("scratch"))
        )
        assert got == frozenset({"d1", "d2"})

    def test_preexisting_scratch_keeps_top_tier(self, nonrunning):
        got = classify_transition(
            nonrunning,
            S(atom("at", "c2"), atom("scratch")),
            "walk_c2_c1",
            S(atom("at", "c1"), atom("scratch")),
        )
        assert got == frozenset({"d1", "d2", "d3"})

    def test_explanations_are_downward_closed(self, nonrunning):
        # a transition a refinement admits is admitted all the way down
        import random

        from _gen import random_state

        rng = random.Random(17)
        d1 = nonrunning.tiers["d1"]
        for _ in range(80):
            s = random_state(rng, d1)
            for op in d1.operators:
                from mtplan.pddl import holds

                if not holds(op.precondition, s):
                    continue
                from mtplan.model import successor_states

                for u in successor_states(d1, s, op.name):
                    expl = classify_transition(nonrunning, s, op.name, u)
                    for t in expl:
                        assert set(nonrunning.below(t)) <= expl

    def test_precondition_violation_propagates(self, nonrunning):
        with pytest.raises(PreconditionViolatedError):
            classify_transition(nonrunning, S(atom("broken")), "walk_c2_c1", S())


class TestSessions:
    def test_idealized_ground_truth_never_degrades(self, nonrunning, controller):
        trace = run_session(nonrunning, controller, "d3", RandomChooser(0))
        kinds = [e.kind for e in trace.events]
        assert kinds == ["step", "step", "goal"]
        assert all(e.tier == "d3" for e in trace.events)
        assert trace.events[-1].state == S(atom("at", "c0"))

    def test_scratch_advance_degrades_one_level(self, nonrunning, controller):
        trace = run_session(nonrunning, controller, "d1", ScriptedChooser([1, 0]))
        assert [e.kind for e in trace.events] == ["degrade", "step", "goal"]
        first = trace.events[0]
        assert first.tier == "d3" and first.degrade_to == "d2"
        assert first.successor == S(atom("at", "c1"), atom("scratch"))
        assert trace.events[-1].tier == "d2"
        assert trace.events[-1].state == S(atom("at", "c0"), atom("scratch"))

    def test_stay_in_place_degrades_to_weakest_and_returns_to_base(self, nonrunning, controller):
        trace = run_session(nonrunning, controller, "d1", ScriptedChooser([0, 2, 1]))
        kinds = [(e.kind, e.degrade_to) for e in trace.events]
        assert kinds == [("step", None), ("degrade", "d1"), ("step", None), ("goal", None)]
        assert trace.events[1].tier == "d3"
        assert trace.events[-1].state == S(atom("at", "c2"), atom("scratch"))
        assert trace.events[-1].tier == "d1"

    def test_goal_satisfied_immediately(self, nonrunning, controller):
        import dataclasses

        at_goal = dataclasses.replace(nonrunning, initial=S(atom("at", "c0")))
        trace = run_session(at_goal, controller, "d3", RandomChooser(1))
        assert [e.kind for e in trace.events] == ["goal"]

    def test_tier_sequence_never_increases(self, nonrunning, controller):
        for seed in range(50):
            trace = run_session(nonrunning, controller, "d1", RandomChooser(seed))
            tiers = [e.tier for e in trace.events]
            for earlier, later in zip(tiers, tiers[1:]):
                assert nonrunning.leq(later, earlier)

    def test_thousand_seeded_runs_all_reach_a_goal(self, nonrunning, controller):
        outcomes = set()
        for seed in range(1000):
            trace = run_session(nonrunning, controller, "d1", RandomChooser(seed), step_cap=500)
            outcomes.add(trace.terminal)
        assert outcomes == {"goal"}

    def test_adversarial_chooser_forces_weakest_tier(self, nonrunning, controller):
        trace = run_session(nonrunning, controller, "d1", AdversarialLowestChooser(nonrunning))
        assert trace.terminal == "goal"
        assert any(e.kind == "degrade" and e.degrade_to == "d1" for e in trace.events)

    def test_interactive_chooser_callback(self, nonrunning, controller):
        picks = []

        def cb(state, action, choices):
            picks.append(action)
            return 0

        trace = run_session(nonrunning, controller, "d3", InteractiveChooser(cb))
        assert trace.terminal == "goal"
        assert picks == ["walk_c2_c1", "walk_c1_c0"]

    def test_scripted_chooser_out_of_range(self, nonrunning, controller):
        with pytest.raises(IllegalSuccessorError):
            run_session(nonrunning, controller, "d1", ScriptedChooser([9]))

    def test_scripted_chooser_exhausted(self, nonrunning, controller):
        with pytest.raises(IllegalSuccessorError):
            run_session(nonrunning, controller, "d1", ScriptedChooser([0]))

    def test_step_cap_terminal_is_distinct_from_stuck(self, nonrunning, controller):
        trace = run_session(nonrunning, controller, "d3", RandomChooser(0), step_cap=1)
        assert trace.terminal == "cap"
        assert trace.events[-1].note == "step cap reached"

    def test_unmapped_state_is_stuck(self, nonrunning, controller):
        import dataclasses

        from mtplan.mtc import MtController

        sparse = MtController({"d3": {nonrunning.initial: ("walk_c2_c1",)}, "d2": {}, "d1": {}})
        trace = run_session(nonrunning, sparse, "d3", RandomChooser(0))
        assert trace.terminal == "stuck"
        assert "no applicable mapped action" in trace.events[-1].note

    def test_trace_serialization_is_deterministic(self, nonrunning, controller):
        a = run_session(nonrunning, controller, "d1", ScriptedChooser([0, 2, 1]))
        b = run_session(nonrunning, controller, "d1", ScriptedChooser([0, 2, 1]))
        assert json.dumps(a.to_doc(), sort_keys=True) == json.dumps(b.to_doc(), sort_keys=True)


class TestSessionStepping:
    def test_choices_expose_explanations_and_targets(self, nonrunning, controller):
        session = SimSession(nonrunning, controller, "d1")
        options = session.choices("walk_c2_c1")
        summary = {
            tuple(sorted(str(a) for a in c.successor)): (c.explained_by, c.degrade_to)
            for c in options
        }
        assert summary == {
            ("(at c1)",): (("d1", "d2", "d3"), None),
            ("(at c1)", "(scratch)"): (("d1", "d2"), "d2"),
            ("(at c2)", "(scratch)"): (("d1",), "d1"),
        }

    def test_choosing_by_state_object(self, nonrunning, controller):
        session = SimSession(nonrunning, controller, "d1")
        events = session.choose("walk_c2_c1", S(atom("at", "c1"), atom("scratch")))
        assert events[0].kind == "degrade" and session.tier == "d2"

    def test_finished_session_rejects_choices(self, nonrunning, controller):
        session = SimSession(nonrunning, controller, "d3")
        session.choose("walk_c2_c1", 0)
        session.choose("walk_c1_c0", 0)
        assert session.finished
        with pytest.raises(SessionError):
            session.choose("walk_c0_c1", 0)

    def test_unprescribed_action_rejected(self, nonrunning, controller):
        session = SimSession(nonrunning, controller, "d1")
        with pytest.raises(SessionError):
            session.choose("run", 0)

    def test_illegal_successor_rejected(self, nonrunning, controller):
        session = SimSession(nonrunning, controller, "d1")
        with pytest.raises(IllegalSuccessorError):
            session.choose("walk_c2_c1", 7)
        with pytest.raises(IllegalSuccessorError):
            session.choose("walk_c2_c1", S(atom("at", "c0")))
