"""Execute a multi-tier controller against a configurable environment.

A session runs the top tier's policy from the initial state.  After every
transition the set of tiers admitting it is recomputed from raw successor
membership (not from compiled bookkeeping, so the simulator doubles as a
cross-check of the compilation): if the current tier explains the outcome
the run continues, otherwise it degrades to a maximal explaining tier
below the current one and resumes with that tier's policy and goal.
Outcome selection is scripted, seeded-random, adversarial or interactive.
"""

from __future__ import annotations

import random
from dataclasses import dataclass
from typing import Callable, Iterable, Sequence

from .errors import IllegalSuccessorError, SessionError
from .mtc import MtController
from .model import MtpProblem, explaining_tiers, successor_states
from .pddl import State, holds, state_key

SCHEMA_VERSION = 1

STEP = "step"
DEGRADE = "degrade"
GOAL = "goal"
STUCK = "stuck"
CAP = "cap"

DEFAULT_STEP_CAP = 200


def classify_transition(problem: MtpProblem, state: State, op: str, successor: State) -> frozenset:
    """The tiers whose transition relation admits (state, op, successor)."""
    return explaining_tiers(problem, state, op, successor)


# ── Outcome choosers ─────────────────────────────────────────────────────────


@dataclass(frozen=True)
class OutcomeChoice:
    """One selectable successor with its explanation summary."""

    successor: State
    explained_by: tuple[str, ...]
    degrade_to: str | None  # None = no tier change; "" = escapes/stuck


class OutcomeChooser:
    """Strategy supplying the environment's branch choice for each step."""

    def describe(self) -> str:
        raise NotImplementedError

    def choose(self, state: State, action: str, choices: Sequence[OutcomeChoice]) -> int:
        """Return the index of the chosen successor."""
        raise NotImplementedError


class ScriptedChooser(OutcomeChooser):
    """Replays a list of branch indices into the canonical successor order."""

    def __init__(self, indices: Iterable[int]):
        self.indices = list(indices)
        self._pos = 0

    def describe(self) -> str:
        return f"scripted:{','.join(str(i) for i in self.indices)}"

    def choose(self, state, action, choices):
        if self._pos >= len(self.indices):
            raise IllegalSuccessorError("scripted chooser ran out of branch selectors")
        idx = self.indices[self._pos]
        self._pos += 1
        if not 0 <= idx < len(choices):
            raise IllegalSuccessorError(
                f"scripted branch index {idx} out of range for {action} ({len(choices)} outcomes)"
            )
        return idx


class RandomChooser(OutcomeChooser):
    def __init__(self, seed: int):
        self.seed = seed
        self._rng = random.Random(seed)

    def describe(self) -> str:
        return f"random:{self.seed}"

    def choose(self, state, action, choices):
        return self._rng.randrange(len(choices))


class AdversarialLowestChooser(OutcomeChooser):
    """Always picks an outcome whose maximal explaining tier is lowest."""

    def __init__(self, problem: MtpProblem):
        self.problem = problem
        self._height = {t: len(problem.above(t)) for t in problem.tier_ids}

    def describe(self) -> str:
        return "adversarial-lowest"

    def choose(self, state, action, choices):
        def badness(c: OutcomeChoice) -> tuple:
            if not c.explained_by:
                return (len(self.problem.tier_ids) + 1, state_key(c.successor))
            # deeper maximal explainer = lower tier = worse for the executor
            depth = max(self._height[t] for t in self.problem.maximal(c.explained_by))
            return (depth, state_key(c.successor))

        return max(range(len(choices)), key=lambda i: badness(choices[i]))


class InteractiveChooser(OutcomeChooser):
    """Defers to a callback(state, action, choices) -> index."""

    def __init__(self, callback: Callable[[State, str, Sequence[OutcomeChoice]], int]):
        self.callback = callback

    def describe(self) -> str:
        return "interactive"

    def choose(self, state, action, choices):
        return self.callback(state, action, choices)


# ── Traces ───────────────────────────────────────────────────────────────────


@dataclass(frozen=True)
class TraceEvent:
    kind: str
    tier: str
    state: State
    action: str | None = None
    successor: State | None = None
    explained_by: tuple[str, ...] | None = None
    degrade_to: str | None = None
    note: str = ""

    def to_doc(self) -> dict:
        doc: dict = {
            "event": self.kind,
            "tier": self.tier,
            "state": sorted(str(a) for a in self.state),
        }
        if self.action is not None:
            doc["action"] = self.action
        if self.successor is not None:
            doc["successor"] = sorted(str(a) for a in self.successor)
        if self.explained_by is not None:
            doc["explained_by"] = list(self.explained_by)
        if self.degrade_to is not None:
            doc["degrade_to"] = self.degrade_to
        if self.note:
            doc["note"] = self.note
        return doc


@dataclass
class Trace:
    problem: str
    ground_truth: str
    chooser: str
    step_cap: int
    events: tuple[TraceEvent, ...]

    @property
    def terminal(self) -> str:
        return self.events[-1].kind if self.events else STUCK

    def to_doc(self) -> dict:
        return {
            "schema_version": SCHEMA_VERSION,
            "problem": self.problem,
            "ground_truth": self.ground_truth,
            "chooser": self.chooser,
            "step_cap": self.step_cap,
            "terminal": self.terminal,
            "events": [e.to_doc() for e in self.events],
        }


# ── Session state machine ────────────────────────────────────────────────────


class SimSession:
    """Stepwise execution of a controller against one ground-truth tier."""

    def __init__(
        self,
        problem: MtpProblem,
        mtc: MtController,
        ground_truth: str,
        step_cap: int = DEFAULT_STEP_CAP,
    ):
        if ground_truth not in problem.tiers:
            raise SessionError(f"unknown ground-truth tier {ground_truth}")
        self.problem = problem
        self.mtc = mtc
        self.ground_truth = ground_truth
        self.step_cap = step_cap
        self.tier = problem.top
        self.state: State = problem.initial
        self.steps = 0
        self.finished = False
        self.events: list[TraceEvent] = []
        self._check_terminal()

    # -- inspection ----------------------------------------------------------

    def prescribed(self) -> tuple[str, ...]:
        if self.finished:
            return ()
        return self.mtc.actions(self.tier, self.state)

    def choices(self, action: str) -> tuple[OutcomeChoice, ...]:
        """Canonically ordered outcomes of ``action`` in the ground-truth
        tier, annotated with explaining tiers and the degradation target."""
        succs = successor_states(self.problem.tiers[self.ground_truth], self.state, action)
        out = []
        for u in succs:
            expl = explaining_tiers(self.problem, self.state, action, u)
            out.append(
                OutcomeChoice(
                    successor=u,
                    explained_by=tuple(t for t in self.problem.tier_ids if t in expl),
                    degrade_to=self._degrade_target(expl),
                )
            )
        return tuple(out)

    def _degrade_target(self, expl: frozenset) -> str | None:
        if self.tier in expl:
            return None
        candidates = [t for t in expl if self.problem.lt(t, self.tier)]
        if not candidates:
            return ""  # escapes every tier at or below the current one
        return self.problem.maximal(candidates)[0]

    # -- stepping ------------------------------------------------------------

    def choose(self, action: str, successor) -> list[TraceEvent]:
        """Apply one environment choice; ``successor`` is an index into
        ``choices(action)`` or the successor state itself.  Returns the
        events this step produced."""
        if self.finished:
            raise SessionError("session already finished")
        if action not in self.prescribed():
            raise SessionError(f"action {action} is not prescribed in the current state")
        options = self.choices(action)
        if isinstance(successor, int):
            if not 0 <= successor < len(options):
                raise IllegalSuccessorError(
                    f"successor index {successor} out of range for {action} ({len(options)} outcomes)"
                )
            choice = options[successor]
        else:
            matches = [c for c in options if c.successor == successor]
            if not matches:
                raise IllegalSuccessorError(
                    f"state is not a possible outcome of {action} in tier {self.ground_truth}"
                )
            choice = matches[0]

        before = len(self.events)
        expl = frozenset(choice.explained_by)
        if self.tier in expl:
            self._emit(STEP, action=action, choice=choice)
            self.state = choice.successor
        elif choice.degrade_to:
            candidates = [t for t in expl if self.problem.lt(t, self.tier)]
            maximal = self.problem.maximal(candidates)
            note = ""
            if len(maximal) > 1:
                note = "degradation tie between " + ", ".join(maximal) + "; chose " + maximal[0]
            self._emit(DEGRADE, action=action, choice=choice, degrade_to=maximal[0], note=note)
            self.tier = maximal[0]
            self.state = choice.successor
        else:
            note = (
                "outcome explained by no tier"
                if not expl
                else "outcome explained only by tiers not below the current one"
            )
            self._emit(STUCK, action=action, choice=choice, note=note)
            self.finished = True
            return self.events[before:]

        self.steps += 1
        self._check_terminal()
        return self.events[before:]

    def _emit(self, kind: str, action=None, choice: OutcomeChoice | None = None, degrade_to=None, note=""):
        self.events.append(
            TraceEvent(
                kind=kind,
                tier=self.tier,
                state=self.state,
                action=action,
                successor=choice.successor if choice else None,
                explained_by=choice.explained_by if choice else None,
                degrade_to=degrade_to,
                note=note,
            )
        )

    def _check_terminal(self):
        if self.finished:
            return
        if holds(self.problem.goals[self.tier], self.state):
            self.events.append(TraceEvent(GOAL, self.tier, self.state))
            self.finished = True
        elif not self.mtc.actions(self.tier, self.state):
            self.events.append(
                TraceEvent(STUCK, self.tier, self.state, note="no applicable mapped action")
            )
            self.finished = True
        elif self.steps >= self.step_cap:
            self.events.append(TraceEvent(CAP, self.tier, self.state, note="step cap reached"))
            self.finished = True

    def trace(self, chooser_desc: str) -> Trace:
        return Trace(
            problem=self.problem.name,
            ground_truth=self.ground_truth,
            chooser=chooser_desc,
            step_cap=self.step_cap,
            events=tuple(self.events),
        )


def run_session(
    problem: MtpProblem,
    mtc: MtController,
    ground_truth: str,
    chooser: OutcomeChooser,
    step_cap: int = DEFAULT_STEP_CAP,
) -> Trace:
    """Drive a session to its terminal event with the given chooser."""
    session = SimSession(problem, mtc, ground_truth, step_cap)
    while not session.finished:
        action = session.prescribed()[0]
        options = session.choices(action)
        idx = chooser.choose(session.state, action, options)
        if not isinstance(idx, int) or not 0 <= idx < len(options):
            raise IllegalSuccessorError(f"chooser returned invalid outcome index {idx!r}")
        session.choose(action, idx)
    return session.trace(chooser.describe())
