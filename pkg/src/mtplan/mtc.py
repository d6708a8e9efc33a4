"""Multi-tier controllers: extraction from a compiled-problem policy,
triggering-state computation, and semantic verification.

Extraction projects the compiled policy onto each tier: look the policy up
at the clean acting state (operating-tier and acting flags set, no pending
or explicability bookkeeping), keep the tier's own domain actions, and map
goal-check selections to the empty action set.  Verification is the
independent oracle for the whole pipeline: it computes the triggering
states of each tier by walking the controller and classifying every
possible outcome by the tiers that admit it, then checks that each tier's
policy solves the tier's own problem from every trigger under all-fair
(strong-cyclic) semantics — it never consults the compiled problem.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass

from .compile import ROLE_CHECKGOAL, ROLE_FAIR, CompiledProblem
from .errors import EscapesAllTiersError
from .model import MtpProblem, explaining_tiers, state_key, successor_states
from .pddl import State
from .solve import FondProblem, Policy, VerifyResult, verify_dual

SCHEMA_VERSION = 1


@dataclass
class MtController:
    """One policy per tier over the original vocabulary; an empty action
    tuple marks a state where the tier's goal is reached."""

    policies: dict[str, dict[State, tuple[str, ...]]]

    def actions(self, tier: str, state: State) -> tuple[str, ...]:
        return self.policies.get(tier, {}).get(state, ())

    def to_doc(self) -> dict:
        tiers = {}
        for tid in sorted(self.policies):
            entries = []
            for s in sorted(self.policies[tid], key=state_key):
                entries.append(
                    {
                        "atoms": sorted(str(a) for a in s),
                        "actions": list(self.policies[tid][s]),
                    }
                )
            tiers[tid] = entries
        return {"schema_version": SCHEMA_VERSION, "tiers": tiers}


def extract_mtc(policy: Policy, compiled: CompiledProblem) -> MtController:
    """Project a compiled-problem policy into a per-tier controller.

    Unmapped extended states yield no entry; totality is only needed on
    the closure reachable from the triggering states, which the compiled
    policy's own closure covers.
    """
    book = compiled.bookkeeping_atoms
    lvl_atoms = set(compiled.lvl.values())
    policies: dict[str, dict[State, tuple[str, ...]]] = {t: {} for t in compiled.tier_ids}

    for s_ext, ops in policy.mapping.items():
        if compiled.act not in s_ext:
            continue
        extra = (s_ext & book) - {compiled.act} - lvl_atoms
        if extra:
            continue  # pending-unfair, explicability or end bookkeeping present
        tiers_present = [t for t in compiled.tier_ids if compiled.lvl[t] in s_ext]
        if len(tiers_present) != 1:
            continue
        tid = tiers_present[0]
        base = frozenset(s_ext - book)

        if any(
            (p := compiled.provenance.get(op)) and p.role == ROLE_CHECKGOAL and p.tier == tid
            for op in ops
        ):
            policies[tid][base] = ()
            continue
        actions: list[str] = []
        for op in ops:
            prov = compiled.provenance.get(op)
            if prov and prov.role == ROLE_FAIR and prov.tier == tid and prov.source not in actions:
                actions.append(prov.source)
        if actions:
            policies[tid][base] = tuple(actions)
    return MtController(policies)


# ── Triggering states ────────────────────────────────────────────────────────


@dataclass(frozen=True)
class TriggerMap:
    by_tier: dict[str, tuple[State, ...]]

    def states(self, tier: str) -> tuple[State, ...]:
        return self.by_tier.get(tier, ())

    def to_doc(self) -> dict:
        return {
            "schema_version": SCHEMA_VERSION,
            "triggers": {
                tid: [sorted(str(a) for a in s) for s in states]
                for tid, states in sorted(self.by_tier.items())
            },
        }


def triggering_states(problem: MtpProblem, mtc: MtController) -> TriggerMap:
    """Least fixpoint of the triggering-state construction.

    The top tier is triggered at the initial state.  Walking each tier's
    policy inside that tier, every possible outcome (successors under the
    minimum tier, which mentions every branch) is classified by the set of
    tiers admitting the transition; an outcome triggers the tiers it is
    legal in while no strictly higher tier is, provided they sit below the
    operating tier.
    """
    bottom = problem.tiers[problem.bottom]
    triggers: dict[str, set[State]] = {t: set() for t in problem.tier_ids}
    triggers[problem.top].add(problem.initial)

    outcome_memo: dict[tuple[State, str], tuple[tuple[State, frozenset], ...]] = {}

    def outcomes(state: State, op: str):
        key = (state, op)
        if key not in outcome_memo:
            outs = successor_states(bottom, state, op)
            classified = []
            for u in outs:
                expl = explaining_tiers(problem, state, op, u)
                if not expl:
                    raise EscapesAllTiersError(
                        f"transition via {op} from {{{' '.join(sorted(str(a) for a in state))}}} "
                        "is legal in no tier"
                    )
                classified.append((u, expl))
            outcome_memo[key] = tuple(classified)
        return outcome_memo[key]

    agenda: deque[tuple[str, State]] = deque([(problem.top, problem.initial)])
    processed: set[tuple[str, State]] = set()
    while agenda:
        tid, s0 = agenda.popleft()
        if (tid, s0) in processed:
            continue
        processed.add((tid, s0))
        policy = mtc.policies.get(tid, {})
        visited = {s0}
        queue: deque[State] = deque([s0])
        while queue:
            t = queue.popleft()
            for op in policy.get(t, ()):
                for u, expl in outcomes(t, op):
                    if tid in expl and u not in visited:
                        visited.add(u)
                        queue.append(u)
                    for d in expl:
                        if not problem.lt(d, tid):
                            continue
                        if any(problem.lt(d, e) for e in expl):
                            continue  # a strictly higher tier also explains it
                        if u not in triggers[d]:
                            triggers[d].add(u)
                            agenda.append((d, u))

    return TriggerMap(
        {tid: tuple(sorted(states, key=state_key)) for tid, states in triggers.items()}
    )


# ── Semantic verification ────────────────────────────────────────────────────


@dataclass(frozen=True)
class MtcFailure:
    tier: str
    trigger: State
    diagnosis: str

    def render(self) -> str:
        atoms = " ".join(sorted(str(a) for a in self.trigger))
        return f"tier {self.tier}, trigger {{{atoms}}}: {self.diagnosis}"


@dataclass
class MtcVerification:
    ok: bool
    failures: tuple[MtcFailure, ...]
    triggers: TriggerMap

    def __bool__(self) -> bool:
        return self.ok

    def render(self) -> str:
        if self.ok:
            return "controller verified: every tier solves its problem from every triggering state"
        return "controller rejected:\n" + "\n".join(f.render() for f in self.failures)

    def to_doc(self) -> dict:
        return {
            "schema_version": SCHEMA_VERSION,
            "ok": self.ok,
            "failures": [
                {
                    "tier": f.tier,
                    "trigger": sorted(str(a) for a in f.trigger),
                    "diagnosis": f.diagnosis,
                }
                for f in self.failures
            ],
            "triggers": self.triggers.to_doc()["triggers"],
        }


def verify_mtc(problem: MtpProblem, mtc: MtController) -> MtcVerification:
    """Check the solution-controller condition: for every tier and every
    triggering state, the tier's policy solves that tier's planning problem
    under all-fair semantics."""
    triggers = triggering_states(problem, mtc)
    failures: list[MtcFailure] = []
    for tid in problem.tier_ids:
        tier_policy = Policy(dict(mtc.policies.get(tid, {})))
        for trigger in triggers.states(tid):
            sub = FondProblem(problem.tiers[tid], trigger, problem.goals[tid])
            result: VerifyResult = verify_dual(tier_policy, sub, {})
            if not result.ok:
                failures.append(MtcFailure(tid, trigger, result.diagnosis or "verification failed"))
    return MtcVerification(not failures, tuple(failures), triggers)
