"""Explicit-state dual-FOND solver and policy verifier.

Fair operators get full-support branch semantics (retrying eventually sees
every branch), unfair operators are adversarial.  Synthesis is the nested
fixpoint for qualitative almost-sure reachability: a greatest fixpoint of
a safe region around a least progress fixpoint, where an action qualifies
in a state iff all its successors stay safe and, for progress, some fair
successor (or all unfair successors) moved strictly closer to the goal.
Policies are set-valued with a canonical first choice; verification replays
the fixpoint with the policy's actions read adversarially, so it is exactly
the dual of synthesis and accepts any safe set-valued policy.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass
from typing import Callable, Mapping

from .errors import StateSpaceBudgetError
from .model import applicable_operators, successor_states
from .pddl import FondDomain, Formula, State, holds, state_key

DEFAULT_NODE_CAP = 1_000_000

FAIR = "fair"
UNFAIR = "unfair"


@dataclass(frozen=True)
class FondProblem:
    domain: FondDomain
    initial: State
    goal: Formula


@dataclass
class Policy:
    """State -> qualifying operators; first entry is the canonical choice."""

    mapping: dict[State, tuple[str, ...]]
    tie_break: str = "lexicographic"

    def chosen(self, state: State) -> str:
        return self.mapping[state][0]

    def to_doc(self) -> dict:
        entries = []
        for s in sorted(self.mapping, key=state_key):
            ops = self.mapping[s]
            entries.append(
                {
                    "atoms": sorted(str(a) for a in s),
                    "chosen": ops[0],
                    "alternatives": list(ops[1:]),
                }
            )
        return {"schema_version": 1, "tie_break": self.tie_break, "states": entries}


@dataclass(frozen=True)
class VerifyResult:
    ok: bool
    diagnosis: str | None = None

    def __bool__(self) -> bool:
        return self.ok


class _Space:
    """Reachable fragment with memoised applicability and successors."""

    def __init__(self, problem: FondProblem, fairness: Mapping[str, str], node_cap: int):
        self.problem = problem
        self.fairness = dict(fairness)
        self.states: list[State] = []
        self.applicable: dict[State, tuple[str, ...]] = {}
        self.succs: dict[tuple[State, str], tuple[State, ...]] = {}
        self.goal_states: set[State] = set()

        seen: set[State] = set()
        frontier: deque[State] = deque([problem.initial])
        seen.add(problem.initial)
        while frontier:
            s = frontier.popleft()
            self.states.append(s)
            if len(self.states) > node_cap:
                raise StateSpaceBudgetError(node_cap)
            if holds(problem.goal, s):
                self.goal_states.add(s)
                self.applicable[s] = ()
                continue  # the goal is absorbing for planning purposes
            ops = applicable_operators(problem.domain, s)
            self.applicable[s] = tuple(op.name for op in ops)
            for op in ops:
                succ = successor_states(problem.domain, s, op.name)
                self.succs[(s, op.name)] = succ
                for t in succ:
                    if t not in seen:
                        seen.add(t)
                        frontier.append(t)
        self.states.sort(key=state_key)

    def fair(self, op: str) -> bool:
        return self.fairness.get(op, FAIR) == FAIR


def _progress_fixpoint(space: _Space, safe: set[State]) -> tuple[set[State], dict[State, int]]:
    """Least fixpoint of goal-attraction inside ``safe``; returns the won
    states with the round in which each entered (goal states at rank 0)."""
    won = {s for s in space.goal_states if s in safe}
    rank = {s: 0 for s in won}
    level = 0
    while True:
        level += 1
        added = []
        for s in space.states:
            if s not in safe or s in won:
                continue
            for op in space.applicable[s]:
                succ = space.succs[(s, op)]
                if not succ or any(t not in safe for t in succ):
                    continue
                if space.fair(op):
                    if any(t in won for t in succ):
                        added.append(s)
                        break
                elif all(t in won for t in succ):
                    added.append(s)
                    break
        if not added:
            return won, rank
        for s in added:
            won.add(s)
            rank[s] = level


def solve_dual(
    problem: FondProblem,
    fairness: Mapping[str, str] | None = None,
    *,
    node_cap: int = DEFAULT_NODE_CAP,
    tie_break: Callable[[str], object] | None = None,
) -> Policy | None:
    """Synthesize a dual-FOND policy, or None when no memoryless policy
    makes every fair execution reach the goal.

    ``fairness`` maps operator names to "fair"/"unfair" (missing = fair).
    ``tie_break`` orders qualifying operators; lexicographic by default.
    """
    space = _Space(problem, fairness or {}, node_cap)
    key = tie_break or (lambda op: op)

    safe = set(space.states)
    while True:
        won, rank = _progress_fixpoint(space, safe)
        if problem.initial not in won:
            return None
        if won == safe:
            break
        safe = won

    mapping: dict[State, tuple[str, ...]] = {}
    for s in space.states:
        if s not in safe or s in space.goal_states:
            continue
        r = rank[s]
        ops = []
        for op in space.applicable[s]:
            succ = space.succs[(s, op)]
            if not succ or any(t not in safe for t in succ):
                continue
            if space.fair(op):
                if any(rank[t] < r for t in succ):
                    ops.append(op)
            elif all(rank[t] < r for t in succ):
                ops.append(op)
        ops.sort(key=key)
        mapping[s] = tuple(ops)

    # Restrict to the closure actually visited under the policy.
    reachable: set[State] = set()
    frontier = deque([problem.initial])
    reachable.add(problem.initial)
    while frontier:
        s = frontier.popleft()
        for op in mapping.get(s, ()):
            for t in space.succs[(s, op)]:
                if t not in reachable:
                    reachable.add(t)
                    frontier.append(t)
    mapping = {s: ops for s, ops in mapping.items() if s in reachable}
    label = "custom" if tie_break else "lexicographic"
    return Policy(mapping, tie_break=label)


def solve_strong_cyclic(problem: FondProblem, *, node_cap: int = DEFAULT_NODE_CAP) -> Policy | None:
    """All-fair degenerate case: classic strong-cyclic planning."""
    return solve_dual(problem, {op.name: FAIR for op in problem.domain.operators}, node_cap=node_cap)


def solve_strong(problem: FondProblem, *, node_cap: int = DEFAULT_NODE_CAP) -> Policy | None:
    """All-unfair degenerate case: strong (bounded, acyclic) planning."""
    return solve_dual(problem, {op.name: UNFAIR for op in problem.domain.operators}, node_cap=node_cap)


def verify_dual(
    policy: Policy,
    problem: FondProblem,
    fairness: Mapping[str, str] | None = None,
    *,
    node_cap: int = DEFAULT_NODE_CAP,
) -> VerifyResult:
    """Check that every fair execution under the (set-valued) policy reaches
    the goal: all policy-reachable non-goal states are mapped to applicable
    operators, and the dual of the synthesis fixpoint — action choice read
    adversarially — wins everywhere in the policy graph."""
    fairness = dict(fairness or {})
    domain = problem.domain

    def fair(op: str) -> bool:
        return fairness.get(op, FAIR) == FAIR

    reachable: list[State] = []
    succs: dict[tuple[State, str], tuple[State, ...]] = {}
    goal_states: set[State] = set()
    seen = {problem.initial}
    frontier = deque([problem.initial])
    while frontier:
        s = frontier.popleft()
        reachable.append(s)
        if len(reachable) > node_cap:
            raise StateSpaceBudgetError(node_cap)
        if holds(problem.goal, s):
            goal_states.add(s)
            continue
        ops = policy.mapping.get(s, ())
        if not ops:
            return VerifyResult(
                False, f"reachable non-goal state {{{' '.join(sorted(str(a) for a in s))}}} is unmapped"
            )
        for op in ops:
            o = domain.by_name.get(op)
            if o is None:
                return VerifyResult(False, f"policy uses unknown operator {op}")
            if not holds(o.precondition, s):
                return VerifyResult(
                    False,
                    f"policy operator {op} inapplicable in {{{' '.join(sorted(str(a) for a in s))}}}",
                )
            succ = successor_states(domain, s, op)
            succs[(s, op)] = succ
            for t in succ:
                if t not in seen:
                    seen.add(t)
                    frontier.append(t)

    reachable.sort(key=state_key)
    won = set(goal_states)
    while True:
        added = []
        for s in reachable:
            if s in won:
                continue
            qualified = True
            for op in policy.mapping.get(s, ()):
                succ = succs[(s, op)]
                if fair(op):
                    if not any(t in won for t in succ):
                        qualified = False
                        break
                elif not all(t in won for t in succ):
                    qualified = False
                    break
            if qualified:
                added.append(s)
        if not added:
            break
        won.update(added)

    for s in reachable:
        if s not in won:
            return VerifyResult(
                False,
                "adversarial resolution can avoid the goal forever from state "
                f"{{{' '.join(sorted(str(a) for a in s))}}}",
            )
    return VerifyResult(True)


def compiled_fond(compiled) -> FondProblem:
    """View a compiled multi-tier problem as a plain grounded FOND problem."""
    return FondProblem(compiled.domain, compiled.initial, compiled.goal)


# ── Tie-breaking for compiled problems ───────────────────────────────────────


def compiled_tie_break(compiled) -> Callable[[str], object]:
    """Canonical preference: goal check, then domain fair actions by source
    name, then pending-unfair resolution, then continue, then the least
    degrading degrade."""
    order = {"checkgoal": 0, "fair-act": 1, "unfair-act": 2, "explained-by": 3, "continue": 4, "degrade": 5}
    problem = compiled.source
    height = {t: len(problem.above(t)) for t in compiled.tier_ids}

    def key(op: str):
        prov = compiled.provenance.get(op)
        if prov is None:
            return (9, "", op)
        rank = order.get(prov.role, 8)
        if prov.role == "degrade":
            return (rank, height[prov.target], op)
        return (rank, prov.source or "", op)

    return key


# ── Policy graph export ──────────────────────────────────────────────────────


def export_policy_graph(
    policy: Policy,
    problem: FondProblem,
    fairness: Mapping[str, str] | None = None,
    provenance: Mapping[str, object] | None = None,
) -> dict:
    """Deterministic node/edge document for the policy's reachable graph."""
    fairness = dict(fairness or {})
    nodes: list[State] = []
    edges: list[tuple[State, str, State]] = []
    seen = {problem.initial}
    frontier = deque([problem.initial])
    while frontier:
        s = frontier.popleft()
        nodes.append(s)
        if holds(problem.goal, s):
            continue
        for op in policy.mapping.get(s, ()):
            for t in successor_states(problem.domain, s, op):
                edges.append((s, op, t))
                if t not in seen:
                    seen.add(t)
                    frontier.append(t)

    nodes.sort(key=state_key)
    ids = {s: f"n{i}" for i, s in enumerate(nodes)}
    edges.sort(key=lambda e: (state_key(e[0]), e[1], state_key(e[2])))

    def edge_doc(s: State, op: str, t: State) -> dict:
        doc = {
            "from": ids[s],
            "op": op,
            "to": ids[t],
            "fairness": fairness.get(op, FAIR),
        }
        if provenance and op in provenance:
            doc["provenance"] = provenance[op].to_doc()
        return doc

    return {
        "schema_version": 1,
        "nodes": [
            {
                "id": ids[s],
                "atoms": sorted(str(a) for a in s),
                "goal": holds(problem.goal, s),
                "initial": s == problem.initial,
            }
            for s in nodes
        ],
        "edges": [edge_doc(*e) for e in edges],
    }


def policy_graph_dot(doc: dict) -> str:
    lines = ["digraph policy {", "  rankdir=LR;"]
    for node in doc["nodes"]:
        shape = "doublecircle" if node["goal"] else "ellipse"
        style = ' style="bold"' if node.get("initial") else ""
        label = "\\n".join(node["atoms"]) or "{}"
        lines.append(f'  {node["id"]} [shape={shape}{style} label="{label}"];')
    for edge in doc["edges"]:
        style = ' style="dashed"' if edge["fairness"] == UNFAIR else ""
        lines.append(f'  {edge["from"]} -> {edge["to"]} [label="{edge["op"]}"{style}];')
    lines.append("}")
    return "\n".join(lines) + "\n"
