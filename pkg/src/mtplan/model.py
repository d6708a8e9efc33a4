"""Grounded FOND semantics and the multi-tier problem structure.

Successor computation, bounded execution enumeration, syntactic
oneof-refinement and bounded execution-refinement checks, lattice
validation of multi-tier problems, and the JSON tier-manifest loader.
Everything is immutable after construction and safe to share.
"""

from __future__ import annotations

import json
from collections import deque
from dataclasses import dataclass, field
from functools import cached_property
from pathlib import Path
from typing import Callable, Iterable, Mapping

from . import pddl
from .errors import (
    ManifestError,
    PreconditionViolatedError,
    UnknownOperatorError,
)
from .pddl import (
    CondEffect,
    FondDomain,
    Formula,
    GroundOperator,
    Literal,
    State,
    conjuncts,
    holds,
    literal_conjuncts,
    normalize,
    state_key,
)

SCHEMA_VERSION = 1


# ── Successor semantics ──────────────────────────────────────────────────────


def apply_literals(state: State, literals: Iterable[Literal]) -> State:
    dels = {l.atom for l in literals if not l.positive}
    adds = {l.atom for l in literals if l.positive}
    return frozenset((state - dels) | adds)


def _failing_conjunct(pre: Formula, state: State) -> str:
    for part in conjuncts(pre):
        if not holds(part, state):
            return pddl.format_condition(part)
    return pddl.format_condition(pre)


def get_operator(domain: FondDomain, name: str) -> GroundOperator:
    op = domain.by_name.get(name)
    if op is None:
        raise UnknownOperatorError(f"unknown operator {name} in domain {domain.name or '<anonymous>'}")
    return op


def successor_states(domain: FondDomain, state: State, op_name: str) -> tuple[State, ...]:
    """All possible successors of applying ``op_name`` in ``state``.

    One state per oneof branch (satisfied guarded cases all fire for
    conditional branches), deduplicated and canonically ordered.
    """
    op = get_operator(domain, op_name)
    if not holds(op.precondition, state):
        raise PreconditionViolatedError(op.name, f"{_failing_conjunct(op.precondition, state)} fails")
    out: set[State] = set()
    for br in op.effects:
        if isinstance(br, CondEffect):
            fired: set[Literal] = set(op.always)
            for guard, lits in br.cases:
                if holds(guard, state):
                    fired |= lits
            out.add(apply_literals(state, fired))
        else:
            out.add(apply_literals(state, op.always | br))
    return tuple(sorted(out, key=state_key))


def applicable_operators(domain: FondDomain, state: State) -> tuple[GroundOperator, ...]:
    return tuple(op for op in domain.operators if holds(op.precondition, state))


def transition_legal(domain: FondDomain, state: State, op_name: str, successor: State) -> bool:
    """True iff ``successor`` can result from executing ``op_name`` in ``state``."""
    return successor in successor_states(domain, state, op_name)


# ── Executions ───────────────────────────────────────────────────────────────


@dataclass(frozen=True)
class Execution:
    """Alternating state/operator sequence s0 o0 s1 ... (finite prefix)."""

    states: tuple[State, ...]
    operators: tuple[str, ...]

    def __post_init__(self):
        if len(self.states) != len(self.operators) + 1:
            raise ValueError("an execution needs one more state than operators")

    @property
    def last(self) -> State:
        return self.states[-1]

    def extend(self, op: str, state: State) -> Execution:
        return Execution(self.states + (state,), self.operators + (op,))

    def render(self) -> str:
        parts = ["{" + " ".join(sorted(str(a) for a in self.states[0])) + "}"]
        for op, s in zip(self.operators, self.states[1:]):
            parts.append(op)
            parts.append("{" + " ".join(sorted(str(a) for a in s)) + "}")
        return " ".join(parts)

    def legal_in(self, domain: FondDomain) -> bool:
        for s, op, t in zip(self.states, self.operators, self.states[1:]):
            if op not in domain.by_name or not holds(domain.by_name[op].precondition, s):
                return False
            if not transition_legal(domain, s, op, t):
                return False
        return True


def executions_upto(domain: FondDomain, start: State, depth: int) -> Iterable[Execution]:
    """Every execution of length <= depth from ``start``, breadth first."""
    frontier: deque[Execution] = deque([Execution((start,), ())])
    while frontier:
        ex = frontier.popleft()
        yield ex
        if len(ex.operators) >= depth:
            continue
        for op in applicable_operators(domain, ex.last):
            for succ in successor_states(domain, ex.last, op.name):
                frontier.append(ex.extend(op.name, succ))


# ── Refinement checks ────────────────────────────────────────────────────────


@dataclass(frozen=True)
class RefinementWitness:
    reason: str
    operator: str | None = None
    branch: frozenset | None = None

    def render(self) -> str:
        msg = self.reason
        if self.operator:
            msg += f" (operator {self.operator}"
            if self.branch is not None:
                msg += ", branch " + " ".join(str(l) for l in pddl.sort_literals(self.branch))
            msg += ")"
        return msg


def check_oneof_refinement(
    lower: FondDomain, higher: FondDomain
) -> tuple[bool, RefinementWitness | None]:
    """True iff ``higher`` is an oneof-refinement of ``lower``: same
    vocabulary and operator names, identical preconditions (compared as
    canonical formulas), and every higher-tier branch set is a subset of
    the lower-tier one.  On failure returns the first offending witness."""
    if lower.vocabulary != higher.vocabulary:
        return False, RefinementWitness("vocabularies differ")
    lower_ops = {op.name for op in lower.operators}
    higher_ops = {op.name for op in higher.operators}
    if lower_ops != higher_ops:
        missing = sorted(lower_ops ^ higher_ops)
        return False, RefinementWitness(f"operator sets differ: {', '.join(missing)}")
    for hop in higher.operators:
        lop = lower.by_name[hop.name]
        if normalize(hop.precondition) != normalize(lop.precondition):
            return False, RefinementWitness("preconditions differ", operator=hop.name)
        lower_branches = set(br for br in lop.effects if isinstance(br, frozenset))
        for br in hop.effects:
            if br not in lower_branches:
                return False, RefinementWitness(
                    "effect branch missing from lower tier", operator=hop.name, branch=br
                )
    return True, None


def check_execution_refinement(
    lower: FondDomain, higher: FondDomain, start: State, depth: int
) -> tuple[bool, Execution | None]:
    """Bounded check that every execution of ``higher`` from ``start`` of
    length <= depth is also an execution of ``lower``; returns a shortest
    counterexample otherwise."""
    if depth < 0:
        raise ValueError("depth must be >= 0")
    frontier: deque[Execution] = deque([Execution((start,), ())])
    while frontier:
        ex = frontier.popleft()
        if len(ex.operators) >= depth:
            continue
        for op in applicable_operators(higher, ex.last):
            legal_lower = (
                op.name in lower.by_name
                and holds(lower.by_name[op.name].precondition, ex.last)
            )
            lower_succs = (
                set(successor_states(lower, ex.last, op.name)) if legal_lower else set()
            )
            for succ in successor_states(higher, ex.last, op.name):
                nxt = ex.extend(op.name, succ)
                if succ not in lower_succs:
                    return False, nxt
                frontier.append(nxt)
    return True, None


# ── Multi-tier problems ──────────────────────────────────────────────────────


@dataclass
class MtpProblem:
    """A ranked family of FOND domains with per-tier goals.

    ``tiers`` preserves insertion order, which doubles as the canonical
    tier order for all deterministic tie-breaking.  ``order`` lists
    (lower, higher) pairs whose reflexive-transitive closure is <=.
    """

    name: str
    tiers: dict[str, FondDomain]
    order: tuple[tuple[str, str], ...]
    initial: State
    goals: dict[str, Formula]
    objects: dict[str, str] = field(default_factory=dict)
    statics: frozenset = frozenset()

    @property
    def tier_ids(self) -> tuple[str, ...]:
        return tuple(self.tiers)

    @cached_property
    def _leq(self) -> frozenset:
        """Reflexive-transitive closure of ``order`` as (low, high) pairs."""
        ids = list(self.tiers)
        reach = {(t, t) for t in ids}
        reach |= {(a, b) for a, b in self.order if a in self.tiers and b in self.tiers}
        changed = True
        while changed:
            changed = False
            for a, b in list(reach):
                for c, d in list(reach):
                    if b == c and (a, d) not in reach:
                        reach.add((a, d))
                        changed = True
        return frozenset(reach)

    def leq(self, low: str, high: str) -> bool:
        return (low, high) in self._leq

    def lt(self, low: str, high: str) -> bool:
        return low != high and self.leq(low, high)

    def above(self, tier: str) -> tuple[str, ...]:
        return tuple(t for t in self.tiers if self.lt(tier, t))

    def below(self, tier: str) -> tuple[str, ...]:
        return tuple(t for t in self.tiers if self.lt(t, tier))

    def at_or_above(self, tier: str) -> tuple[str, ...]:
        return tuple(t for t in self.tiers if self.leq(tier, t))

    @cached_property
    def top(self) -> str:
        greatest = [t for t in self.tiers if all(self.leq(u, t) for u in self.tiers)]
        if len(greatest) != 1:
            raise ManifestError("tier order has no unique greatest element")
        return greatest[0]

    @cached_property
    def bottom(self) -> str:
        least = [t for t in self.tiers if all(self.leq(t, u) for u in self.tiers)]
        if len(least) != 1:
            raise ManifestError("tier order has no unique minimum element")
        return least[0]

    def maximal(self, ids: Iterable[str]) -> tuple[str, ...]:
        ids = list(ids)
        return tuple(t for t in self.tiers if t in ids and not any(self.lt(t, u) for u in ids))

    def strict_pairs(self) -> tuple[tuple[str, str], ...]:
        """All (lower, higher) pairs with lower < higher, canonical order."""
        return tuple(
            (a, b) for a in self.tiers for b in self.tiers if self.lt(a, b)
        )


def explaining_tiers(problem: MtpProblem, state: State, op_name: str, successor: State) -> frozenset:
    """The set of tier ids whose transition relation admits (state, op, successor)."""
    out = set()
    checked_pre = False
    for tid, domain in problem.tiers.items():
        op = get_operator(domain, op_name)
        if not checked_pre:
            if not holds(op.precondition, state):
                raise PreconditionViolatedError(op.name, f"{_failing_conjunct(op.precondition, state)} fails")
            checked_pre = True
        if successor in successor_states(domain, state, op_name):
            out.add(tid)
    return frozenset(out)


# ── Validation ───────────────────────────────────────────────────────────────


@dataclass(frozen=True)
class Finding:
    code: str
    message: str

    def to_doc(self) -> dict:
        return {"code": self.code, "message": self.message}


@dataclass(frozen=True)
class ValidationReport:
    findings: tuple[Finding, ...]

    @property
    def ok(self) -> bool:
        return not self.findings

    def render(self) -> str:
        if self.ok:
            return "valid: no findings"
        return "\n".join(f"[{f.code}] {f.message}" for f in self.findings)

    def to_doc(self) -> dict:
        return {
            "schema_version": SCHEMA_VERSION,
            "ok": self.ok,
            "findings": [f.to_doc() for f in self.findings],
        }


def validate_mtp(problem: MtpProblem) -> ValidationReport:
    """Check the multi-tier lattice invariants; findings, never exceptions."""
    findings: list[Finding] = []

    for a, b in problem.order:
        for t in (a, b):
            if t not in problem.tiers:
                findings.append(Finding("unknown-tier", f"order mentions unknown tier {t}"))
    if findings:
        return ValidationReport(tuple(findings))

    for a in problem.tier_ids:
        for b in problem.tier_ids:
            if a < b and problem.leq(a, b) and problem.leq(b, a):
                findings.append(
                    Finding("not-a-partial-order", f"tiers {a} and {b} are mutually below each other")
                )
    if findings:
        return ValidationReport(tuple(findings))

    greatest = [t for t in problem.tiers if all(problem.leq(u, t) for u in problem.tiers)]
    if len(greatest) != 1:
        findings.append(Finding("no-greatest-element", "order lacks a unique greatest tier"))
    least = [t for t in problem.tiers if all(problem.leq(t, u) for u in problem.tiers)]
    if len(least) != 1:
        findings.append(Finding("no-minimum-element", "order lacks a unique minimum tier"))

    ids = problem.tier_ids
    vocab0 = problem.tiers[ids[0]].vocabulary
    for t in ids[1:]:
        if problem.tiers[t].vocabulary != vocab0:
            diff = sorted(str(a) for a in problem.tiers[t].vocabulary ^ vocab0)
            findings.append(
                Finding("vocabulary-mismatch", f"tier {t} vocabulary differs from {ids[0]}: {' '.join(diff)}")
            )

    names0 = {op.name for op in problem.tiers[ids[0]].operators}
    for t in ids[1:]:
        names = {op.name for op in problem.tiers[t].operators}
        if names != names0:
            findings.append(
                Finding(
                    "operator-set-mismatch",
                    f"tier {t} operators differ from {ids[0]}: {', '.join(sorted(names ^ names0))}",
                )
            )
    if not any(f.code == "operator-set-mismatch" for f in findings):
        for name in sorted(names0):
            pres = {t: normalize(problem.tiers[t].by_name[name].precondition) for t in ids}
            if len(set(pres.values())) > 1:
                findings.append(
                    Finding("precondition-drift", f"operator {name} has differing preconditions across tiers")
                )
            fams = {problem.tiers[t].by_name[name].family for t in ids}
            if len(fams) > 1:
                findings.append(
                    Finding("family-drift", f"operator {name} has differing families across tiers")
                )

    for low, high in problem.strict_pairs():
        ok, witness = check_oneof_refinement(problem.tiers[low], problem.tiers[high])
        if not ok:
            findings.append(
                Finding(
                    "refinement-failure",
                    f"tier {high} is not an oneof-refinement of {low}: {witness.render()}",
                )
            )

    for a in problem.initial:
        if a not in vocab0:
            findings.append(Finding("initial-outside-vocabulary", f"initial atom {a} not in vocabulary"))

    for t in ids:
        goal = problem.goals.get(t)
        if goal is None:
            findings.append(Finding("missing-goal", f"tier {t} has no goal"))
            continue
        lits = literal_conjuncts(goal)
        if lits is None:
            findings.append(Finding("goal-not-literal-conjunction", f"tier {t} goal is not a conjunction of literals"))
            continue
        for l in lits:
            if l.atom not in vocab0:
                findings.append(Finding("goal-outside-vocabulary", f"tier {t} goal atom {l.atom} not in vocabulary"))

    return ValidationReport(tuple(findings))


# ── Manifest loading ─────────────────────────────────────────────────────────


def load_manifest_data(
    data: Mapping,
    read_file: Callable[[str], str],
    name: str = "",
) -> MtpProblem:
    """Build an MtpProblem from a manifest mapping; domain files are fetched
    through ``read_file`` so the same loader serves disk and HTTP uploads."""
    try:
        tier_entries = list(data["tiers"])
        order = tuple((str(a).lower(), str(b).lower()) for a, b in data.get("order", []))
        objects_raw = data.get("objects", {})
        init_raw = list(data.get("init", []))
        statics_raw = list(data.get("statics", []))
    except (KeyError, TypeError, ValueError) as exc:
        raise ManifestError(f"malformed manifest: {exc}") from exc
    if not tier_entries:
        raise ManifestError("manifest declares no tiers")

    objects = pddl._object_map(objects_raw)
    statics = frozenset(pddl.parse_atom_text(s) for s in statics_raw)
    initial = frozenset(pddl.parse_atom_text(s) for s in init_raw)

    tiers: dict[str, FondDomain] = {}
    goals: dict[str, Formula] = {}
    for entry in tier_entries:
        try:
            tid = str(entry["id"]).lower()
            domain_file = entry["domain_file"]
        except (KeyError, TypeError) as exc:
            raise ManifestError(f"malformed tier entry: {entry!r}") from exc
        if tid in tiers:
            raise ManifestError(f"duplicate tier id {tid}")
        schema = pddl.parse_domain(read_file(domain_file), filename=domain_file)
        domain = pddl.ground(schema, objects, statics, name=tid)
        goal_text = entry.get("goal")
        if goal_text is not None:
            goal = pddl.parse_condition_text(goal_text)
        elif schema.goal is not None:
            goal = pddl.parse_condition_text(
                "(and " + " ".join(str(l) for l in schema.goal) + ")"
            )
        else:
            raise ManifestError(f"tier {tid} has no goal (neither manifest nor domain file)")
        goal_atoms = pddl.atoms_of(goal)
        tiers[tid] = FondDomain(
            name=domain.name,
            vocabulary=frozenset(domain.vocabulary | goal_atoms | initial),
            operators=domain.operators,
        )
        goals[tid] = goal

    return MtpProblem(
        name=name or str(data.get("name", "")),
        tiers=tiers,
        order=order,
        initial=initial,
        goals=goals,
        objects=objects,
        statics=statics,
    )


def load_manifest(path: str | Path) -> MtpProblem:
    path = Path(path)
    try:
        data = json.loads(path.read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise ManifestError(f"{path}: not valid JSON: {exc}") from exc
    base = path.parent

    def read_file(rel: str) -> str:
        return (base / rel).read_text(encoding="utf-8")

    return load_manifest_data(data, read_file, name=str(data.get("name", path.stem)))


# ── Canonical serialization ──────────────────────────────────────────────────


def state_to_list(state: State) -> list[str]:
    return sorted(str(a) for a in state)


def state_from_list(atoms: Iterable[str]) -> State:
    return frozenset(pddl.parse_atom_text(a) for a in atoms)
