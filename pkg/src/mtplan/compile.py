"""Compilation of a multi-tier problem into one dual-FOND planning problem.

The compiled problem runs an iterative two-phase loop.  While the acting
flag holds, one fair per-tier copy of each source operator is available;
its branches are the tier's own plus one that raises the operator's
pending-unfair flag.  The pending flag forces the unfair twin, which
carries every branch any tier mentions, guarded so that the explicability
markers of the maximal explaining tiers are set and the acting flag drops.
Alignment then either continues at the current tier or degrades minimally,
and per-tier goal-check operators produce the single goal atom.

Bookkeeping atoms: ``eps-<tier>`` (explained-at markers), ``lvl-<tier>``
(operating tier), ``u-<family>`` (pending unfair, one per source operator
family), ``act`` and ``end``.  Flattening replaces each guarded branch
with a marker branch plus deterministic explained-by operators so the
output needs no conditional effects.
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from .errors import CompileError, ValidationFailedError
from .explic import explains
from .model import MtpProblem, validate_mtp
from .pddl import (
    FALSE,
    TRUE,
    And,
    CondEffect,
    FondDomain,
    Formula,
    GroundAtom,
    GroundOperator,
    Lit,
    Literal,
    Not,
    Or,
    State,
    Truth,
    branch_key,
    conj,
    conjuncts,
    disj,
    normalize,
)

ROLE_FAIR = "fair-act"
ROLE_UNFAIR = "unfair-act"
ROLE_CONTINUE = "continue"
ROLE_DEGRADE = "degrade"
ROLE_CHECKGOAL = "checkgoal"
ROLE_EXPLAINED = "explained-by"


@dataclass(frozen=True)
class Provenance:
    role: str
    tier: str | None = None
    source: str | None = None
    target: str | None = None

    def to_doc(self) -> dict:
        doc = {"role": self.role}
        if self.tier is not None:
            doc["tier"] = self.tier
        if self.source is not None:
            doc["source"] = self.source
        if self.target is not None:
            doc["target"] = self.target
        return doc


@dataclass
class CompiledProblem:
    source: MtpProblem
    domain: FondDomain
    initial: State
    goal: Formula
    fairness: dict[str, str]  # operator name -> "fair" | "unfair"
    provenance: dict[str, Provenance]
    tier_ids: tuple[str, ...]
    lvl: dict[str, GroundAtom]
    eps: dict[str, GroundAtom]
    u: dict[str, GroundAtom]  # family -> atom
    act: GroundAtom
    end: GroundAtom
    markers: tuple[GroundAtom, ...] = ()
    flattened: bool = False

    @property
    def base_vocabulary(self) -> frozenset:
        first = next(iter(self.source.tiers.values()))
        return first.vocabulary

    @property
    def bookkeeping_atoms(self) -> frozenset:
        out = {self.act, self.end}
        out.update(self.lvl.values())
        out.update(self.eps.values())
        out.update(self.u.values())
        out.update(self.markers)
        return frozenset(out)


def _pos(a: GroundAtom) -> Formula:
    return Lit(Literal(a))


def _neg(a: GroundAtom) -> Formula:
    return Lit(Literal(a, False))


# ── Guard simplification ─────────────────────────────────────────────────────


def _context_literals(context: Formula) -> frozenset:
    """The literal conjuncts of a context formula (non-literal parts ignored)."""
    out = set()
    for p in conjuncts(context):
        if isinstance(p, Lit):
            out.add(p.literal)
        elif isinstance(p, Not) and isinstance(p.part, Lit):
            out.add(p.part.literal.negate())
    return frozenset(out)


def _substitute(f: Formula, ctx: frozenset) -> Formula:
    if isinstance(f, Truth):
        return f
    if isinstance(f, Lit):
        if f.literal in ctx:
            return TRUE
        if f.literal.negate() in ctx:
            return FALSE
        return f
    if isinstance(f, Not):
        inner = _substitute(f.part, ctx)
        if isinstance(inner, Truth):
            return FALSE if inner.value else TRUE
        return Not(inner)
    if isinstance(f, And):
        return conj(*(_substitute(p, ctx) for p in f.parts))
    if isinstance(f, Or):
        return disj(*(_substitute(p, ctx) for p in f.parts))
    raise TypeError(f"not a formula: {f!r}")


def simplify_guard(guard: Formula, context: Formula) -> Formula:
    """Collapse guard literals entailed or contradicted by the context
    (literal-level reasoning only); equivalent to ``guard`` on every state
    satisfying ``context``."""
    return _substitute(normalize(guard), _context_literals(context))


# ── Compilation ──────────────────────────────────────────────────────────────


def compile_mtp(problem: MtpProblem) -> CompiledProblem:
    """Build the single dual-FOND problem equivalent to ``problem``.

    Raises ValidationFailedError when the multi-tier invariants fail.
    """
    report = validate_mtp(problem)
    if not report.ok:
        raise ValidationFailedError(report)

    tier_ids = problem.tier_ids
    base_vocab = problem.tiers[tier_ids[0]].vocabulary
    base_preds = {a.predicate for a in base_vocab}

    lvl = {t: GroundAtom(f"lvl-{t}") for t in tier_ids}
    eps = {t: GroundAtom(f"eps-{t}") for t in tier_ids}
    op_names = sorted(problem.tiers[tier_ids[0]].by_name)
    families: list[str] = []
    for name in op_names:
        fam = problem.tiers[tier_ids[0]].by_name[name].family
        if fam not in families:
            families.append(fam)
    u = {f: GroundAtom(f"u-{f}") for f in families}
    act = GroundAtom("act")
    end = GroundAtom("end")

    for a in (act, end, *lvl.values(), *eps.values(), *u.values()):
        if a.predicate in base_preds:
            raise CompileError(f"bookkeeping atom {a} clashes with a domain predicate")

    no_pending = tuple(_neg(u[f]) for f in families)
    not_end = _neg(end)

    operators: list[GroundOperator] = []
    fairness: dict[str, str] = {}
    provenance: dict[str, Provenance] = {}

    def add(op: GroundOperator, fair: str, prov: Provenance):
        if op.name in fairness:
            raise CompileError(f"compiled operator name {op.name} is not unique")
        operators.append(op)
        fairness[op.name] = fair
        provenance[op.name] = prov

    # Fair per-tier operators: the tier's own branches plus the pending flag.
    for tid in tier_ids:
        domain = problem.tiers[tid]
        for name in op_names:
            op = domain.by_name[name]
            pre = conj(
                *conjuncts(op.precondition),
                _pos(lvl[tid]),
                _pos(act),
                *no_pending,
                not_end,
            )
            effects = tuple(op.effects) + (frozenset({Literal(u[op.family])}),)
            add(
                GroundOperator(f"{name}_{tid}", pre, effects, family=op.family),
                "fair",
                Provenance(ROLE_FAIR, tier=tid, source=name),
            )

    # Unfair twins: every branch mentioned anywhere, with explicability guards.
    explains_memo: dict[tuple[str, str, frozenset], Formula] = {}

    def explains_at(name: str, tid: str, branch: frozenset) -> Formula:
        key = (name, tid, branch)
        if key not in explains_memo:
            explains_memo[key] = explains(name, problem.tiers[tid], branch, tid).formula
        return explains_memo[key]

    for name in op_names:
        src = problem.tiers[tier_ids[0]].by_name[name]
        universe: list[frozenset] = []
        mentions: dict[frozenset, set[str]] = {}
        for tid in tier_ids:
            for br in problem.tiers[tid].by_name[name].effects:
                if br not in mentions:
                    universe.append(br)
                    mentions[br] = set()
                mentions[br].add(tid)
        universe.sort(key=branch_key)

        pre = conj(_pos(act), _pos(u[src.family]), *conjuncts(src.precondition), not_end)
        context = pre
        branches: list[CondEffect] = []
        for br in universe:
            label = "e_" + problem.maximal(mentions[br])[0]
            cases: list[tuple[Formula, frozenset]] = []
            for tid in tier_ids:
                raw = conj(
                    explains_at(name, tid, br),
                    *(Not(explains_at(name, t2, br)) for t2 in problem.above(tid)),
                )
                guard = simplify_guard(raw, context)
                if guard == FALSE:
                    continue
                certain = _context_literals(context) | _context_literals(guard)
                lits = frozenset(l for l in br if l not in certain) | {Literal(eps[tid])}
                cases.append((guard, lits))
            if not cases:
                raise CompileError(f"no tier explains branch {sorted(map(str, br))} of {name}")
            branches.append(CondEffect(tuple(cases), label=label))

        add(
            GroundOperator(
                f"{name}_unfair",
                pre,
                tuple(branches),
                family=src.family,
                always=frozenset({Literal(act, False), Literal(u[src.family], False)}),
            ),
            "unfair",
            Provenance(ROLE_UNFAIR, source=name),
        )

    clear_eps = frozenset(Literal(eps[t], False) for t in tier_ids)

    # Alignment: continue at the current tier when it (or a refinement of it)
    # explains the last effect.
    for tid in tier_ids:
        pre = conj(
            _neg(act),
            _pos(lvl[tid]),
            disj(*(_pos(eps[t]) for t in problem.at_or_above(tid))),
            not_end,
        )
        eff = frozenset({Literal(act)}) | clear_eps
        add(
            GroundOperator(f"continue_{tid}", pre, (eff,)),
            "fair",
            Provenance(ROLE_CONTINUE, tier=tid),
        )

    # Degradation: one operator per strict pair, enabled by the target tier's
    # marker or a marker above the target that is unrelated to the current
    # tier (non-linear orders); markers between target and current are left
    # to the less-degrading operator.
    for low, high in problem.strict_pairs():
        enabled = tuple(
            t
            for t in tier_ids
            if problem.leq(low, t)
            and not problem.leq(high, t)
            and not (problem.leq(t, high) and t != low)
        )
        pre = conj(
            _neg(act),
            _pos(lvl[high]),
            disj(*(_pos(eps[t]) for t in enabled)),
            not_end,
        )
        eff = frozenset({Literal(lvl[high], False), Literal(lvl[low]), Literal(act)}) | clear_eps
        add(
            GroundOperator(f"degrade_{high}_{low}", pre, (eff,)),
            "fair",
            Provenance(ROLE_DEGRADE, tier=high, target=low),
        )

    # Goal check per tier.  The acting-phase and no-pending conjuncts keep
    # goal claims out of half-resolved unfair steps and alignment states.
    for tid in tier_ids:
        goal = problem.goals[tid]
        pre = conj(*conjuncts(goal), _pos(lvl[tid]), _pos(act), *no_pending, not_end)
        add(
            GroundOperator(f"checkgoal_{tid}", pre, (frozenset({Literal(end)}),)),
            "fair",
            Provenance(ROLE_CHECKGOAL, tier=tid),
        )

    operators.sort(key=lambda o: o.name)
    vocabulary = frozenset(
        base_vocab | {act, end} | set(lvl.values()) | set(eps.values()) | set(u.values())
    )
    initial = frozenset(problem.initial | {lvl[problem.top], act})

    return CompiledProblem(
        source=problem,
        domain=FondDomain(f"{problem.name or 'mtp'}-compiled", vocabulary, tuple(operators)),
        initial=initial,
        goal=_pos(end),
        fairness=fairness,
        provenance=provenance,
        tier_ids=tier_ids,
        lvl=lvl,
        eps=eps,
        u=u,
        act=act,
        end=end,
    )


# ── Flattening ───────────────────────────────────────────────────────────────


def flatten(compiled: CompiledProblem) -> CompiledProblem:
    """Replace guarded branches by marker branches plus deterministic
    explained-by operators; the result has no conditional effects and its
    executions match the guarded form step for step once marker states are
    contracted."""
    if not any(op.conditional for op in compiled.domain.operators):
        return compiled

    problem = compiled.source
    fairness = dict(compiled.fairness)
    provenance = dict(compiled.provenance)
    all_markers: list[GroundAtom] = []
    not_end = _neg(compiled.end)

    new_ops: list[GroundOperator] = []
    pending: list[tuple[GroundOperator, tuple[frozenset, ...]]] = []
    family_markers: dict[str, list[GroundAtom]] = {}
    for op in compiled.domain.operators:
        if not op.conditional:
            new_ops.append(op)
            continue
        src_name = compiled.provenance[op.name].source
        src_pre = problem.tiers[compiled.tier_ids[0]].by_name[src_name].precondition
        marker_branches: list[frozenset] = []
        for br in op.effects:
            marker = GroundAtom(f"eff_{br.label}_{src_name}")
            if marker in compiled.domain.vocabulary or marker in all_markers:
                raise CompileError(f"marker atom {marker} is not unique")
            all_markers.append(marker)
            family_markers.setdefault(op.family, []).append(marker)
            marker_branches.append(frozenset({Literal(marker)}))
            for guard, lits in br.cases:
                tid = _case_tier(compiled, lits)
                ex_name = f"{src_name}_{br.label}_explained_by_{tid}"
                eff = frozenset(lits | op.always | {Literal(marker, False)})
                ex_op = GroundOperator(
                    ex_name,
                    conj(_pos(marker), *conjuncts(guard), *conjuncts(src_pre), not_end),
                    (eff,),
                    family=op.family,
                )
                if ex_name in fairness:
                    raise CompileError(f"explained-by operator name {ex_name} is not unique")
                new_ops.append(ex_op)
                fairness[ex_name] = "fair"
                provenance[ex_name] = Provenance(ROLE_EXPLAINED, tier=tid, source=src_name)
        pending.append((op, tuple(marker_branches)))

    # The pending-unfair flag is shared by every ground instance of a family,
    # so a sibling instance's unfair twin stays applicable during the marker
    # micro-phase; block the whole family's markers to force resolution.
    for op, marker_branches in pending:
        blockers = tuple(_neg(m) for m in family_markers[op.family])
        new_ops.append(
            GroundOperator(
                op.name,
                conj(*conjuncts(op.precondition), *blockers),
                marker_branches,
                family=op.family,
            )
        )

    # Marker states keep the pending-unfair atom raised, so every operator
    # other than the branch's own explained-by ones is already blocked.
    operators = new_ops
    operators.sort(key=lambda o: o.name)
    vocabulary = frozenset(compiled.domain.vocabulary | set(all_markers))
    return replace(
        compiled,
        domain=FondDomain(compiled.domain.name + "-flat", vocabulary, tuple(operators)),
        fairness=fairness,
        provenance=provenance,
        markers=tuple(all_markers),
        flattened=True,
    )


def _case_tier(compiled: CompiledProblem, lits: frozenset) -> str:
    for tid, a in compiled.eps.items():
        if Literal(a) in lits:
            return tid
    raise CompileError("conditional case sets no explicability marker")


# ── Documents ────────────────────────────────────────────────────────────────


def _predicate_decls(compiled: CompiledProblem) -> list[str]:
    """Predicate declarations recovered from the compiled vocabulary; slot
    types come from the manifest objects when they are unambiguous."""
    objects = compiled.source.objects
    slots: dict[str, list[set[str]]] = {}
    for a in sorted(compiled.domain.vocabulary):
        slot = slots.setdefault(a.predicate, [set() for _ in a.args])
        for i, arg in enumerate(a.args):
            slot[i].add(objects.get(arg, "object"))
    decls = []
    for pred in sorted(slots):
        params = []
        for i, types in enumerate(slots[pred]):
            t = next(iter(types)) if len(types) == 1 else "object"
            params.append(f"?x{i} - {t}")
        decls.append(f"({pred}{' ' + ' '.join(params) if params else ''})")
    return decls


def _objects_by_type(objects: dict[str, str]) -> list[str]:
    by_type: dict[str, list[str]] = {}
    for obj, t in sorted(objects.items()):
        by_type.setdefault(t, []).append(obj)
    return [f"{' '.join(objs)} - {t}" for t, objs in sorted(by_type.items())]


def domain_pddl(compiled: CompiledProblem, mode: str | None = None) -> str:
    """The compiled domain as a self-contained PDDL file (declarations
    included); flattened problems print plain oneof effects."""
    from . import pddl as pddlmod

    if mode is None:
        mode = pddlmod.ONEOF if compiled.flattened else pddlmod.ONEOF_CONDITIONAL
    body = pddlmod.print_domain(compiled.domain, mode)
    header_extra = []
    objects = compiled.source.objects
    types = sorted(set(objects.values()))
    if types:
        header_extra.append(f"  (:types {' '.join(types)})")
    if objects:
        header_extra.append(f"  (:constants {' '.join(_objects_by_type(objects))})")
    header_extra.append("  (:predicates " + " ".join(_predicate_decls(compiled)) + ")")
    lines = body.splitlines()
    # body starts with (define ...) and (:requirements ...); insert after those
    return "\n".join(lines[:2] + header_extra + lines[2:]) + "\n"


def problem_pddl(compiled: CompiledProblem) -> str:
    name = compiled.source.name or "mtp"
    lines = [f"(define (problem {name}-problem)", f"  (:domain {compiled.domain.name})"]
    objects = compiled.source.objects
    if objects:
        lines.append(f"  (:objects {' '.join(_objects_by_type(objects))})")
    init = " ".join(sorted(str(a) for a in compiled.initial))
    lines.append(f"  (:init {init})")
    lines.append(f"  (:goal ({compiled.end.predicate})))")
    return "\n".join(lines) + "\n"


def fairness_doc(compiled: CompiledProblem) -> dict:
    return {
        "schema_version": 1,
        "unfair": sorted(n for n, f in compiled.fairness.items() if f == "unfair"),
        "fair": sorted(n for n, f in compiled.fairness.items() if f == "fair"),
        "provenance": {n: compiled.provenance[n].to_doc() for n in sorted(compiled.provenance)},
    }
