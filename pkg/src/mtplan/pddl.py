"""PDDL subset for non-deterministic STRIPS domains with `oneof` effects.

Covers the grounded vocabulary (atoms, literals, formulas), a tolerant
s-expression parser that accepts full `(define (domain ...))` files as well
as bare fragments of `(:action ...)` / `(:goal ...)` forms, grounding of
action schemas over typed objects with static-predicate elimination, and
printing back to PDDL text.  Conditional `(when ...)` effects are rejected
on input and produced only by the compiler's printer.

All symbols are lower-cased on read.  Everything built here is immutable
and canonically ordered so downstream output is byte-reproducible.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property
from itertools import product
from typing import Iterable, Mapping, Union

from .errors import (
    GroundingError,
    PddlSyntaxError,
    UnknownObjectError,
    UnknownTypeError,
    UnsupportedConstructError,
)

# ── Grounded vocabulary ──────────────────────────────────────────────────────


@dataclass(frozen=True, order=True)
class GroundAtom:
    """A propositional state variable, e.g. ``(at c2)`` or ``(scratch)``."""

    predicate: str
    args: tuple[str, ...] = ()

    def __str__(self) -> str:
        return "(" + " ".join((self.predicate,) + self.args) + ")"


@dataclass(frozen=True, order=True)
class Literal:
    atom: GroundAtom
    positive: bool = True

    def negate(self) -> Literal:
        return Literal(self.atom, not self.positive)

    def __str__(self) -> str:
        return str(self.atom) if self.positive else f"(not {self.atom})"


def atom(predicate: str, *args: str) -> GroundAtom:
    return GroundAtom(predicate, tuple(args))


def lit(predicate: str, *args: str, positive: bool = True) -> Literal:
    return Literal(GroundAtom(predicate, tuple(args)), positive)


State = frozenset  # frozenset[GroundAtom]; the atoms true in the state


def state_key(state: Iterable[GroundAtom]) -> tuple[str, ...]:
    """Canonical sort key for a state: the sorted atom strings."""
    return tuple(sorted(str(a) for a in state))


def sort_literals(literals: Iterable[Literal]) -> tuple[Literal, ...]:
    return tuple(sorted(literals, key=lambda l: (l.atom, not l.positive)))


def branch_key(branch: Iterable[Literal]) -> tuple:
    return tuple((l.atom, not l.positive) for l in sort_literals(branch))


def consistent(literals: Iterable[Literal]) -> bool:
    """True iff no literal occurs together with its complement."""
    seen: dict[GroundAtom, bool] = {}
    for l in literals:
        if seen.setdefault(l.atom, l.positive) != l.positive:
            return False
    return True


# ── Formulas ─────────────────────────────────────────────────────────────────


class Formula:
    """Boolean condition over ground atoms; subclasses are frozen values."""

    __slots__ = ()


@dataclass(frozen=True)
class Truth(Formula):
    value: bool


TRUE = Truth(True)
FALSE = Truth(False)


@dataclass(frozen=True)
class Lit(Formula):
    literal: Literal


@dataclass(frozen=True)
class And(Formula):
    parts: tuple[Formula, ...]


@dataclass(frozen=True)
class Or(Formula):
    parts: tuple[Formula, ...]


@dataclass(frozen=True)
class Not(Formula):
    part: Formula


def conj(*parts: Formula) -> Formula:
    flat = [p for p in parts if p != TRUE]
    if any(p == FALSE for p in flat):
        return FALSE
    if not flat:
        return TRUE
    if len(flat) == 1:
        return flat[0]
    return And(tuple(flat))


def disj(*parts: Formula) -> Formula:
    flat = [p for p in parts if p != FALSE]
    if any(p == TRUE for p in flat):
        return TRUE
    if not flat:
        return FALSE
    if len(flat) == 1:
        return flat[0]
    return Or(tuple(flat))


def lit_formula(l: Literal) -> Formula:
    return Lit(l)


def holds(f: Formula, state: State) -> bool:
    """Evaluate a formula over a state; total for all formula trees."""
    if isinstance(f, Truth):
        return f.value
    if isinstance(f, Lit):
        return (f.literal.atom in state) == f.literal.positive
    if isinstance(f, And):
        return all(holds(p, state) for p in f.parts)
    if isinstance(f, Or):
        return any(holds(p, state) for p in f.parts)
    if isinstance(f, Not):
        return not holds(f.part, state)
    raise TypeError(f"not a formula: {f!r}")


def atoms_of(f: Formula) -> frozenset[GroundAtom]:
    if isinstance(f, Truth):
        return frozenset()
    if isinstance(f, Lit):
        return frozenset((f.literal.atom,))
    if isinstance(f, Not):
        return atoms_of(f.part)
    if isinstance(f, (And, Or)):
        out: set[GroundAtom] = set()
        for p in f.parts:
            out |= atoms_of(p)
        return frozenset(out)
    raise TypeError(f"not a formula: {f!r}")


def normalize(f: Formula) -> Formula:
    """Canonical form: negations pushed to literals, and/or flattened,
    duplicates dropped, parts sorted, constants folded.  Used for
    structural comparison; operators keep their construction order."""
    if isinstance(f, Truth):
        return f
    if isinstance(f, Lit):
        return f
    if isinstance(f, Not):
        inner = normalize(f.part)
        if isinstance(inner, Truth):
            return FALSE if inner.value else TRUE
        if isinstance(inner, Lit):
            return Lit(inner.literal.negate())
        if isinstance(inner, Not):
            return inner.part
        if isinstance(inner, And):
            return normalize(Or(tuple(Not(p) for p in inner.parts)))
        if isinstance(inner, Or):
            return normalize(And(tuple(Not(p) for p in inner.parts)))
        return Not(inner)
    if isinstance(f, (And, Or)):
        is_and = isinstance(f, And)
        absorb, neutral = (FALSE, TRUE) if is_and else (TRUE, FALSE)
        flat: list[Formula] = []
        for p in f.parts:
            q = normalize(p)
            if q == absorb:
                return absorb
            if q == neutral:
                continue
            if isinstance(q, And if is_and else Or):
                flat.extend(q.parts)
            else:
                flat.append(q)
        seen: list[Formula] = []
        for q in sorted(flat, key=format_condition):
            if not seen or seen[-1] != q:
                seen.append(q)
        lits = {q.literal for q in seen if isinstance(q, Lit)}
        if any(l.negate() in lits for l in lits):
            return absorb
        if not seen:
            return neutral
        if len(seen) == 1:
            return seen[0]
        return (And if is_and else Or)(tuple(seen))
    raise TypeError(f"not a formula: {f!r}")


def conjuncts(f: Formula) -> tuple[Formula, ...]:
    """Flattened conjuncts of a formula (the formula itself if not an And)."""
    if isinstance(f, And):
        out: list[Formula] = []
        for p in f.parts:
            out.extend(conjuncts(p))
        return tuple(out)
    if f == TRUE:
        return ()
    return (f,)


def literal_conjuncts(f: Formula) -> tuple[Literal, ...] | None:
    """The literals of a conjunction-of-literals formula, else None."""
    out: list[Literal] = []
    for p in conjuncts(f):
        if isinstance(p, Lit):
            out.append(p.literal)
        elif isinstance(p, Not) and isinstance(p.part, Lit):
            out.append(p.part.literal.negate())
        else:
            return None
    return tuple(out)


def format_condition(f: Formula) -> str:
    if isinstance(f, Truth):
        return "(true)" if f.value else "(false)"
    if isinstance(f, Lit):
        return str(f.literal)
    if isinstance(f, And):
        return "(and " + " ".join(format_condition(p) for p in f.parts) + ")"
    if isinstance(f, Or):
        return "(or " + " ".join(format_condition(p) for p in f.parts) + ")"
    if isinstance(f, Not):
        return f"(not {format_condition(f.part)})"
    raise TypeError(f"not a formula: {f!r}")


# ── Ground operators and domains ─────────────────────────────────────────────


@dataclass(frozen=True)
class CondEffect:
    """A oneof branch made of guarded literal sets; guards are evaluated in
    the application state and every satisfied case fires."""

    cases: tuple[tuple[Formula, frozenset[Literal]], ...]
    label: str = ""


Branch = Union[frozenset, CondEffect]  # frozenset[Literal] | CondEffect


@dataclass(frozen=True)
class GroundOperator:
    name: str
    precondition: Formula
    effects: tuple[Branch, ...]
    # source schema name, grouping ground instances; provenance metadata
    # rather than operator identity, hence excluded from comparison
    family: str = field(default="", compare=False)
    always: frozenset = frozenset()  # literals applied on every branch

    def __post_init__(self):
        if not self.effects:
            raise GroundingError(f"operator {self.name} has no effect branches")
        for br in self.effects:
            if isinstance(br, frozenset) and not consistent(br):
                raise GroundingError(f"operator {self.name} has an inconsistent branch")
        if not self.family:
            object.__setattr__(self, "family", self.name)

    @property
    def conditional(self) -> bool:
        return any(isinstance(br, CondEffect) for br in self.effects)


@dataclass(frozen=True)
class FondDomain:
    name: str
    vocabulary: frozenset  # frozenset[GroundAtom]
    operators: tuple[GroundOperator, ...]

    @cached_property
    def by_name(self) -> dict[str, GroundOperator]:
        return {op.name: op for op in self.operators}


# ── Schema-level (lifted) domain ─────────────────────────────────────────────


@dataclass(frozen=True)
class Parameter:
    name: str
    type: str = "object"


@dataclass(frozen=True)
class SchemaAtom:
    predicate: str
    args: tuple[str, ...] = ()  # ?variables or constants

    def __str__(self) -> str:
        return "(" + " ".join((self.predicate,) + self.args) + ")"


@dataclass(frozen=True)
class SchemaLiteral:
    atom: SchemaAtom
    positive: bool = True

    def __str__(self) -> str:
        return str(self.atom) if self.positive else f"(not {self.atom})"


SchemaClause = tuple  # tuple[SchemaLiteral, ...]: disjunction; singleton = literal


@dataclass(frozen=True)
class SchemaAction:
    name: str
    parameters: tuple[Parameter, ...]
    precondition: tuple[SchemaClause, ...]  # conjunction of literal clauses
    effects: tuple[tuple[SchemaLiteral, ...], ...]  # oneof branches


@dataclass(frozen=True)
class SchemaDomain:
    name: str  # "" for bare fragments
    types: tuple[str, ...]  # declared; () when the file had no :types
    predicates: tuple[tuple[str, tuple[Parameter, ...]], ...]  # declared
    constants: tuple[Parameter, ...]
    actions: tuple[SchemaAction, ...]
    goal: tuple[SchemaLiteral, ...] | None = None


# ── S-expression reader ──────────────────────────────────────────────────────


class Sym(str):
    """Symbol token; remembers its source position for error messages."""

    line: int
    col: int

    def __new__(cls, value: str, line: int, col: int):
        s = super().__new__(cls, value)
        s.line = line
        s.col = col
        return s


SExpr = Union[Sym, list]


def _pos(node: SExpr) -> tuple[int, int]:
    if isinstance(node, Sym):
        return node.line, node.col
    if isinstance(node, list) and node:
        return _pos(node[0])
    return 0, 0


def read_sexprs(text: str, filename: str = "<string>") -> list[SExpr]:
    """Tokenise and read all top-level s-expressions (';' comments allowed)."""
    line, col, i, n = 1, 1, 0, len(text)
    stack: list[list] = []
    top: list[SExpr] = []

    def emit(node: SExpr):
        if stack:
            stack[-1].append(node)
        else:
            top.append(node)

    open_pos: list[tuple[int, int]] = []
    while i < n:
        ch = text[i]
        if ch == "\n":
            line += 1
            col = 1
            i += 1
            continue
        if ch in " \t\r":
            i += 1
            col += 1
            continue
        if ch == ";":
            while i < n and text[i] != "\n":
                i += 1
            continue
        if ch == "(":
            new: list = []
            if stack:
                stack[-1].append(new)
            else:
                top.append(new)
            stack.append(new)
            open_pos.append((line, col))
            i += 1
            col += 1
            continue
        if ch == ")":
            if not stack:
                raise PddlSyntaxError("unbalanced ')'", filename, line, col)
            stack.pop()
            open_pos.pop()
            i += 1
            col += 1
            continue
        j = i
        c0 = col
        while j < n and text[j] not in " \t\r\n();":
            j += 1
            col += 1
        emit(Sym(text[i:j].lower(), line, c0))
        i = j
    if stack:
        l, c = open_pos[-1]
        raise PddlSyntaxError("unbalanced '('", filename, l, c)
    return top


# ── Domain parsing ───────────────────────────────────────────────────────────

_NUMERIC_HEADS = {"increase", "decrease", "assign", "scale-up", "scale-down", "="}


def _err(msg: str, node: SExpr, filename: str) -> PddlSyntaxError:
    l, c = _pos(node)
    return PddlSyntaxError(msg, filename, l, c)


def _unsupported(construct: str, node: SExpr, filename: str) -> UnsupportedConstructError:
    l, c = _pos(node)
    return UnsupportedConstructError(construct, filename, l, c)


def _parse_typed_list(items: list, filename: str) -> tuple[Parameter, ...]:
    """Parse ``a b - t c - u`` into Parameters (default type 'object')."""
    out: list[Parameter] = []
    pending: list[str] = []
    i = 0
    while i < len(items):
        tok = items[i]
        if not isinstance(tok, Sym):
            raise _err("expected a name in typed list", tok, filename)
        if tok == "-":
            if i + 1 >= len(items) or not isinstance(items[i + 1], Sym):
                raise _err("expected a type after '-'", tok, filename)
            t = str(items[i + 1])
            out.extend(Parameter(p, t) for p in pending)
            pending = []
            i += 2
            continue
        pending.append(str(tok))
        i += 1
    out.extend(Parameter(p, "object") for p in pending)
    return tuple(out)


def _parse_schema_atom(node: SExpr, filename: str) -> SchemaAtom:
    if not isinstance(node, list) or not node or not isinstance(node[0], Sym):
        raise _err("expected an atom", node, filename)
    head = str(node[0])
    if head in _NUMERIC_HEADS:
        raise _unsupported("numeric fluent", node, filename)
    args = []
    for a in node[1:]:
        if not isinstance(a, Sym):
            raise _err("atom arguments must be names", a, filename)
        args.append(str(a))
    return SchemaAtom(head, tuple(args))


def _parse_schema_literal(node: SExpr, filename: str) -> SchemaLiteral:
    if isinstance(node, list) and node and node[0] == "not":
        if len(node) != 2:
            raise _err("(not ...) takes one argument", node, filename)
        return SchemaLiteral(_parse_schema_atom(node[1], filename), positive=False)
    return SchemaLiteral(_parse_schema_atom(node, filename))


def _parse_literal_conjunction(node: SExpr, filename: str, what: str) -> tuple[SchemaLiteral, ...]:
    """Conjunctive formulas only: literal | (and lit*) | ()."""
    if isinstance(node, list) and (not node or node[0] == "and"):
        items = node[1:] if node else []
        return tuple(_parse_schema_literal(it, filename) for it in items)
    if isinstance(node, list) and node and isinstance(node[0], Sym):
        head = str(node[0])
        if head in ("or", "imply", "forall", "exists", "when", "oneof"):
            raise _unsupported(f"{head} in {what}", node, filename)
    return (_parse_schema_literal(node, filename),)


def _parse_precondition(node: SExpr, filename: str) -> tuple[SchemaClause, ...]:
    """CNF with literal clauses: literal | (or lit*) | (and clause*) | ()."""

    def clause(n: SExpr) -> SchemaClause:
        if isinstance(n, list) and n and n[0] == "or":
            if len(n) < 2:
                raise _err("(or ...) needs at least one literal", n, filename)
            return tuple(_parse_schema_literal(it, filename) for it in n[1:])
        if isinstance(n, list) and n and isinstance(n[0], Sym):
            head = str(n[0])
            if head in ("imply", "forall", "exists", "when", "oneof"):
                raise _unsupported(f"{head} in precondition", n, filename)
        return (_parse_schema_literal(n, filename),)

    if isinstance(node, list) and (not node or node[0] == "and"):
        return tuple(clause(it) for it in (node[1:] if node else []))
    return (clause(node),)


def _parse_effect_branch(node: SExpr, filename: str) -> tuple[SchemaLiteral, ...]:
    if isinstance(node, list) and node and isinstance(node[0], Sym):
        head = str(node[0])
        if head == "when":
            raise _unsupported("conditional effect", node, filename)
        if head == "oneof":
            raise _unsupported("nested oneof", node, filename)
        if head in ("forall", "exists", "or"):
            raise _unsupported(f"{head} in effect", node, filename)
    return _parse_literal_conjunction(node, filename, "effect")


def _parse_effects(node: SExpr, filename: str) -> tuple[tuple[SchemaLiteral, ...], ...]:
    if isinstance(node, list) and node and node[0] == "oneof":
        if len(node) < 2:
            raise _err("oneof needs at least one branch", node, filename)
        return tuple(_parse_effect_branch(br, filename) for br in node[1:])
    return (_parse_effect_branch(node, filename),)


def _parse_action(form: list, filename: str) -> SchemaAction:
    if len(form) < 2 or not isinstance(form[1], Sym):
        raise _err("(:action ...) needs a name", form, filename)
    name = str(form[1])
    params: tuple[Parameter, ...] = ()
    precondition: tuple[SchemaClause, ...] = ()
    effects: tuple[tuple[SchemaLiteral, ...], ...] | None = None
    i = 2
    while i < len(form):
        key = form[i]
        if not isinstance(key, Sym) or not key.startswith(":"):
            raise _err(f"expected an :action keyword, got {key!r}", key, filename)
        if i + 1 >= len(form):
            raise _err(f"missing value for {key}", key, filename)
        val = form[i + 1]
        if key == ":parameters":
            if not isinstance(val, list):
                raise _err(":parameters expects a list", val, filename)
            params = _parse_typed_list(val, filename)
            for p in params:
                if not p.name.startswith("?"):
                    raise _err(f"parameter {p.name} must start with '?'", key, filename)
        elif key == ":precondition":
            precondition = _parse_precondition(val, filename)
        elif key == ":effect":
            effects = _parse_effects(val, filename)
        else:
            raise _unsupported(f"{key} in action", key, filename)
        i += 2
    if effects is None:
        raise _err(f"action {name} has no :effect", form, filename)
    return SchemaAction(name, params, precondition, effects)


def parse_domain(text: str, filename: str = "<string>") -> SchemaDomain:
    """Parse PDDL text into a SchemaDomain.

    Accepts a full ``(define (domain n) ...)`` form or a bare sequence of
    ``(:action ...)`` / ``(:goal ...)`` / declaration forms, as in the
    common fragment style.  Raises PddlSyntaxError (with position) or
    UnsupportedConstructError for constructs outside the subset.
    """
    forms = read_sexprs(text, filename)
    name = ""
    if len(forms) == 1 and isinstance(forms[0], list) and forms[0] and forms[0][0] == "define":
        define = forms[0]
        if len(define) < 2 or not isinstance(define[1], list) or len(define[1]) != 2 or define[1][0] != "domain":
            raise _err("expected (define (domain <name>) ...)", define, filename)
        name = str(define[1][1])
        forms = define[2:]

    types: tuple[str, ...] = ()
    predicates: list[tuple[str, tuple[Parameter, ...]]] = []
    constants: tuple[Parameter, ...] = ()
    actions: list[SchemaAction] = []
    goal: tuple[SchemaLiteral, ...] | None = None

    for form in forms:
        if not isinstance(form, list) or not form or not isinstance(form[0], Sym):
            raise _err("expected a (:keyword ...) form", form, filename)
        head = str(form[0])
        if head == ":requirements":
            continue
        if head == ":types":
            # flat type list; '- parent' entries are kept as plain types
            types = tuple(dict.fromkeys(str(t) for t in form[1:] if isinstance(t, Sym) and t != "-"))
        elif head == ":predicates":
            for decl in form[1:]:
                if not isinstance(decl, list) or not decl or not isinstance(decl[0], Sym):
                    raise _err("bad predicate declaration", decl, filename)
                predicates.append((str(decl[0]), _parse_typed_list(decl[1:], filename)))
        elif head == ":constants":
            constants = _parse_typed_list(form[1:], filename)
        elif head == ":action":
            actions.append(_parse_action(form, filename))
        elif head == ":goal":
            if len(form) != 2:
                raise _err("(:goal ...) takes one formula", form, filename)
            goal = _parse_literal_conjunction(form[1], filename, "goal")
        else:
            raise _unsupported(head, form, filename)

    seen: set[str] = set()
    for act in actions:
        if act.name in seen:
            raise PddlSyntaxError(f"duplicate action name {act.name}", filename)
        seen.add(act.name)

    schema = SchemaDomain(name, types, tuple(predicates), constants, tuple(actions), goal)
    _check_declarations(schema, filename)
    return schema


def _check_declarations(schema: SchemaDomain, filename: str) -> None:
    """When :predicates / :types are declared they are authoritative."""
    declared_preds = {p: len(params) for p, params in schema.predicates}

    def check_atom(a: SchemaAtom, where: str):
        if schema.predicates and a.predicate not in declared_preds:
            raise PddlSyntaxError(f"undeclared predicate {a.predicate} in {where}", filename)
        if schema.predicates and len(a.args) != declared_preds[a.predicate]:
            raise PddlSyntaxError(
                f"predicate {a.predicate} used with {len(a.args)} arguments, declared with {declared_preds[a.predicate]}",
                filename,
            )

    for act in schema.actions:
        if schema.types:
            for p in act.parameters:
                if p.type not in schema.types and p.type != "object":
                    raise PddlSyntaxError(f"undeclared type {p.type} in action {act.name}", filename)
        for clause in act.precondition:
            for l in clause:
                check_atom(l.atom, f"action {act.name} precondition")
        for br in act.effects:
            for l in br:
                check_atom(l.atom, f"action {act.name} effect")
    if schema.goal:
        for l in schema.goal:
            check_atom(l.atom, "goal")


# ── Grounding ────────────────────────────────────────────────────────────────


def _object_map(objects) -> dict[str, str]:
    if isinstance(objects, Mapping):
        return {str(k).lower(): str(v).lower() for k, v in objects.items()}
    return {str(n).lower(): str(t).lower() for n, t in objects}


def ground(
    schema: SchemaDomain,
    objects,
    statics: Iterable[GroundAtom] = (),
    name: str | None = None,
) -> FondDomain:
    """Ground a schema over typed objects, compiling static atoms away.

    ``statics`` fixes the truth value of its predicates once and for all:
    static preconditions are evaluated (operators with a false one are
    dropped) and removed; a static predicate occurring in an effect is an
    error.  Ground operators come out in lexicographic name order and the
    vocabulary enumerates every non-static predicate over the objects.
    """
    objmap = _object_map(objects)
    for const in schema.constants:
        objmap.setdefault(const.name, const.type)
    static_atoms = frozenset(statics)
    static_preds = {a.predicate for a in static_atoms}

    by_type: dict[str, list[str]] = {}
    for obj, t in sorted(objmap.items()):
        by_type.setdefault(t, []).append(obj)

    known_types = set(by_type) | set(schema.types) | {"object"}

    def objects_of(t: str) -> list[str]:
        if t == "object":
            return sorted(objmap)
        if t not in known_types:
            raise UnknownTypeError(f"unknown type: {t}")
        return by_type.get(t, [])

    # Predicate slot types: declared when available, else inferred from use.
    slot_types: dict[str, list[set[str]]] = {}
    arities: dict[str, int] = {}

    def note_usage(a: SchemaAtom, param_types: dict[str, str]):
        if a.predicate in arities and arities[a.predicate] != len(a.args):
            raise GroundingError(f"predicate {a.predicate} used with inconsistent arity")
        arities.setdefault(a.predicate, len(a.args))
        slots = slot_types.setdefault(a.predicate, [set() for _ in a.args])
        for i, arg in enumerate(a.args):
            if arg.startswith("?"):
                slots[i].add(param_types.get(arg, "object"))
            else:
                if arg not in objmap:
                    raise UnknownObjectError(f"unknown object: {arg}")
                slots[i].add(objmap[arg])

    for act in schema.actions:
        ptypes = {p.name: p.type for p in act.parameters}
        for clause in act.precondition:
            for l in clause:
                note_usage(l.atom, ptypes)
        for br in act.effects:
            for l in br:
                if l.atom.predicate in static_preds:
                    raise GroundingError(
                        f"static predicate {l.atom.predicate} appears in an effect of {act.name}"
                    )
                note_usage(l.atom, ptypes)
    if schema.goal:
        for l in schema.goal:
            note_usage(l.atom, {})
    for pred, params in schema.predicates:
        arities.setdefault(pred, len(params))
        slots = slot_types.setdefault(pred, [set() for _ in params])
        for i, p in enumerate(params):
            slots[i].add(p.type)

    operators: list[GroundOperator] = []
    for act in schema.actions:
        domains = [objects_of(p.type) for p in act.parameters]
        for binding in product(*domains):
            subst = {p.name: v for p, v in zip(act.parameters, binding)}

            def ground_atom(a: SchemaAtom) -> GroundAtom:
                args = []
                for arg in a.args:
                    if arg.startswith("?"):
                        if arg not in subst:
                            raise GroundingError(f"unbound variable {arg} in action {act.name}")
                        args.append(subst[arg])
                    else:
                        if arg not in objmap:
                            raise UnknownObjectError(f"unknown object: {arg}")
                        args.append(arg)
                return GroundAtom(a.predicate, tuple(args))

            pre_clauses: list[Formula] = []
            statics_ok = True
            for schema_clause in act.precondition:
                fluent: list[Literal] = []
                clause_true = False
                for l in schema_clause:
                    ga = ground_atom(l.atom)
                    if ga.predicate in static_preds:
                        if (ga in static_atoms) == l.positive:
                            clause_true = True
                            break
                    else:
                        fluent.append(Literal(ga, l.positive))
                if clause_true:
                    continue  # a satisfied static literal discharges the clause
                if not fluent:
                    statics_ok = False  # clause is statically false
                    break
                pre_clauses.append(disj(*(Lit(l) for l in fluent)))
            if not statics_ok:
                continue

            branches: list[frozenset] = []
            for br in act.effects:
                branch = frozenset(Literal(ground_atom(l.atom), l.positive) for l in br)
                if not consistent(branch):
                    raise GroundingError(f"inconsistent effect branch in action {act.name}")
                if branch not in branches:
                    branches.append(branch)
            branches.sort(key=branch_key)

            op_name = act.name + ("_" + "_".join(binding) if binding else "")
            operators.append(
                GroundOperator(
                    name=op_name,
                    precondition=conj(*pre_clauses),
                    effects=tuple(branches),
                    family=act.name,
                )
            )

    operators.sort(key=lambda o: o.name)

    vocabulary: set[GroundAtom] = set()
    for pred, slots in slot_types.items():
        if pred in static_preds:
            continue
        pools = []
        for cands in slots:
            pool: set[str] = set()
            for t in cands:
                pool.update(objects_of(t))
            pools.append(sorted(pool))
        for combo in product(*pools):
            vocabulary.add(GroundAtom(pred, tuple(combo)))
    for op in operators:
        vocabulary |= atoms_of(op.precondition)
        for br in op.effects:
            if isinstance(br, frozenset):
                vocabulary |= {l.atom for l in br}

    return FondDomain(
        name=name if name is not None else schema.name,
        vocabulary=frozenset(vocabulary),
        operators=tuple(operators),
    )


def parse_atom_text(text: str, filename: str = "<string>") -> GroundAtom:
    """Parse one ground atom, with or without parens: ``(at c2)`` or ``at c2``."""
    stripped = text.strip()
    if not stripped.startswith("("):
        stripped = "(" + stripped + ")"
    forms = read_sexprs(stripped, filename)
    if len(forms) != 1:
        raise PddlSyntaxError(f"expected a single atom, got: {text!r}", filename)
    a = _parse_schema_atom(forms[0], filename)
    for arg in a.args:
        if arg.startswith("?"):
            raise PddlSyntaxError(f"atom {text!r} is not ground", filename)
    return GroundAtom(a.predicate, a.args)


def parse_condition_text(text: str, filename: str = "<string>") -> Formula:
    """Parse a ground conjunction-of-literals condition such as a tier goal."""
    forms = read_sexprs(text, filename)
    if len(forms) != 1:
        raise PddlSyntaxError(f"expected a single condition, got: {text!r}", filename)
    lits = _parse_literal_conjunction(forms[0], filename, "condition")
    ground_lits = []
    for l in lits:
        for arg in l.atom.args:
            if arg.startswith("?"):
                raise PddlSyntaxError(f"condition {text!r} is not ground", filename)
        ground_lits.append(Literal(GroundAtom(l.atom.predicate, l.atom.args), l.positive))
    return conj(*(Lit(l) for l in ground_lits))


# ── Printing ─────────────────────────────────────────────────────────────────

ONEOF = "oneof"
ONEOF_CONDITIONAL = "oneof+conditional"


def _fmt_branch_literals(literals: Iterable[Literal]) -> str:
    ls = sort_literals(literals)
    if len(ls) == 1:
        return str(ls[0])
    return "(and " + " ".join(str(l) for l in ls) + ")"


def _fmt_case(guard: Formula, literals: frozenset) -> str:
    return f"(when {format_condition(guard)} {_fmt_branch_literals(literals)})"


def _fmt_effect(op: GroundOperator, mode: str) -> str:
    branch_txt: list[str] = []
    for br in op.effects:
        if isinstance(br, CondEffect):
            if mode != ONEOF_CONDITIONAL:
                raise UnsupportedConstructError(f"conditional effect in {mode} mode")
            cases = [_fmt_case(g, ls) for g, ls in br.cases]
            branch_txt.append(cases[0] if len(cases) == 1 else "(and " + " ".join(cases) + ")")
        else:
            branch_txt.append(_fmt_branch_literals(br))
    body = branch_txt[0] if len(branch_txt) == 1 else "(oneof\n      " + "\n      ".join(branch_txt) + ")"
    if op.always:
        always = " ".join(str(l) for l in sort_literals(op.always))
        return f"(and {always}\n    {body})"
    return body


def print_domain(domain, mode: str = ONEOF) -> str:
    """Render a SchemaDomain or a (possibly compiled) FondDomain as PDDL text.

    In ``oneof`` mode the output re-parses to a structurally equal domain;
    ``oneof+conditional`` additionally allows the compiler's guarded
    effects (output only).
    """
    if mode not in (ONEOF, ONEOF_CONDITIONAL):
        raise ValueError(f"unknown print mode: {mode}")
    if isinstance(domain, SchemaDomain):
        return _print_schema(domain)
    if isinstance(domain, FondDomain):
        return _print_ground(domain, mode)
    raise TypeError(f"cannot print {type(domain).__name__}")


def _fmt_params(params: Iterable[Parameter]) -> str:
    return " ".join(f"{p.name} - {p.type}" for p in params)


def _print_schema(schema: SchemaDomain) -> str:
    out: list[str] = []
    indent = ""
    if schema.name:
        out.append(f"(define (domain {schema.name})")
        out.append("  (:requirements :strips :typing :non-deterministic)")
        indent = "  "
    if schema.types:
        out.append(f"{indent}(:types {' '.join(schema.types)})")
    if schema.predicates:
        decls = " ".join(
            f"({p}{' ' + _fmt_params(params) if params else ''})" for p, params in schema.predicates
        )
        out.append(f"{indent}(:predicates {decls})")
    if schema.constants:
        out.append(f"{indent}(:constants {_fmt_params(schema.constants)})")
    for act in schema.actions:
        lines = [f"{indent}(:action {act.name}"]
        if act.parameters:
            lines.append(f"{indent}  :parameters ({_fmt_params(act.parameters)})")
        if act.precondition:
            parts = [
                str(c[0]) if len(c) == 1 else "(or " + " ".join(str(l) for l in c) + ")"
                for c in act.precondition
            ]
            pre = " ".join(parts)
            lines.append(f"{indent}  :precondition {pre if len(parts) == 1 else '(and ' + pre + ')'}")
        branches = []
        for br in act.effects:
            txt = " ".join(str(l) for l in br)
            branches.append(txt if len(br) == 1 else "(and " + txt + ")")
        eff = branches[0] if len(branches) == 1 else "(oneof " + " ".join(branches) + ")"
        lines.append(f"{indent}  :effect {eff})")
        out.append("\n".join(lines))
    if schema.goal is not None:
        txt = " ".join(str(l) for l in schema.goal)
        out.append(f"{indent}(:goal {txt if len(schema.goal) == 1 else '(and ' + txt + ')'})")
    if schema.name:
        out.append(")")
    return "\n".join(out) + "\n"


def _print_ground(domain: FondDomain, mode: str) -> str:
    out = [f"(define (domain {domain.name or 'domain'})"]
    out.append("  (:requirements :strips :non-deterministic)")
    for op in domain.operators:
        lines = [f"  (:action {op.name}"]
        pre_parts = conjuncts(op.precondition)
        if pre_parts:
            pre = " ".join(format_condition(p) for p in pre_parts)
            lines.append(f"    :precondition {pre if len(pre_parts) == 1 else '(and ' + pre + ')'}")
        lines.append(f"    :effect {_fmt_effect(op, mode)})")
        out.append("\n".join(lines))
    out.append(")")
    return "\n".join(out) + "\n"
