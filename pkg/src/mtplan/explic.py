"""Effect explicability: when can a tier account for an observed effect?

Builds the per-operator explicability condition as a disjunction over the
tier's effect branches of conjunctions over the symmetric difference of
literal sets: an observed effect matches a branch if every literal one set
has and the other lacks was already true beforehand.  A disjunct whose two
sets are inconsistent collapses to false; an exact branch match makes the
whole condition true.  The brute-force successor-membership oracle is the
independent check for the construction.
"""

from __future__ import annotations

from dataclasses import dataclass

from .errors import InconsistentLiteralsError
from .model import successor_states
from .pddl import (
    FALSE,
    TRUE,
    CondEffect,
    FondDomain,
    Formula,
    Lit,
    Literal,
    State,
    conj,
    consistent,
    disj,
    sort_literals,
)
from .model import get_operator


@dataclass(frozen=True)
class ExplainsFormula:
    """Condition for an operator in one tier to explain an observed effect."""

    operator: str
    tier: str
    observed: frozenset  # frozenset[Literal]
    formula: Formula


def _branch_disjunct(observed: frozenset, branch: frozenset) -> Formula:
    delta = observed ^ branch
    if not consistent(delta):
        return FALSE
    if not delta:
        return TRUE
    return conj(*(Lit(l) for l in sort_literals(delta)))


def explains(op_name: str, tier: FondDomain, observed, tier_id: str = "") -> ExplainsFormula:
    """The explicability condition of ``observed`` for ``op_name`` in ``tier``.

    ``observed`` is a set of effect literals (typically one oneof branch).
    False disjuncts are dropped and an exact branch match collapses the
    formula to constant true.
    """
    observed = frozenset(observed)
    if not consistent(observed):
        raise InconsistentLiteralsError(
            f"observed literal set for {op_name} contains a literal and its complement"
        )
    op = get_operator(tier, op_name)
    disjuncts: list[Formula] = []
    for branch in op.effects:
        if isinstance(branch, CondEffect):
            raise InconsistentLiteralsError(
                f"operator {op_name} has conditional effects; explicability is defined on plain branches"
            )
        d = _branch_disjunct(observed, branch)
        if d == TRUE:
            return ExplainsFormula(op_name, tier_id or tier.name, observed, TRUE)
        if d != FALSE and d not in disjuncts:
            disjuncts.append(d)
    return ExplainsFormula(op_name, tier_id or tier.name, observed, disj(*disjuncts))


def successor_oracle(tier: FondDomain, state: State, op_name: str, successor: State) -> bool:
    """Brute-force transition-membership oracle: is ``successor`` a possible
    result of executing ``op_name`` in ``state`` under this tier?"""
    return successor in successor_states(tier, state, op_name)
