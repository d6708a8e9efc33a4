"""Acceptance suite: one test per criterion, each printing a verdict line.

Run with ``pytest tests/test_acceptance.py -v`` (the verdict lines bypass
capture so they are visible either way).
"""

from __future__ import annotations

import json
import random
import time

from mtplan import sim, solve
from mtplan.compile import compile_mtp
from mtplan.explic import explains
from mtplan.mtc import extract_mtc, verify_mtc
from mtplan.model import (
    check_execution_refinement,
    check_oneof_refinement,
    successor_states,
    validate_mtp,
)
from mtplan.pddl import Literal, holds
from mtplan.solve import compiled_fond, compiled_tie_break, solve_dual, verify_dual

from _gen import (
    brute_force_dual_solvable,
    random_domain,
    random_goal,
    random_mtp,
    random_refinement,
    random_state,
)
from conftest import ACCEPTANCE_LOG

BUDGET_SECONDS = 10.0


def report(criterion: int, ok: bool, detail: str) -> None:
    line = f"ACCEPTANCE {criterion}: {'PASS' if ok else 'FAIL'} - {detail}"
    ACCEPTANCE_LOG.append(line)
    print(line)
    assert ok, detail


def pipeline(problem):
    compiled = compile_mtp(problem)
    policy = solve_dual(
        compiled_fond(compiled), compiled.fairness, tie_break=compiled_tie_break(compiled)
    )
    return compiled, policy


def test_criterion_1_end_to_end_no_running(nonrunning):
    start = time.perf_counter()
    assert validate_mtp(nonrunning).ok
    compiled, policy = pipeline(nonrunning)
    assert policy is not None
    controller = extract_mtc(policy, compiled)
    verdict = verify_mtc(nonrunning, controller)
    elapsed = time.perf_counter() - start
    selected = {op for ops in policy.mapping.values() for op in ops}
    no_running = not any(name.startswith("run") for name in selected)
    report(
        1,
        verdict.ok and no_running and elapsed < BUDGET_SECONDS,
        f"validate/compile/solve/extract/verify in {elapsed:.2f}s, "
        f"{len(policy.mapping)} policy states, run actions selected: "
        f"{sorted(n for n in selected if n.startswith('run')) or 'none'}",
    )


def test_criterion_2_scratched_start_unsolvable(scratched):
    start = time.perf_counter()
    compiled, policy = pipeline(scratched)
    elapsed = time.perf_counter() - start
    report(
        2,
        policy is None and elapsed < BUDGET_SECONDS,
        f"scratched initial state declared {'UNSOLVABLE' if policy is None else 'solvable'} "
        f"in {elapsed:.2f}s",
    )


def test_criterion_3_relaxed_goal_degrades_only_to_weakest(relaxed):
    start = time.perf_counter()
    compiled, policy = pipeline(relaxed)
    assert policy is not None
    controller = extract_mtc(policy, compiled)
    assert verify_mtc(relaxed, controller).ok
    session = sim.SimSession(relaxed, controller, "d1")
    (action,) = session.prescribed()
    outcomes = {
        tuple(sorted(str(a) for a in c.successor)): c.degrade_to for c in session.choices(action)
    }
    elapsed = time.perf_counter() - start
    advance = outcomes[("(at c1)", "(scratch)")]
    stay = outcomes[("(at c2)", "(scratch)")]
    report(
        3,
        advance is None and stay == "d1" and elapsed < BUDGET_SECONDS,
        f"scratch-with-advance degrade target: {advance}; stay-in-place: {stay}; "
        f"{elapsed:.2f}s",
    )


def test_criterion_4_explicability_oracle_agreement():
    rng = random.Random(20240)
    mismatches = 0
    checks = 0
    for _ in range(200):
        domain = random_domain(rng, n_atoms=rng.randint(3, 6), max_branches=3)
        atoms = sorted(domain.vocabulary)
        states = [
            frozenset(a for i, a in enumerate(atoms) if bits >> i & 1)
            for bits in range(1 << len(atoms))
        ]
        for op in domain.operators:
            formulas = {}
            for s in states:
                if not holds(op.precondition, s):
                    continue
                succ = set(successor_states(domain, s, op.name))
                for s2 in states:
                    observed = frozenset(
                        {Literal(a) for a in s2 - s} | {Literal(a, False) for a in s - s2}
                    )
                    if observed not in formulas:
                        formulas[observed] = explains(op.name, domain, observed).formula
                    checks += 1
                    if holds(formulas[observed], s) != (s2 in succ):
                        mismatches += 1
    report(
        4,
        mismatches == 0 and checks > 100_000,
        f"{checks} explicability/oracle comparisons over 200 domains, {mismatches} mismatches",
    )


def test_criterion_5_refinement_suite(nonrunning):
    rng = random.Random(31337)
    failures = 0
    for _ in range(200):
        lower = random_domain(rng, n_atoms=rng.randint(3, 6))
        higher = random_refinement(rng, lower)
        assert check_oneof_refinement(lower, higher)[0]
        ok, _ = check_execution_refinement(lower, higher, random_state(rng, lower), 4)
        if not ok:
            failures += 1
    start = nonrunning.initial
    tiers = nonrunning.tiers
    forward = [
        check_execution_refinement(tiers[low], tiers[high], start, 4)[0]
        for low, high in [("d2", "d3"), ("d1", "d2"), ("d1", "d3")]
    ]
    reverse = [
        check_execution_refinement(tiers[low], tiers[high], start, 4)[0]
        for low, high in [("d3", "d2"), ("d2", "d1"), ("d3", "d1")]
    ]
    report(
        5,
        failures == 0 and all(forward) and not any(reverse),
        f"200 random refinement pairs, {failures} depth-4 violations; chain inclusions "
        f"{forward}, reverse inclusions {reverse}",
    )


def test_criterion_6_solver_matches_policy_enumeration():
    rng = random.Random(60606)
    disagreements = 0
    solvable = 0
    for _ in range(100):
        domain = random_domain(rng, n_atoms=rng.randint(3, 7), n_ops=2)
        problem = solve.FondProblem(domain, random_state(rng, domain), random_goal(rng, domain))
        fairness = {op.name: rng.choice(["fair", "unfair"]) for op in domain.operators}
        policy = solve_dual(problem, fairness)
        if policy is not None:
            solvable += 1
            assert verify_dual(policy, problem, fairness).ok
        if (policy is not None) != brute_force_dual_solvable(problem, fairness):
            disagreements += 1
    report(
        6,
        disagreements == 0,
        f"100 random dual problems vs exhaustive policy enumeration, "
        f"{solvable} solvable, {disagreements} verdict disagreements",
    )


def test_criterion_7_extraction_soundness_on_random_mtps():
    rng = random.Random(70707)
    solved = 0
    attempts = 0
    failures = 0
    while solved < 50 and attempts < 1500:
        attempts += 1
        problem = random_mtp(rng, n_atoms=rng.randint(3, 6))
        if not validate_mtp(problem).ok:
            continue
        compiled, policy = pipeline(problem)
        if policy is None:
            continue
        solved += 1
        controller = extract_mtc(policy, compiled)
        if not verify_mtc(problem, controller).ok:
            failures += 1
    report(
        7,
        solved == 50 and failures == 0,
        f"{solved} solvable random multi-tier problems ({attempts} attempts), "
        f"{failures} extraction verification failures",
    )


def test_criterion_8_count_laws(nonrunning, compiled):
    bookkeeping = compiled.domain.vocabulary - compiled.base_vocabulary
    degrades = [n for n, p in compiled.provenance.items() if p.role == "degrade"]
    n_tiers = len(nonrunning.tier_ids)
    n_ops = len(nonrunning.tiers["d1"].operators)
    expected_ops = n_tiers * n_ops + n_ops + n_tiers + len(nonrunning.strict_pairs()) + n_tiers
    ok = (
        len(bookkeeping) == 10
        and len(degrades) == 3
        and len(compiled.domain.operators) == expected_ops == 29
    )
    report(
        8,
        ok,
        f"bookkeeping atoms = {len(bookkeeping)}, degrade operators = {len(degrades)}, "
        f"total operators = {len(compiled.domain.operators)} (law: {expected_ops})",
    )


def test_criterion_9_scripted_walkthrough_byte_identical(nonrunning, controller):
    def run(script):
        trace = sim.run_session(nonrunning, controller, "d1", sim.ScriptedChooser(script))
        return json.dumps(trace.to_doc(), indent=2, sort_keys=True)

    advance_a, advance_b = run([1, 0]), run([1, 0])
    stay_a, stay_b = run([0, 2, 1]), run([0, 2, 1])
    doc = json.loads(advance_a)
    advance_shape = [e["event"] for e in doc["events"]] == ["degrade", "step", "goal"] and doc[
        "events"
    ][0]["degrade_to"] == "d2"
    stay_doc = json.loads(stay_a)
    stay_shape = [e["event"] for e in stay_doc["events"]] == [
        "step",
        "degrade",
        "step",
        "goal",
    ] and stay_doc["events"][1]["degrade_to"] == "d1"
    report(
        9,
        advance_a == advance_b and stay_a == stay_b and advance_shape and stay_shape,
        "two scripted walkthrough sessions reproduce byte-identical traces "
        f"(degrade targets d2/d1: {advance_shape and stay_shape})",
    )
