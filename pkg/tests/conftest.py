from __future__ import annotations

import dataclasses
import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from mtplan import model, pddl, solve
from mtplan import mtc as mtcmod
from mtplan.compile import compile_mtp

SCENARIO = Path(__file__).resolve().parents[1] / "scenarios" / "nonrunning"

ACCEPTANCE_LOG: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LOG:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LOG:
            terminalreporter.write_line(line)


@pytest.fixture(scope="session")
def nonrunning() -> model.MtpProblem:
    return model.load_manifest(SCENARIO / "manifest.json")


@pytest.fixture(scope="session")
def scratched(nonrunning) -> model.MtpProblem:
    return dataclasses.replace(
        nonrunning, initial=frozenset(nonrunning.initial | {pddl.atom("scratch")})
    )


@pytest.fixture(scope="session")
def relaxed(scratched) -> model.MtpProblem:
    goals = dict(scratched.goals)
    goals["d3"] = pddl.parse_condition_text("(and (at c0) (not (broken)))")
    return dataclasses.replace(scratched, goals=goals)


def solve_compiled(compiled):
    return solve.solve_dual(
        solve.compiled_fond(compiled),
        compiled.fairness,
        tie_break=solve.compiled_tie_break(compiled),
    )


@pytest.fixture(scope="session")
def compiled(nonrunning):
    return compile_mtp(nonrunning)


@pytest.fixture(scope="session")
def policy(compiled):
    result = solve_compiled(compiled)
    assert result is not None
    return result


@pytest.fixture(scope="session")
def controller(policy, compiled):
    return mtcmod.extract_mtc(policy, compiled)
