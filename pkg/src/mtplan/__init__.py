"""Multi-tier adaptive planning toolkit.

Validate a ranked family of FOND planning domains, compile them into a
single dual-FOND problem, synthesize and verify a multi-tier controller,
and simulate its execution with graceful degradation across tiers.
"""

from .compile import CompiledProblem, compile_mtp, flatten, simplify_guard
from .errors import MtplanError
from .explic import ExplainsFormula, explains, successor_oracle
from .model import (
    Execution,
    FondDomain,
    GroundOperator,
    MtpProblem,
    ValidationReport,
    check_execution_refinement,
    check_oneof_refinement,
    load_manifest,
    successor_states,
    validate_mtp,
)
from .mtc import MtController, TriggerMap, extract_mtc, triggering_states, verify_mtc
from .pddl import GroundAtom, Literal, State, ground, parse_domain, print_domain
from .sim import SimSession, Trace, classify_transition, run_session
from .solve import (
    FondProblem,
    Policy,
    solve_dual,
    solve_strong,
    solve_strong_cyclic,
    verify_dual,
)

__version__ = "0.1.0"
