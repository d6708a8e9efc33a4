"""Exception types shared across the toolkit."""

from __future__ import annotations


class MtplanError(Exception):
    """Base class for all toolkit errors."""


class ManifestError(MtplanError):
    """Malformed tier-manifest document."""


class PddlSyntaxError(MtplanError):
    """Ill-formed PDDL text; carries file:line:column."""

    def __init__(self, message: str, filename: str = "<string>", line: int = 0, column: int = 0):
        self.filename = filename
        self.line = line
        self.column = column
        super().__init__(f"{filename}:{line}:{column}: {message}")


class UnsupportedConstructError(PddlSyntaxError):
    """Syntactically valid PDDL outside the supported subset; names the construct."""

    def __init__(self, construct: str, filename: str = "<string>", line: int = 0, column: int = 0):
        self.construct = construct
        super().__init__(f"unsupported construct: {construct}", filename, line, column)


class GroundingError(MtplanError):
    pass


class UnknownTypeError(GroundingError):
    pass


class UnknownObjectError(GroundingError):
    pass


class UnknownOperatorError(MtplanError):
    pass


class PreconditionViolatedError(MtplanError):
    def __init__(self, operator: str, detail: str):
        self.operator = operator
        self.detail = detail
        super().__init__(f"precondition of {operator} violated: {detail}")


class InconsistentLiteralsError(MtplanError):
    pass


class ValidationFailedError(MtplanError):
    """A structurally invalid multi-tier problem; carries the validation report."""

    def __init__(self, report):
        self.report = report
        super().__init__("multi-tier problem failed validation:\n" + report.render())


class CompileError(MtplanError):
    """The compilation cannot be carried out (e.g. bookkeeping name clash)."""


class StateSpaceBudgetError(MtplanError):
    def __init__(self, cap: int):
        self.cap = cap
        super().__init__(f"reachable state space exceeds the configured cap of {cap} nodes")


class IllegalSuccessorError(MtplanError):
    """A chooser or API client selected a successor the ground-truth domain cannot produce."""


class EscapesAllTiersError(MtplanError):
    """An observed transition is legal in no tier; the multi-tier model cannot explain it."""


class SessionError(MtplanError):
    """Simulation session misuse (finished session, stale action, ...)."""
