from typing import Any, Iterable, List, Optional


class WorkbenchError(Exception):
    """Base class of every error raised deliberately by wfsosWB."""

    kind = "error"

    def __init__(self, *args: object) -> None:
        super().__init__(*args)


class SpecError(WorkbenchError, ValueError):
    kind = "spec"


class FormatViolationError(SpecError):
    kind = "format"

    def __init__(self, violations: Iterable[Any]) -> None:
        self.violations: List[Any] = list(violations)
        lines = "; ".join(str(v) for v in self.violations)
        super().__init__(f"{len(self.violations)} format violation(s): {lines}")


class InterpretationError(WorkbenchError):
    kind = "interpretation"


class BudgetExhaustedError(WorkbenchError):
    kind = "budget"


class SumMismatchError(WorkbenchError, ValueError):
    kind = "sum-mismatch"


class NotFunctionalError(WorkbenchError, ValueError):
    kind = "not-functional"


class PreconditionError(WorkbenchError, ValueError):
    kind = "precondition"

    def __init__(self, message: str, witness: Optional[Any] = None) -> None:
        super().__init__(message)
        self.witness = witness


class MFunctionViolation(WorkbenchError):
    kind = "m-function"

    def __init__(self, bullet: int, witness: Any) -> None:
        super().__init__(f"M-function condition {bullet} fails at {witness}")
        self.bullet = bullet
        self.witness = witness


class SubstitutionError(WorkbenchError, KeyError):
    kind = "substitution"

    def __str__(self) -> str:
        # KeyError quotes its argument otherwise
        return str(self.args[0]) if self.args else ""
