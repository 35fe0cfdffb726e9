"""
Custom exception classes for the BNRA toolkit
"""
from typing import Any, Dict, List, Optional


# Exit codes
EXIT_OK = 0
EXIT_NEGATIVE = 1
EXIT_USAGE = 2
EXIT_BUDGET = 3
EXIT_INTERNAL = 4


class BnraException(Exception):
    """Base exception for toolkit errors"""
    
    def __init__(
        self,
        message: str,
        exit_code: int = EXIT_INTERNAL,
        details: Optional[Dict[str, Any]] = None
    ):
        self.message = message
        self.exit_code = exit_code
        self.details = details or {}
        super().__init__(self.message)


class InvalidAgentCountException(BnraException):
    """Raised when a configuration is requested for a non-positive number of agents"""
    
    def __init__(self, count: int):
        super().__init__(
            message=f"Invalid agent count: {count}",
            exit_code=EXIT_USAGE,
            details={"count": count}
        )


class ProtocolValidationException(BnraException):
    """Raised when a protocol violates its structural invariants"""
    
    def __init__(self, diagnostics: List[str]):
        super().__init__(
            message=f"Invalid protocol: {len(diagnostics)} problem(s)",
            exit_code=EXIT_USAGE,
            details={"diagnostics": list(diagnostics)}
        )


class ProtocolParseException(BnraException):
    """Raised when protocol text cannot be parsed"""
    
    def __init__(self, diagnostics: List[Dict[str, Any]]):
        first = diagnostics[0] if diagnostics else {"line": 0, "column": 0, "message": "empty"}
        super().__init__(
            message=f"Parse error at {first['line']}:{first['column']}: {first['message']}",
            exit_code=EXIT_USAGE,
            details={"diagnostics": list(diagnostics)}
        )
        self.diagnostics = list(diagnostics)


class DocumentParseException(BnraException):
    """Raised when a JSON document is malformed"""
    
    def __init__(self, message: str, line: int = 0, column: int = 0):
        super().__init__(
            message=f"Malformed document at {line}:{column}: {message}",
            exit_code=EXIT_USAGE,
            details={"line": line, "column": column}
        )


class NotEnabledException(BnraException):
    """Raised when a step is applied to a configuration where it is not enabled"""
    
    def __init__(self, reason: str, details: Optional[Dict[str, Any]] = None):
        super().__init__(
            message=f"Step not enabled: {reason}",
            exit_code=EXIT_NEGATIVE,
            details=details
        )
        self.reason = reason


class InvalidRunException(BnraException):
    """Raised when replaying a run fails; index is 1-based"""
    
    def __init__(self, index: int, reason: str):
        super().__init__(
            message=f"Invalid at step {index}: {reason}",
            exit_code=EXIT_NEGATIVE,
            details={"index": index, "reason": reason}
        )
        self.index = index
        self.reason = reason


class WrongRegisterCountException(BnraException):
    """Raised when an operation needs a specific number of registers"""
    
    def __init__(self, expected: int, actual: int):
        super().__init__(
            message=f"Expected a {expected}-register protocol, got {actual} registers",
            exit_code=EXIT_USAGE,
            details={"expected": expected, "actual": actual}
        )


class ProtocolNotNormalizedException(BnraException):
    """Raised when a protocol still carries operations a procedure cannot handle"""
    
    def __init__(self, reason: str):
        super().__init__(
            message=f"Protocol not normalized: {reason}",
            exit_code=EXIT_USAGE,
            details={"reason": reason}
        )


class RegisterBoundExceededException(BnraException):
    """Raised when a transform would blow up beyond the register guard"""
    
    def __init__(self, registers: int, bound: int):
        super().__init__(
            message=f"Register count {registers} exceeds the bound {bound}",
            exit_code=EXIT_USAGE,
            details={"registers": registers, "bound": bound}
        )


class BudgetExceededException(BnraException):
    """Raised when a search or construction runs out of budget"""
    
    def __init__(self, what: str, budget: int):
        super().__init__(
            message=f"Budget exceeded: {what} (budget {budget})",
            exit_code=EXIT_BUDGET,
            details={"what": what, "budget": budget}
        )


class InvalidTreeException(BnraException):
    """Raised when an unfolding tree fails validation"""
    
    def __init__(self, violations: List[Dict[str, Any]]):
        super().__init__(
            message=f"Invalid unfolding tree: {len(violations)} violation(s)",
            exit_code=EXIT_NEGATIVE,
            details={"violations": list(violations)}
        )


class InternalInvariantFailure(BnraException):
    """Raised when a construction breaks an invariant it should maintain"""
    
    def __init__(self, message: str, details: Optional[Dict[str, Any]] = None):
        super().__init__(
            message=f"Internal invariant failure: {message}",
            exit_code=EXIT_INTERNAL,
            details=details
        )


class UnknownStateException(BnraException):
    """Raised when a query names a state the protocol does not have"""
    
    def __init__(self, state: str):
        super().__init__(
            message=f"Unknown state: {state}",
            exit_code=EXIT_USAGE,
            details={"state": state}
        )
