"""Errors raised by ftlearn.

The classes are grouped by the command line exit code they map to, see
:data:`EXIT_CODES` and :func:`exit_code_for`.
"""


class FTLearnError(Exception):
    """Base class of all errors raised by this package."""


# ---------------------------------------------------------------------------
# input errors
# ---------------------------------------------------------------------------


class InputError(FTLearnError):
    """An input file or string could not be turned into a valid model."""


class PDDLSyntaxError(InputError):
    """Malformed PDDL text.

    Args:
        msg (str): description of the problem
        line (int): 1-based line number of the offending token
        col (int): 1-based column number of the offending token
    """

    def __init__(self, msg, line=None, col=None):
        self.msg = msg
        self.line = line
        self.col = col
        if line is not None:
            msg = f"{msg} (line {line}, column {col})"
        super().__init__(msg)


class PDDLSemanticError(PDDLSyntaxError):
    """Well-formed PDDL that violates the typed STRIPS model (undeclared type,
    duplicate name, arity mismatch, unknown object, type mismatch,
    unsupported requirement)."""


class TraceError(InputError):
    """Invalid trace document or trace content."""


class PlanError(InputError):
    """A plan step is unknown, ill-typed or not applicable.

    Args:
        msg (str): description of the problem
        step (int): 0-based index of the offending plan step
    """

    def __init__(self, msg, step=None):
        self.step = step
        if step is not None:
            msg = f"step {step}: {msg}"
        super().__init__(msg)


class NotApplicableError(PlanError):
    """An operator was applied in a state not containing its preconditions."""


class FormulaSyntaxError(InputError):
    """Malformed formula text."""

    def __init__(self, msg, line=None, col=None):
        self.line = line
        self.col = col
        if line is not None:
            msg = f"{msg} (line {line}, column {col})"
        super().__init__(msg)


class FormulaError(InputError):
    """Formula that parses but is not well-formed (unbound variable, arity
    mismatch, non-prenex quantifier, unknown type or predicate)."""


class DomainMismatchError(InputError):
    """A formula speaks a vocabulary the evaluated domain does not have."""


class SolverOutputError(InputError):
    """Malformed or inconsistent output of an external MaxSAT solver."""


# ---------------------------------------------------------------------------
# usage errors
# ---------------------------------------------------------------------------


class UsageError(FTLearnError):
    """The request cannot be served as posed, e.g. learning without any
    negative trace."""


# ---------------------------------------------------------------------------
# resource errors
# ---------------------------------------------------------------------------


class ResourceLimitError(FTLearnError):
    """A configured size cap would be exceeded."""


class SolverTimeout(ResourceLimitError):
    """A time or conflict budget ran out before any answer was found."""


# ---------------------------------------------------------------------------
# internal errors
# ---------------------------------------------------------------------------


class DecodeError(FTLearnError):
    """A solver model violates an exactly-one group of the encoding."""


class EncodingMismatchError(AssertionError):
    """Checker score of a decoded formula differs from the solver-implied
    score."""


EXIT_CODES = {
    UsageError: 2,
    InputError: 3,
    ResourceLimitError: 4,
}


def exit_code_for(error):
    """Return the command line exit code for an exception instance."""
    for cls, code in EXIT_CODES.items():
        if isinstance(error, cls):
            return code
    return 1
