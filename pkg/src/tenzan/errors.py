"""Exception hierarchy shared by all tenzan modules."""

from __future__ import annotations


class TenzanError(Exception):
    """Base class for every error raised by this package."""


# --- exact arithmetic / canonicalization ---

class ZeroDenominatorError(TenzanError):
    """A denominator is identically zero (detected at evaluation or canonicalization)."""


class UnboundVariableError(TenzanError):
    """Evaluation met a variable with no binding."""


class NonSquarefreeRadicandError(TenzanError):
    """A radicand could not be normalized to square-free form (negative, or above the screening cap)."""


# --- rule application preconditions ---

class RuleError(TenzanError):
    """Base class for rule-precondition failures; the checker reports these as verdicts."""


class UnsupportedInputError(RuleError):
    pass


class BadSelectorError(RuleError):
    pass


class NoCommonFactorError(RuleError):
    pass


class NothingToSplitError(RuleError):
    pass


class UndefinedSubstitutionError(RuleError):
    pass


class NotCommonFactorError(RuleError):
    pass


class ZeroFactorError(RuleError):
    pass


class NonZeroRhsError(RuleError):
    pass


class NotLikeTermsError(RuleError):
    pass


class NotAnIdentityError(RuleError):
    pass


class PatternMismatchError(RuleError):
    pass


class NotUnitPairError(RuleError):
    pass


class NoFractionPresentError(RuleError):
    pass


class BadSplitSpecError(RuleError):
    pass


class RhsMismatchError(RuleError):
    pass


# --- notation / parsing ---

class ParseError(TenzanError):
    """Syntax error in expression or script text, with position information."""

    def __init__(self, message: str, line: int = 1, column: int = 0) -> None:
        super().__init__(f"{message} (line {line}, column {column})")
        self.line = line
        self.column = column


class UnknownLabelError(ParseError):
    pass


class MalformedNumeralError(TenzanError):
    pass


class MalformedLengthError(TenzanError):
    pass


class RepeatedUnitError(MalformedLengthError):
    pass


class NegativeLengthError(TenzanError):
    pass


class UnrenderableCoefficientError(TenzanError):
    pass


# --- derivation scripts ---

class ScriptError(ParseError):
    """Structural problem in a derivation script."""


class DanglingReferenceError(ScriptError):
    pass


class DuplicateStepIdError(ScriptError):
    pass


class NotSolvedFormError(TenzanError):
    """The final equation of a script does not isolate a single variable."""
