"""Exception types raised across the workbench."""

from __future__ import annotations


class GoalrecError(Exception):
    """Base class for all workbench errors."""


# ── Model language ─────────────────────────────────────────────────────────


class ModelError(GoalrecError):
    """A problem in a model-language file, located by line and column."""

    def __init__(self, message: str, line: int, col: int):
        super().__init__(f"{line}:{col}: {message}")
        self.line = line
        self.col = col


class ParseError(ModelError):
    def __init__(self, message: str, line: int, col: int, expected: str | None = None):
        if expected is not None:
            message = f"{message} (expected {expected})"
        super().__init__(message, line, col)
        self.expected = expected


class UnknownTypeError(ModelError):
    pass


class UnknownPredicateError(ModelError):
    pass


class ArityMismatchError(ModelError):
    pass


class TypeMismatchError(ModelError):
    pass


class UndeclaredConstantError(ModelError):
    pass


class EmptyHypothesisSetError(GoalrecError):
    pass


class NotApplicableError(GoalrecError):
    """Action preconditions not satisfied; carries the missing fact ids."""

    def __init__(self, action_id: int, missing):
        self.action_id = action_id
        self.missing = frozenset(missing)
        super().__init__(f"action {action_id} not applicable, missing facts {sorted(self.missing)}")


# ── Planning ───────────────────────────────────────────────────────────────


class UnsolvableError(GoalrecError):
    pass


class NodeBudgetExceededError(GoalrecError):
    pass


# ── Landmarks / recognition ────────────────────────────────────────────────


class UnreachableGoalError(GoalrecError):
    pass


class BrokenPrefixError(GoalrecError):
    """Observed action not applicable during replay; carries the step index."""

    def __init__(self, step: int, message: str = ""):
        self.step = step
        super().__init__(message or f"observation not applicable at step {step}")


class EmptyScoresError(GoalrecError):
    pass


class UnsupportedDomainError(GoalrecError):
    """Raised when a model-based recognizer is asked about a trace with no planning model."""


# ── Learners ───────────────────────────────────────────────────────────────


class IndexOutOfVocabError(GoalrecError):
    pass


class SingleClassDataError(GoalrecError):
    pass


class ShapeMismatchError(GoalrecError):
    pass


class EmptySequenceError(GoalrecError):
    pass


# ── Generators / harness ───────────────────────────────────────────────────


class ScaleTooSmallError(GoalrecError):
    pass


class UnsolvableLayoutError(GoalrecError):
    pass


class InsufficientTracesError(GoalrecError):
    pass


class IoError(GoalrecError):
    pass
