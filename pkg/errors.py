"""Error kinds raised by the estimation pipeline.

Every error is a ``ValueError`` so callers that only care about bad input can
catch that. ``kind`` is the short name recorded for skipped candidates.
"""

from __future__ import annotations


class TailAvgError(ValueError):
    @property
    def kind(self) -> str:
        return type(self).__name__


# --- Input ---

class EmptyInput(TailAvgError):
    pass


class NonPositiveValue(TailAvgError):
    def __init__(self, index: int, value: float) -> None:
        super().__init__(f"value at index {index} is not positive: {value!r}")
        self.index = index
        self.value = value


class NonFiniteValue(TailAvgError):
    def __init__(self, index: int, value: float) -> None:
        super().__init__(f"value at index {index} is not finite: {value!r}")
        self.index = index
        self.value = value


class ParseError(TailAvgError):
    def __init__(self, line: int, message: str) -> None:
        super().__init__(f"line {line}: {message}")
        self.line = line


# --- Per-candidate fits ---

class BadExceedanceCount(TailAvgError):
    pass


class BadPointCount(TailAvgError):
    pass


class DegenerateTail(TailAvgError):
    pass


class DegenerateExcesses(TailAvgError):
    pass


class DegeneratePoints(TailAvgError):
    pass


class NonPositiveParameter(TailAvgError):
    pass


class NonPositiveIndex(TailAvgError):
    pass


class ConvergenceFailure(TailAvgError):
    pass


# --- Averaging ---

class GridOutOfRange(TailAvgError):
    pass


class EmptyGrid(TailAvgError):
    pass


class AllCandidatesFailed(TailAvgError):
    pass


class MisalignedInputs(TailAvgError):
    pass


# --- Sampling / studies / output ---

class BadSpec(TailAvgError):
    pass


class TooManyFailures(TailAvgError):
    pass


class EmptyResult(TailAvgError):
    pass


class NoExceedances(TailAvgError):
    pass
