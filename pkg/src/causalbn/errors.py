"""Exception hierarchy shared by all causalbn modules.

Every domain failure derives from CausalError so the CLI can map any of
them to a single-line ``error: <ClassName>: <detail>`` on stderr with
exit status 1.
"""

from __future__ import annotations


class CausalError(Exception):
    """Base class for all domain errors raised by this package."""


# --- data ingestion -------------------------------------------------------

class MissingFileError(CausalError):
    pass


class HeaderMismatchError(CausalError):
    def __init__(self, expected: list[str], found: list[str]):
        super().__init__(f"expected header {expected}, found {found}")
        self.expected = expected
        self.found = found


class CellParseError(CausalError):
    def __init__(self, row: int, column: str, value: str):
        super().__init__(f"row {row}, column {column!r}: cannot parse {value!r} as a number")
        self.row = row
        self.column = column
        self.value = value


class EmptyAfterCleanError(CausalError):
    pass


class SpecForCategoricalColumnError(CausalError):
    pass


class UnknownColumnError(CausalError):
    pass


# --- graph ----------------------------------------------------------------

class UnknownNodeError(CausalError):
    pass


class SelfLoopError(CausalError):
    pass


class CycleError(CausalError):
    """Rejected edge insertion; ``path`` is the existing directed path from
    the would-be child back to the would-be parent."""

    def __init__(self, path: list[str]):
        super().__init__(" -> ".join(path))
        self.path = path


class MissingWeightError(CausalError):
    pass


class StructureFormatError(CausalError):
    pass


# --- discovery ------------------------------------------------------------

class ConditioningTooSparseError(CausalError):
    pass


class NodeNotInDataError(CausalError):
    pass


# --- elicitation ----------------------------------------------------------

class EmptyVariableListError(CausalError):
    pass


class InvalidClaimError(CausalError):
    pass


class NoClaimsError(CausalError):
    pass


class NoClaimsFoundError(CausalError):
    pass


class TransportError(CausalError):
    def __init__(self, message: str, round: int | None = None, cause: Exception | None = None):
        super().__init__(message if round is None else f"round {round}: {message}")
        self.round = round
        self.cause = cause
        self.transcript = None  # partial transcript attached by run_protocol


class ParseFailureError(CausalError):
    def __init__(self, message: str, round: int | None = None):
        super().__init__(message if round is None else f"round {round}: {message}")
        self.round = round
        self.transcript = None


class UnresolvedPairError(CausalError):
    pass


# --- validation -----------------------------------------------------------

class RankDeficientError(CausalError):
    pass


class TooFewRowsError(CausalError):
    pass


# --- bayesnet -------------------------------------------------------------

class ZeroCountNoSmoothingError(CausalError):
    pass


class UnknownLevelError(CausalError):
    pass


class InconsistentEvidenceError(CausalError):
    pass


# --- cli / config ---------------------------------------------------------

class ConfigError(CausalError):
    pass
