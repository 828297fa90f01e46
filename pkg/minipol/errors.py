"""Exception hierarchy for minipol.

Every error raised on purpose by the package derives from :class:`MinipolError`
so the command line can turn it into a diagnostic and exit code 2. Runtime
faults of the *repaired* program are not exceptions: they are recorded as
statuses by :mod:`minipol.interp`.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import TYPE_CHECKING, Optional

if TYPE_CHECKING:
    from .lang import SourceLoc


class MinipolError(Exception):
    """Base class for all errors raised by minipol."""

    def __init__(self, message: str, loc: Optional["SourceLoc"] = None):
        self.message = message
        self.loc = loc
        super().__init__(self.__str__())

    def __str__(self) -> str:
        if self.loc is None:
            return self.message
        return f"{self.loc}: {self.message}"


class ParseError(MinipolError):
    """Lexical or syntactic error in mini-lang source text."""


@dataclass(frozen=True)
class TypeIssue:
    """A single type-checking diagnostic."""

    message: str
    loc: "SourceLoc"

    def __str__(self) -> str:
        return f"{self.loc}: {self.message}"


class TypeCheckError(MinipolError):
    """Raised by the checker with every issue it found, in source order."""

    def __init__(self, issues: list[TypeIssue]):
        self.issues = sorted(issues, key=lambda i: (i.loc.line, i.loc.col))
        first = self.issues[0] if self.issues else None
        super().__init__(
            first.message if first else "type error",
            first.loc if first else None,
        )

    def __str__(self) -> str:
        return "\n".join(str(i) for i in self.issues) or self.message


class SuiteError(MinipolError):
    """Malformed test suite, or a test that does not match its function."""


class LocalizationError(MinipolError):
    """Fault localization cannot proceed (e.g. no failing test)."""


class RepairError(MinipolError):
    """The repair pipeline was called outside its preconditions."""


class EncodingError(MinipolError):
    """A model does not describe a well-formed wiring. Indicates an encoder bug."""


class PatchError(MinipolError):
    """Applying a patch produced an ill-formed program."""


class SmtLibError(MinipolError):
    """Malformed SMT-LIB text."""


class SolverUnavailable(MinipolError):
    """The requested external solver backend cannot be loaded."""
