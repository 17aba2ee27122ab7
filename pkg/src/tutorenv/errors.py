"""Exception hierarchy shared across the package.

Every error raised by tutorenv derives from :class:`TutorError`, so callers
can catch one type at the CLI boundary and map it to a nonzero exit code.
"""


class TutorError(Exception):
    """Base class for all tutorenv errors."""


class MalformedSai(TutorError, ValueError):
    """A serialized action triple is missing or has malformed components."""


class SchemaError(TutorError, ValueError):
    """A document violates the behavior-graph or state schema.

    The message always names the offending field, e.g. ``edges[2].matcher.mode``.
    """


class DanglingEdge(SchemaError):
    """An edge references a node that does not exist."""


class UnreachableDone(SchemaError):
    """No done node is reachable from the start node."""


class IllegalApply(TutorError):
    """apply() was called with an action that does not grade correct."""


class NoDemoAvailable(TutorError):
    """The tutor has no next action to demonstrate (problem already done)."""


class ParseError(TutorError, ValueError):
    """Expression text could not be parsed.

    Attributes:
        position: character offset of the offending token.
    """

    def __init__(self, message, position):
        super().__init__(f"{message} (offset {position})")
        self.position = position


class DegreeOverflow(TutorError):
    """Polynomial expansion exceeded the configured total-degree bound."""


class TemplateError(TutorError, ValueError):
    """A scaffold template step formula could not be resolved."""


class ActionBoundExceeded(TutorError):
    """The per-problem action safety bound was hit before the problem finished."""


class ReplayMismatch(TutorError):
    """A logged correct action graded incorrect when replayed on its graph."""


class ExhaustedPerturbations(TutorError):
    """No incorrect action could be generated for a profile entry."""


class SinkError(TutorError, OSError):
    """A log or export sink could not be written."""


class HeaderMismatch(TutorError, ValueError):
    """A transaction log header does not match the expected column set."""


class RowArity(TutorError, ValueError):
    """A transaction log row has the wrong number of columns.

    Attributes:
        line_number: 1-based line number of the bad row.
    """

    def __init__(self, message, line_number):
        super().__init__(f"{message} (line {line_number})")
        self.line_number = line_number


class DegenerateParams(TutorError, ValueError):
    """Knowledge-tracing parameters produce a zero-probability denominator."""


class IndexOutOfRange(TutorError, IndexError):
    """A state or action index is outside the encoding table's range."""


class StateTooLarge(TutorError):
    """A serialized state alone exceeds the prompt character budget."""


class UnparseableResponse(TutorError, ValueError):
    """A completion could not be parsed as a grade or an action."""


class TransportError(TutorError):
    """The remote completion endpoint failed after all retries."""


class BudgetExceeded(TutorError):
    """The configured request cap for remote completions was hit."""


class NoOverlap(TutorError, ValueError):
    """Two learning curves share no opportunity range."""
