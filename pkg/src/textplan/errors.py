"""Exception hierarchy shared across the package."""


class TextPlanError(Exception):
    """Base class for all data errors raised by this package."""


class MalformedTriple(TextPlanError):
    pass


class XmlError(TextPlanError):
    pass


class SchemaError(TextPlanError):
    pass


class TooLarge(TextPlanError):
    pass


class NotATree(TextPlanError):
    pass


class NoPlans(TextPlanError):
    pass


class MatchingError(TextPlanError):
    """A text plan does not express every input triple exactly once."""


class ParseError(TextPlanError):
    def __init__(self, message, index=None):
        if index is not None:
            message = f"{message} (token {index})"
        super().__init__(message)
        self.index = index


class UnknownRelation(ParseError):
    pass


class UnknownEntity(ParseError):
    pass


class UnbalancedBrackets(ParseError):
    pass


class LinearizationError(TextPlanError):
    pass


class EmptyCorpus(TextPlanError):
    pass


class BadSizes(TextPlanError):
    pass


class EmptyRanking(TextPlanError):
    pass


class BadDate(TextPlanError):
    pass


class Empty(TextPlanError):
    pass


class LengthMismatch(TextPlanError):
    pass
