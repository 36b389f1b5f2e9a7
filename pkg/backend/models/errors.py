"""Typed errors raised by the grammar-compression lab."""


class LabError(Exception):
    """Base class for every error the lab raises on purpose."""


class InvalidTextError(LabError, ValueError):
    """Symbol outside the declared alphabet, bad token file, bad order k."""


class InvalidParsingError(LabError, ValueError):
    """Boundaries that do not partition the text."""


class InvalidGrammarError(LabError, ValueError):
    """Undefined ids, empty right-hand sides or cycles."""


class ZeroProbabilityError(LabError, ValueError):
    """A phrase with probability 0, whose cost would be infinite."""

    def __init__(self, phrase_index, phrase):
        self.phrase_index = phrase_index
        self.phrase = tuple(phrase)
        super().__init__(
            f'phrase #{phrase_index} {list(self.phrase)} has probability 0'
        )


class PolicyError(LabError, ValueError):
    """Stop policy that does not apply to the given input or report."""


class SizeLimitError(LabError, ValueError):
    """Input larger than the configured cap of an algorithm."""


class EncodingError(LabError, ValueError):
    """Grammar that the requested encoding cannot represent."""


class MalformedStreamError(LabError, ValueError):
    """Truncated or corrupted bit stream / container."""


class ParameterError(LabError, ValueError):
    """Construction parameters outside their valid range."""
