"""Exception types shared across the toolkit."""


class StorySalienceError(Exception):
    """Base class for all toolkit errors."""


class CorpusParseError(StorySalienceError):
    """Corpus or model file is not valid JSON or misses a required field."""


class CorpusValidationError(StorySalienceError):
    """A loaded corpus violates a structural invariant."""


class MissingAnnotationError(StorySalienceError):
    """A removal method needs annotations the sentence does not carry."""


class WindowingError(StorySalienceError):
    """A story cannot be fit into the scorer's input-length budget."""


class TransportError(StorySalienceError):
    """The remote scorer stayed unreachable after bounded retries."""


class ProtocolError(StorySalienceError):
    """A remote scorer response violates the wire contract."""


class InsufficientDataError(StorySalienceError):
    """A statistic is undefined for the given sample."""
