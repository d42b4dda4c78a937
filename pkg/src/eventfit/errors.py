"""Exception types shared across eventfit modules."""


class EventfitError(Exception):
    """Base class for all package-specific errors."""


class DatasetFormatError(EventfitError):
    """A dataset file violates the expected format.

    Carries the 1-based line number when the problem is tied to a line.
    """

    def __init__(self, message, line=None, path=None):
        self.line = line
        self.path = path
        where = ""
        if path is not None:
            where += f"{path}"
        if line is not None:
            where += f":{line}"
        super().__init__(f"{where}: {message}" if where else message)


class GraphFormatError(EventfitError):
    """A persisted graph container is unreadable (bad magic, version, checksum)."""


class EmbeddingFormatError(EventfitError):
    """A vector file violates the word2vec text format."""


class ZeroVectorError(EventfitError):
    """Cosine similarity is undefined for an all-zero vector."""


class UncoveredItemError(EventfitError):
    """An item cannot be scored because a lemma is missing from a resource."""

    def __init__(self, lemma, reason="not in embedding store"):
        self.lemma = lemma
        self.reason = reason
        super().__init__(f"uncovered: {lemma!r} ({reason})")


class InflectionError(EventfitError):
    """A verb cannot be inflected and no explicit past form was given."""


class CoverageError(EventfitError):
    """Too few covered items remain after coverage intersection."""


class ConfigError(EventfitError):
    """A run configuration file failed schema validation."""
