"""Exception types shared across the package.

Plain invariant violations (bad shapes, non-finite values, inconsistent
arguments) raise :class:`ValueError`; the classes below cover conditions a
caller may reasonably want to catch separately.
"""


class FileFormatError(Exception):
    """The file does not carry the expected magic or version."""


class FileCorruptionError(Exception):
    """The header parsed, but the payload does not match what it declares."""


class CollapseTieError(Exception):
    """The dendrogram root splits into two branches of equal size."""


class UndefinedMetricError(Exception):
    """A corpus-level metric has an empty denominator."""
