"""Exception hierarchy shared by all mcdre modules.

The CLI maps these onto process exit codes: DataError (and its
subclasses) exit 2, ConfigError exits 3, argparse usage errors exit 1.
Everything else is a bug and is allowed to traceback.
"""


class McdreError(Exception):
    """Base class for all errors raised by this package."""


class DimensionError(McdreError):
    """Tensor shapes do not satisfy an operation's contract."""


class GraphError(McdreError):
    """Backward pass requested from a node detached from any computation."""


class ConfigError(McdreError):
    """A run configuration violates its invariants."""


class DataError(McdreError):
    """Input data is malformed (bad label, out-of-vocabulary id, ...)."""


class ParseError(DataError):
    """A data file failed to parse; message carries file and line number."""


class WiringError(McdreError):
    """Cross-integration plumbing received inconsistent encoder states."""


class SchemeCapacityError(McdreError):
    """A mention set cannot be represented by the requested tagging scheme."""
