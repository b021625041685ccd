"""Exception taxonomy shared by all robinopt modules.

The CLI maps these onto process exit codes, so solver code should raise
the most specific class that applies.
"""


class RobinoptError(Exception):
    """Base class for all robinopt errors."""


class ConfigError(RobinoptError):
    """Invalid user input: bad domain spec, malformed file, out-of-range parameter."""


class MathRefusalError(RobinoptError):
    """Request refused on mathematical grounds (the answer is known in closed form
    and a discrete computation would only produce a mesh artifact)."""

    def __init__(self, message, exact_value=None):
        super().__init__(message)
        self.exact_value = exact_value


class ConvergenceError(RobinoptError):
    """An iterative solver exhausted its budget; carries the best iterate found."""

    def __init__(self, message, best=None, diagnostics=None):
        super().__init__(message)
        self.best = best
        self.diagnostics = diagnostics or {}


class InvariantViolationError(RobinoptError):
    """A structural identity that should hold up to solver tolerance failed.

    Distinct from ConvergenceError: the solve finished, but its output
    contradicts an inequality or identity the theory guarantees.
    """
