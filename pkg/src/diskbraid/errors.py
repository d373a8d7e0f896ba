"""Exception taxonomy shared across the package.

The CLI maps these onto exit codes: ConfigError -> 2 (validation),
BudgetError and its subclasses -> 3 (numerical budget exhausted).
"""


class DiskbraidError(Exception):
    """Base class for package errors."""


class ConfigError(DiskbraidError):
    """Invalid configuration or precondition violation (CLI exit 2)."""


class SamplingError(ConfigError):
    """Rejection sampling cannot proceed (e.g. min_sep too large)."""


class BudgetError(DiskbraidError):
    """A combinatorial or refinement budget was exhausted (CLI exit 3).

    ``partial`` carries whatever was computed before the budget ran out
    (count of emitted paths, prefix of an orbit, ...).
    """

    def __init__(self, message, partial=None):
        super().__init__(message)
        self.partial = partial


class DegeneracyError(BudgetError):
    """Crossing detection could not be disambiguated after max_refine."""


class CollisionError(DegeneracyError):
    """Two traced points came within collision tolerance of each other."""


class ResolutionError(BudgetError):
    """Curve transport exceeded its vertex budget; ``partial`` holds the
    refined-so-far polygon."""
