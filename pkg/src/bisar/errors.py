"""Exception types shared across the package.

The CLI maps these onto process exit codes, so library code should raise
one of them (or a subclass) rather than bare ValueError/RuntimeError for
conditions a caller can act on.
"""


class ValidationError(ValueError):
    """A configuration, geometry, or input file failed validation."""


class NumericalError(RuntimeError):
    """A numerical stage failed (singular solve, aliasing, mis-association)."""
