"""Exception hierarchy shared across the package.

The CLI maps these onto exit codes: data problems (parsing, validation)
exit with 2, numeric/feasibility problems with 3.
"""


class BlockdlError(Exception):
    """Base class for all package errors."""


class GraphParseError(BlockdlError):
    """Malformed input file; carries a line number where possible."""


class ValidationError(BlockdlError):
    """Structurally invalid data (self-loops, bad labels, size mismatch)."""


class UndefinedObjectiveError(ValidationError):
    """Objective undefined on the input, e.g. a graph without edges."""


class NumericError(BlockdlError):
    """A numeric procedure failed (empty grid, bracketing failure)."""


class InfeasibleError(BlockdlError):
    """A requested state (W, B, E_in) lies outside the feasible region."""
