"""Exception types shared across the package.

Every failure mode that callers are expected to branch on gets its own
class; plain ValueError is reserved for malformed arguments.
"""


class NonCoerciveSystemError(RuntimeError):
    """Forward system matrix is not positive definite at the requested lambda."""


class IllPosedDataError(ValueError):
    """Transfer data produced an indefinite or singular mass matrix."""


class SingularPencilError(RuntimeError):
    """S + lambda*M (or T + lambda*I) is singular at the requested lambda."""


class DegenerateInterpolantError(ValueError):
    """Continued fraction extraction hit a nonpositive or non-finite coefficient."""


class InvalidRomError(ValueError):
    """Reduced model violates a structural requirement (poles, residues, shapes)."""


class StructuralError(ValueError):
    """Incompatible block structure, mesh, or basis between pipeline stages."""


class ConfigError(ValueError):
    """Experiment configuration failed to parse or validate."""
