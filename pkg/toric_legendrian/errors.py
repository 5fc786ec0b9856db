"""Exception hierarchy shared by the library modules and the CLI."""


class ToricError(Exception):
    """Base class for every error raised by toric_legendrian."""


class LatticeError(ToricError, ValueError):
    """Malformed input to an exact lattice operation (zero vector, bad shape)."""


class DependentVectorsError(LatticeError):
    """Vectors expected to be linearly independent are not.

    Attributes:
        witness: rational coefficients c (tuple of Fraction) with sum c_i v_i = 0
    """

    def __init__(self, message, witness):
        super().__init__(message)
        self.witness = tuple(witness)


class DegenerateConeError(ToricError):
    """The cone contains a line or has empty interior."""


class ConeValidationError(ToricError):
    """A cone failed validation where a valid cone is required."""

    def __init__(self, message, report):
        super().__init__(message)
        self.report = report


class UnsupportedConeError(ToricError):
    """The cone is valid but outside what the requested operation supports."""


class VolumeDivergenceError(ToricError, ArithmeticError):
    """The volume functional was evaluated on or outside the Reeb cone boundary."""


class ConvergenceError(ToricError):
    """An iterative method stopped before reaching its tolerance.

    Attributes:
        trace: list of (iteration, xi, grad_norm) for the last iterates
    """

    def __init__(self, message, trace=None):
        super().__init__(message)
        self.trace = list(trace or [])


class InvalidParametersError(ToricError, ValueError):
    """Parameters outside the documented domain (e.g. non-coprime p, q)."""


class InfeasibleSystemError(ToricError):
    """The quadric system has an empty or unbounded solution polytope."""


class SamplerError(ToricError):
    """The polytope sampler could not produce points."""


class NonFlatModelError(ToricError):
    """A flat-model-only check was applied to a non-flat configuration."""


class ConeFileError(ToricError):
    """A cone file could not be read or parsed."""
