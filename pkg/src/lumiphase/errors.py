"""Exception hierarchy used across the package.

Every failure mode that callers are expected to handle gets its own class
so that the CLI can map them onto distinct exit codes.
"""


class LumiphaseError(Exception):
    """Base class for all package-specific errors."""


class ShapeMismatchError(LumiphaseError):
    """Operands have incompatible shapes."""


class ResidualImaginaryError(LumiphaseError):
    """Inverse transform of a supposedly real image left too much imaginary energy."""

    def __init__(self, residual, tol):
        super().__init__(
            f"inverse transform residual imaginary magnitude {residual:.3e} "
            f"exceeds tolerance {tol:.3e}; the spectrum is not conjugate-symmetric"
        )
        self.residual = residual
        self.tol = tol


class OddChannelsError(LumiphaseError):
    """Rotary encodings need an even channel count (rotations act on pairs)."""


class HeadDivisibilityError(LumiphaseError):
    """Channel count is not divisible by twice the head count."""


class ScoreRangeError(LumiphaseError):
    """A perceptual score or gain left the closed unit interval."""


class IterationRangeError(LumiphaseError):
    """Requested iteration count is outside [0, n_total]."""


class EmptyInputError(LumiphaseError):
    """An operation that needs at least one value received none."""


class ImageTooSmallError(LumiphaseError):
    """Image is smaller than the minimum the operation supports."""


class KernelNormalizationError(LumiphaseError):
    """Blur kernel does not sum to one."""


class KernelSpecError(LumiphaseError):
    """Kernel parameters are invalid (even size, negative sigma, ...)."""


class NonFiniteGradientError(LumiphaseError):
    """Backward pass produced a NaN or infinite gradient."""


class NonFiniteLossError(LumiphaseError):
    """Objective became NaN or infinite during optimization."""

    def __init__(self, message, trace=None):
        super().__init__(message)
        self.trace = trace


class ConfigError(LumiphaseError):
    """Run configuration failed validation."""
