"""Exception hierarchy shared by every module of the toolkit."""


class GaussEntError(Exception):
    """Base class for all toolkit errors."""


class DomainError(GaussEntError, ValueError):
    """An argument lies outside the domain of the operation."""


class ConfigError(GaussEntError, ValueError):
    """Invalid configuration (ranges, shot counts, replicate counts...)."""


class DiscriminantError(GaussEntError, ArithmeticError):
    """The closed-form symplectic spectrum has a negative discriminant."""


class DegenerateError(GaussEntError, ArithmeticError):
    """g2_12 is (numerically) one, so the field moments cannot be separated."""


class ThetaRangeError(GaussEntError, ValueError):
    """theta lies outside [0, 1] beyond the noise tolerance."""

    def __init__(self, theta, tau):
        self.theta = theta
        self.tau = tau
        super().__init__(
            f"theta={theta:.6g} outside [-{tau:g}, 1+{tau:g}]: inconsistent with "
            "a Gaussian state with thermal single-mode statistics"
        )


class NotBonaFide(GaussEntError, ValueError):
    """The covariance matrix does not describe a physical state."""


class NumericalError(GaussEntError, ArithmeticError):
    """A decomposition residual exceeded its tolerance."""


class CutoffTooSmall(GaussEntError, ValueError):
    """The Fock cutoff leaves more probability outside the box than allowed."""


class HypothesisError(GaussEntError):
    """Counting data fail the thermal single-mode check."""


class HypothesisWarning(UserWarning):
    """Analysis proceeded even though a hypothesis check failed."""


class DataFormatError(GaussEntError, ValueError):
    """A count file or metadata sidecar could not be parsed."""

    def __init__(self, message, line=None):
        self.line = line
        super().__init__(f"line {line}: {message}" if line is not None else message)
