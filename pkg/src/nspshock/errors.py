"""Exception and warning types shared across the package."""


class NspError(Exception):
    """Base class for all package errors."""


class InvalidParam(NspError):
    """A physical or numerical parameter is out of its admissible range."""


class DegenerateShock(NspError):
    """End states do not define a compressive 2-shock (rho_minus <= rho_plus)."""


class IntegrationFailure(NspError):
    """An ODE integration left its invariant region or failed to converge."""


class NewtonDivergence(NspError):
    """A damped Newton iteration failed to reach the residual target."""


class SingularMode(NspError):
    """A separable Helmholtz mode has a non-positive symbol."""


class NonConvergence(NspError):
    """The nonlinear Poisson solver exhausted its outer iterations."""


class NonPositiveDensity(NspError):
    """A density field is not strictly positive."""


class PositivityLoss(NspError):
    """Density lost positivity during time stepping."""

    def __init__(self, t, location, value):
        self.t = t
        self.location = location
        self.value = value
        super().__init__(
            f"density {value:.6e} <= 0 at t={t:.6g}, grid index {location}"
        )


class PoissonFailure(NspError):
    """The self-consistent potential could not be computed during stepping."""


class FrameMismatch(NspError):
    """State and profile are expressed in different Galilean frames."""


class NonPositiveValue(NspError):
    """A log-linear fit was requested on non-positive data."""


class WindowTooSmall(NspError):
    """Too few samples inside the requested fit window."""


class BadTemplate(NspError):
    """Zero-mass projection template does not integrate to one."""


class UnresolvedMode(NspError):
    """A requested transverse harmonic is not resolvable on the grid."""


class ParseError(NspError):
    """Config file is syntactically malformed."""

    def __init__(self, line, message):
        self.line = line
        super().__init__(f"line {line}: {message}")


class UnknownKey(NspError):
    """Config file contains a key the schema does not define."""

    def __init__(self, key, line=None):
        self.key = key
        self.line = line
        where = f" (line {line})" if line is not None else ""
        super().__init__(f"unknown key {key!r}{where}")


class ValidationError(NspError):
    """A config value violates a module invariant."""

    def __init__(self, key, reason):
        self.key = key
        self.reason = reason
        super().__init__(f"{key}: {reason}")


class FormatError(NspError):
    """A binary snapshot is malformed."""

    def __init__(self, offset, message):
        self.offset = offset
        super().__init__(f"offset {offset}: {message}")


class TruncationWarning(UserWarning):
    """Finite domain is too short for the profile tails to flatten."""


class ConfinementWarning(UserWarning):
    """Perturbation reached the neighbourhood of an artificial boundary."""
