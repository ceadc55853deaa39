"""Exception types raised by the av2 numerics."""


class Av2Error(Exception):
    """Base class for every error raised by this package."""


class InvalidParameter(Av2Error, ValueError):
    """alpha or beta outside the parameter space (both must be nonzero)."""


class EssentialSingularity(Av2Error, ValueError):
    """A map in the family was evaluated at infinity."""


class InvalidAsymptoticValue(Av2Error, ValueError):
    """The second asymptotic value was placed at 0 or 1."""


class OmittedValue(Av2Error, ValueError):
    """A preimage was requested for one of the two omitted values."""


class PoleProximity(Av2Error, ValueError):
    """A probe point lies too close to a pole."""


class InconsistentConfiguration(Av2Error, ValueError):
    """Marked points do not satisfy the relation their labels require."""


class DegenerateParameter(Av2Error, ValueError):
    """A pullback step produced beta = 0 or a similar collapse."""


class NoConvergence(Av2Error, RuntimeError):
    """An iterative solver gave up."""


class QuadratureFailure(Av2Error, RuntimeError):
    """Self-refining quadrature did not reach its tolerance."""


class PortraitError(Av2Error, ValueError):
    """An orbit portrait failed validation.

    ``violations`` holds the individual rule failures.
    """

    def __init__(self, violations):
        self.violations = list(violations)
        super().__init__("; ".join(str(v) for v in self.violations))
