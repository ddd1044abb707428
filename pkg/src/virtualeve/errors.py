"""Exception types raised across the package."""


class DomainError(ValueError):
    """An argument lies outside the domain the model is defined on."""


class ConstraintError(ValueError):
    """Antenna positions violate the box or minimum-spacing constraints."""


class ConfigurationError(ValueError):
    """A parameter combination admits no feasible solution."""


class DegenerateInstanceError(ArithmeticError):
    """The closed-form distance is undefined (zero combined gain)."""
