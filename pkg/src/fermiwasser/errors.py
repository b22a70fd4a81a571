"""Exception types shared across the package."""


class FermiwasserError(Exception):
    """Base class for all package errors."""


class NotHermitianError(FermiwasserError, ValueError):
    pass


class NotFaithfulError(FermiwasserError, ValueError):
    """Raised when a state (or operator) has a vanishing eigenvalue."""


class NotCyclicError(FermiwasserError, ValueError):
    pass


class CompatibilityError(FermiwasserError, ValueError):
    """State compatibility ``nu o E = mu`` (or a similar matching condition) fails."""


class StructureError(FermiwasserError, ValueError):
    """A required structural property (evenness, copying map, tags, ...) is missing."""


class NotAPlanError(FermiwasserError, ValueError):
    pass


class SolverError(FermiwasserError, RuntimeError):
    pass


class ConfigError(FermiwasserError, ValueError):
    pass
