"""Exception types shared across the package."""


class QrmlabError(Exception):
    """Base class for all qrmlab errors."""


class ContractError(QrmlabError, ValueError):
    """An argument violates a documented precondition."""


class DimensionError(ContractError):
    """Operator dimensions are inconsistent."""


class DegeneracyError(QrmlabError):
    """A kernel expected to be one-dimensional is not resolvable."""


class AssumptionError(QrmlabError):
    """A genericity assumption (simple spectrum, efficient coupling, positivity) fails."""

    def __init__(self, assumption: str, message: str = ""):
        self.assumption = assumption
        super().__init__(f"{assumption}: {message}" if message else assumption)


class PositivityError(AssumptionError):
    """A leading-order state is not positive semidefinite within tolerance."""

    def __init__(self, message: str = ""):
        super().__init__("Pos", message)


class VerificationError(QrmlabError):
    """A computed quantity disagrees with its closed-form law beyond tolerance."""


class ConfigError(QrmlabError, ValueError):
    """A scenario configuration file is invalid."""
