"""
Error types for the backhaul game engine
Every failure raised by the package derives from BackhaulError
"""


class BackhaulError(Exception):
    """Base class for all engine errors"""


class ModelDomainError(BackhaulError, ValueError):
    """Argument outside the domain a model formula is defined on"""


class DegenerateDemandError(BackhaulError):
    """Every SBS has zero traffic load, so shares are undefined"""


class NoInteriorEquilibriumError(BackhaulError):
    """The fair mixed equilibrium needs u(c,1) > 0 and u(c,G) < 0"""

    def __init__(self, first_utility: float, last_utility: float):
        self.first_utility = first_utility
        self.last_utility = last_utility
        if first_utility <= 0:
            dominant = "d"
        else:
            dominant = "c"
        super().__init__(
            f"no interior equilibrium: u(c,1)={first_utility:.6g}, "
            f"u(c,G)={last_utility:.6g} (pure '{dominant}' dominates)"
        )


class NonConvergenceError(BackhaulError):
    """Fixed-point iteration stopped at its cap"""

    def __init__(self, iterations: int, residual: float):
        self.iterations = iterations
        self.residual = residual
        super().__init__(
            f"no convergence after {iterations} iterations (residual {residual:.3e})"
        )


class ConfigError(BackhaulError):
    """Invalid or unknown configuration entry"""

    def __init__(self, field: str, message: str):
        self.field = field
        super().__init__(f"{field}: {message}")


class ComparisonError(BackhaulError):
    """Runs being compared were not produced from the same seeds"""
