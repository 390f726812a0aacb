"""Error types shared across the package.

Every solver failure carries a short machine-readable ``code`` that the CLI
prints on stderr before exiting with status 2.
"""


class HyplabError(Exception):
    """Base class for all domain/solver errors."""

    code = "error"

    def __init__(self, message: str = ""):
        super().__init__(f"{self.code}: {message}" if message else self.code)
        self.message = message


class BracketFailure(HyplabError):
    code = "bracket-failure"


class StiffIntegration(HyplabError):
    code = "stiff-integration"


class BlowUp(HyplabError):
    code = "blow-up"


class NoSignChange(HyplabError):
    code = "no-sign-change"


class NoRealRoot(HyplabError):
    code = "no-real-root"


class DomainTooLarge(HyplabError):
    code = "domain-too-large"


class EmptyGrid(HyplabError):
    code = "empty-grid"


class NoConvergence(HyplabError):
    code = "no-convergence"


class HoroConvexityLost(HyplabError):
    code = "horo-convexity-lost"


class UnstableStep(HyplabError):
    code = "unstable-step"


class ProjectionLoss(HyplabError):
    code = "projection-loss"


class EmptyInterior(HyplabError):
    code = "empty-interior"


class NonFinite(HyplabError):
    code = "non-finite"
