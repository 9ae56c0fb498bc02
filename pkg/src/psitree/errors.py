"""Exception and warning types raised across the package."""


class PsiTreeError(Exception):
    """Base class for all errors raised by psitree."""


class ZeroVector(PsiTreeError, ValueError):
    pass


class DimensionMismatch(PsiTreeError, ValueError):
    pass


class NotNormalized(PsiTreeError, ValueError):
    pass


class TooLarge(PsiTreeError, ValueError):
    pass


class UnloweredGate(PsiTreeError, ValueError):
    """A gate outside the QASM-lowerable set was passed to the QASM exporter."""


class NoValidPath(PsiTreeError, ValueError):
    """The tree has no full-depth path of nonzero amplitude."""


class IndexOutOfRange(PsiTreeError, IndexError):
    pass


class DeadSubtree(PsiTreeError, ValueError):
    pass


class LevelMismatch(PsiTreeError, ValueError):
    pass


class ToleranceExceeded(PsiTreeError, ValueError):
    pass


class NotAdjacent(PsiTreeError, ValueError):
    """Two subtrees whose paths differ by more than one spin flip."""


class ConvergenceFailure(PsiTreeError, RuntimeError):
    """The multi-start solver did not reach the requested residual.

    ``best_residual`` holds the smallest residual norm seen over all starts.
    """

    def __init__(self, message, best_residual=float("nan")):
        super().__init__(message)
        self.best_residual = best_residual


class PhaseFixDegenerate(UserWarning):
    """A phase to be fixed belongs to an amplitude below the zero threshold."""


class FormatError(PsiTreeError, ValueError):
    """Malformed input file."""
