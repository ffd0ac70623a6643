class GridMismatchError(ValueError):
    """Curves, samples or operators tabulated on different grids."""


class NumericalError(ArithmeticError):
    """A factorisation or evaluation failed; the message carries diagnostics."""


class NumericalWarning(RuntimeWarning):
    """A numerical repair (e.g. eigenvalue clipping) exceeded its tolerance."""
