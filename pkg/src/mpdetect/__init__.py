"""Detection under bounded interference: Neyman-Pearson and random
distortion tests, Monte Carlo evaluation, and multiplicity-principle checks
on finite preorders."""

from .errors import NumericalError, ParameterError

__version__ = "0.1.0"

__all__ = ["NumericalError", "ParameterError", "__version__"]
