"""Exception types shared across the package."""

import numpy as np


class InputError(ValueError):
    """Invalid arguments, malformed files or violated preconditions."""


class FactorizationError(np.linalg.LinAlgError):
    """A Cholesky pivot was non-positive (or numerically indistinguishable
    from zero).  ``index`` is the 0-based row at which it happened."""

    def __init__(self, index: int, pivot: float):
        self.index = index
        self.pivot = pivot
        super().__init__(f"non-positive pivot {pivot!r} at row {index}; matrix is not numerically positive definite")
