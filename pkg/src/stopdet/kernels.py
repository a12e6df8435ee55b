"""Stationary covariance functions and kernel-matrix assembly."""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np
from scipy.spatial.distance import cdist

from .errors import InputError


class Family(str, enum.Enum):
    RBF = "rbf"
    OU = "ou"


@dataclass(frozen=True)
class KernelSpec:
    """A stationary kernel with signal variance ``theta``.

    RBF: ``theta * exp(-|x-z|^2 / (2 l^2))``; OU: ``theta * exp(-|x-z| / l)``.
    """

    family: Family
    theta: float = 1.0
    lengthscale: float = 1.0

    def __post_init__(self):
        try:
            object.__setattr__(self, "family", Family(self.family))
        except ValueError:
            raise InputError(f"unknown kernel family {self.family!r}") from None
        if not (self.theta > 0 and math.isfinite(self.theta)):
            raise InputError(f"theta must be positive, got {self.theta}")
        if not (self.lengthscale > 0 and math.isfinite(self.lengthscale)):
            raise InputError(f"lengthscale must be positive, got {self.lengthscale}")

    def _from_distance(self, dist):
        if self.family is Family.RBF:
            return self.theta * np.exp(-0.5 * (dist / self.lengthscale) ** 2)
        return self.theta * np.exp(-dist / self.lengthscale)


def kernel_eval(spec: KernelSpec, x, z) -> float:
    x = np.atleast_1d(np.asarray(x, dtype=float))
    z = np.atleast_1d(np.asarray(z, dtype=float))
    if x.shape != z.shape or x.ndim != 1:
        raise InputError(f"dimension mismatch: {x.shape} vs {z.shape}")
    return float(spec._from_distance(np.linalg.norm(x - z)))


def _as_points(points) -> np.ndarray:
    if isinstance(points, np.ndarray):
        pts = points
    else:
        rows = list(points)
        if not rows:
            raise InputError("no points given")
        dims = {np.size(r) for r in rows}
        if len(dims) != 1:
            raise InputError(f"points have mixed dimensions {sorted(dims)}")
        pts = np.asarray(rows)
    pts = np.asarray(pts, dtype=float)
    if pts.ndim == 1:
        pts = pts[:, None]
    if pts.ndim != 2 or pts.shape[0] == 0:
        raise InputError(f"expected a nonempty (N, D) point array, got shape {pts.shape}")
    return pts


def assemble_matrix(points, spec: KernelSpec, sigma2: float, clamp_below: float | None = None) -> np.ndarray:
    """Return the C-ordered ``N x N`` matrix ``K + sigma2 * I``.

    Both triangles are filled; the factorizations only read the lower one.
    Off-diagonal entries smaller than ``clamp_below`` are set to zero when
    given (off by default).
    """
    if not sigma2 > 0:
        raise InputError(f"sigma2 must be positive, got {sigma2}")
    pts = _as_points(points)
    # cdist works on differences directly, avoiding the cancellation of the
    # |x|^2 + |z|^2 - 2 x.z expansion.
    if spec.family is Family.RBF:
        a = cdist(pts, pts, "sqeuclidean")
        a *= -0.5 / spec.lengthscale**2
    else:
        a = cdist(pts, pts, "euclidean")
        a *= -1.0 / spec.lengthscale
    np.exp(a, out=a)
    a *= spec.theta
    if clamp_below is not None:
        a[a < clamp_below] = 0.0
    # Exact stationary diagonal, independent of rounding in the distance.
    np.fill_diagonal(a, spec.theta + sigma2)
    return np.ascontiguousarray(a)


def kappa_plus(spec: KernelSpec, sigma2: float) -> float:
    """Tightest almost-sure bound on ``log C_jj^2`` for a stationary kernel.

    Rounded up by one ulp so it dominates ``log(theta + sigma2)`` under any
    libm (``math.log`` and ``np.log`` may differ in the last bit).
    """
    return math.nextafter(math.log(spec.theta + sigma2), math.inf)
