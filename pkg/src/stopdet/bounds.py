"""Stopping rule for a sum of addends bounded in ``[kappa_minus, kappa_plus]``
that decrease in conditional expectation.

After ``n`` of ``N`` addends with partial sum ``D_n``::

    lower      = D_n + (N - n) * kappa_minus
    upper_prob = D_n + c_delta + (N - n) * (D_n + c_delta) / n
    upper_det  = D_n + (N - n) * kappa_plus
    upper      = min(upper_prob, upper_det)

and the run may stop with estimate ``(lower + upper) / 2`` once both bounds
share a nonzero sign and ``(upper - lower) / (2 min(|lower|, |upper|)) <= r``.
``c_delta = (kappa_plus - kappa_minus) * H_N^{-1}(delta / 2)`` where ``H_N`` is
the tail function of the Hoeffding inequality for supermartingales.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

from .errors import InputError

_BISECT_MAX_ITER = 200


def log_h_n(x: float, n_total: int) -> float:
    """``log H_N(x)``; ``-inf`` for ``x > N``."""
    if x < 0:
        raise InputError(f"H_N is defined for x >= 0, got {x}")
    n = float(n_total)
    if x > n:
        return -math.inf
    if x == 0:
        return 0.0
    # (N+x) log(N/(N+x)) + (N-x) log(N/(N-x)), with 0 log(.) = 0 at x = N
    plus = -(n + x) * math.log1p(x / n)
    minus = 0.0 if x == n else -(n - x) * math.log1p(-x / n)
    return 0.5 * (plus + minus)


def h_n(x: float, n_total: int) -> float:
    return math.exp(log_h_n(x, n_total))


def h_n_inverse(target: float, n_total: int) -> float:
    """Point ``x`` in ``[0, N]`` where the decreasing ``H_N`` crosses ``target``.

    Bisection to an absolute width of ``1e-12 * N``.  The upper end of the
    final bracket is returned, so ``H_N(x) <= target`` always holds and the
    resulting ``c_delta`` never undershoots.
    """
    if not (0 < target <= 1):
        raise InputError(f"target must lie in (0, 1], got {target}")
    if n_total < 1:
        raise InputError(f"N must be a positive integer, got {n_total}")
    if target == 1:
        return 0.0
    log_target = math.log(target)
    if log_target <= log_h_n(float(n_total), n_total):
        return float(n_total)
    lo, hi = 0.0, float(n_total)
    tol = 1e-12 * n_total
    for _ in range(_BISECT_MAX_ITER):
        if hi - lo <= tol:
            break
        mid = 0.5 * (lo + hi)
        if log_h_n(mid, n_total) > log_target:
            lo = mid
        else:
            hi = mid
    return hi


@dataclass(frozen=True)
class StoppingConfig:
    n_total: int
    sigma2: float
    delta: float
    r: float
    kappa_plus: float
    kappa_minus: float = field(init=False)
    c_delta: float = field(init=False)

    def __post_init__(self):
        if int(self.n_total) != self.n_total or self.n_total < 1:
            raise InputError(f"n_total must be a positive integer, got {self.n_total}")
        if not self.sigma2 > 0:
            raise InputError(f"sigma2 must be positive, got {self.sigma2}")
        if not (0 < self.delta <= 1):
            raise InputError(f"delta must lie in (0, 1], got {self.delta}")
        if not self.r >= 0 or math.isnan(self.r):
            raise InputError(f"r must be nonnegative, got {self.r}")
        kappa_minus = math.log(self.sigma2)
        if not self.kappa_plus > kappa_minus:
            raise InputError(f"kappa_plus={self.kappa_plus} must exceed log(sigma2)={kappa_minus}")
        object.__setattr__(self, "kappa_minus", kappa_minus)
        spread = self.kappa_plus - kappa_minus
        object.__setattr__(self, "c_delta", spread * h_n_inverse(self.delta / 2, self.n_total))

    @property
    def loose_precision(self) -> bool:
        """``r >= 1``: accepted, but the trivial estimate 0 would already do."""
        return self.r >= 1


def make_config(n_total: int, sigma2: float, delta: float, r: float, kappa_plus: float) -> StoppingConfig:
    return StoppingConfig(n_total=n_total, sigma2=sigma2, delta=delta, r=r, kappa_plus=kappa_plus)


@dataclass(frozen=True)
class BoundsState:
    n: int
    d_n: float
    lower: float
    upper: float
    upper_prob: float
    upper_det: float

    @property
    def estimate(self) -> float:
        return 0.5 * (self.lower + self.upper)


def bound_values(n: int, d_n: float, n_total: int, kappa_minus: float, kappa_plus: float, c_delta: float) -> BoundsState:
    """The bounds after ``n`` of ``n_total`` addends, from explicit constants."""
    if not (1 <= n <= n_total):
        raise InputError(f"n must lie in [1, {n_total}], got {n}")
    remaining = n_total - n
    lower = d_n + remaining * kappa_minus
    upper_prob = d_n + c_delta + remaining * (d_n + c_delta) / n
    upper_det = d_n + remaining * kappa_plus
    return BoundsState(n, d_n, lower, min(upper_prob, upper_det), upper_prob, upper_det)


def bounds_at(n: int, d_n: float, cfg: StoppingConfig) -> BoundsState:
    return bound_values(n, d_n, cfg.n_total, cfg.kappa_minus, cfg.kappa_plus, cfg.c_delta)


def relative_error_bound(lower: float, upper: float) -> float | None:
    """Worst-case relative error of the midpoint of ``[lower, upper]``.

    ``None`` when the interval touches or straddles zero.
    """
    if lower > upper:
        raise InputError(f"lower={lower} exceeds upper={upper}")
    if lower > 0 or upper < 0:
        return (upper - lower) / (2 * min(abs(lower), abs(upper)))
    return None


@dataclass(frozen=True)
class Continue:
    bounds: BoundsState


@dataclass(frozen=True)
class Stop:
    estimate: float
    bounds: BoundsState


StopDecision = Continue | Stop


def decide(state: BoundsState, r: float) -> StopDecision:
    # An inverted interval can only come from rounding when c_delta ~ 0.
    if state.lower > state.upper:
        return Continue(state)
    rel = relative_error_bound(state.lower, state.upper)
    if rel is not None and rel <= r:
        return Stop(state.estimate, state)
    return Continue(state)


def evaluate_stop(n: int, d_n: float, cfg: StoppingConfig) -> StopDecision:
    if n >= cfg.n_total:
        raise InputError(f"evaluate_stop needs n < N={cfg.n_total}; at n = N the sum is exact")
    return decide(bounds_at(n, d_n, cfg), cfg.r)
