"""Cholesky decomposition with full (diagonal) pivoting, used as a baseline.

Each step factors the index with the largest residual diagonal
``d_j = A_jj - sum_k L_jk^2``.  After ``n`` steps, with ``D_n`` the log-sum of
the chosen pivots, the log-determinant is bracketed deterministically by

    lower = D_n + (N - n) * log(sigma2)
    upper = D_n + sum over unpivoted j of log(d_j)

(the upper bound is Hadamard's inequality on the Schur complement), so the
same sign/relative-precision test as the stopped Cholesky applies.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .bounds import BoundsState, StoppingConfig, decide, Stop, relative_error_bound
from .errors import FactorizationError, InputError

# Residuals are floored at sigma2 * (1 - CLAMP_RTOL) before taking logs.
CLAMP_RTOL = 1e-9


@dataclass(frozen=True)
class PivotStep:
    n: int
    pivot: int
    max_residual: float
    d_n: float
    lower: float | None
    upper: float


@dataclass
class PivotedResult:
    rank: int
    perm: np.ndarray
    rows: np.ndarray
    history: list[PivotStep]
    reason: str
    estimate: float | None = None
    log_det: float | None = None
    clamped: int = 0
    residual: np.ndarray = field(default=None, repr=False)

    @property
    def completed(self) -> bool:
        return self.rank == self.perm.size

    @property
    def final(self) -> PivotStep:
        return self.history[-1]


def pivoted_cholesky(
    a: np.ndarray,
    diag_tol: float,
    cfg: StoppingConfig | None = None,
    *,
    sigma2: float | None = None,
    max_steps: int | None = None,
) -> PivotedResult:
    """Greedy pivoted Cholesky of a symmetric positive definite ``a``.

    Stops when the largest residual in excess of ``sigma2`` is at most
    ``diag_tol`` (``sigma2`` is taken from ``cfg`` when given, else from the
    keyword, else 0), when ``cfg``'s stopping conditions hold on the pivoted
    bounds, after ``max_steps`` steps, or when all ``N`` indices are pivoted.
    Only the computed rows of the factor are materialized: ``rows[s]`` is
    row ``s`` of ``L^T`` in original index order, so ``cost = O(N S^2)``.

    ``a`` is not modified.
    """
    a = np.asarray(a, dtype=float)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise InputError("expected a square matrix")
    if not diag_tol > 0:
        raise InputError(f"diag_tol must be positive, got {diag_tol}")
    n_total = a.shape[0]
    if cfg is not None:
        if cfg.n_total != n_total:
            raise InputError(f"config is for N={cfg.n_total} but the matrix is {n_total}x{n_total}")
        sigma2 = cfg.sigma2
    floor = 0.0 if sigma2 is None else sigma2
    kappa_minus = None if sigma2 is None else math.log(sigma2)
    limit = n_total if max_steps is None else min(max_steps, n_total)

    residual = np.array(np.diagonal(a), dtype=float)
    active = np.ones(n_total, dtype=bool)
    rows = np.zeros((limit, n_total))
    perm = np.arange(n_total)
    history = []
    clamped = 0
    d = 0.0

    def snapshot(n, pivot, max_res):
        nonlocal clamped
        rest = residual[active]
        if rest.size and sigma2 is not None:
            low = sigma2 * (1 - CLAMP_RTOL)
            clamped += int(np.count_nonzero(rest < low))
            rest = np.maximum(rest, low)
        with np.errstate(divide="ignore"):
            upper = d + float(np.sum(np.log(rest)))
        lower = None if kappa_minus is None else d + (n_total - n) * kappa_minus
        step = PivotStep(n, pivot, max_res, d, lower, upper)
        history.append(step)
        return step

    reason = "complete"
    step = snapshot(0, -1, float(residual.max()))
    n = 0
    while n < n_total:
        masked = np.where(active, residual, -np.inf)
        p = int(np.argmax(masked))
        max_res = float(masked[p])
        if max_res - floor <= diag_tol:
            reason = "diag"
            break
        if n >= limit:
            reason = "max_steps"
            break
        if not max_res > 0:
            raise FactorizationError(n, max_res)
        pivot = math.sqrt(max_res)
        col = a[p] - rows[:n, p] @ rows[:n] if n else np.array(a[p], dtype=float)
        col /= pivot
        col[~active] = 0.0
        col[p] = pivot
        rows[n] = col
        active[p] = False
        residual -= col * col
        residual[p] = 0.0
        perm[n] = p
        d += math.log(max_res)
        n += 1
        step = snapshot(n, p, max_res)
        if cfg is not None and n < n_total and step.lower is not None:
            state = BoundsState(n, d, step.lower, step.upper, step.upper, step.upper)
            if isinstance(decide(state, cfg.r), Stop):
                reason = "conditions"
                break

    result = PivotedResult(
        rank=n,
        perm=_complete_perm(perm, n, active),
        rows=rows[:n],
        history=history,
        reason=reason,
        clamped=clamped,
        residual=np.where(active, residual, 0.0),
    )
    if n == n_total:
        result.log_det = d
        result.estimate = d
    elif step.lower is not None and step.lower <= step.upper:
        result.estimate = 0.5 * (step.lower + step.upper)
    return result


def _complete_perm(perm, n, active):
    out = perm.copy()
    out[n:] = np.flatnonzero(active)
    return out


def guaranteed_precision_at_stop(result: PivotedResult) -> float:
    """Relative precision certified by the pivoted bounds at the final step.

    0 for a completed factorization; ``inf`` when the bounds straddle zero
    or no lower bound is available (no ``sigma2``).
    """
    if result.completed:
        return 0.0
    last = result.final
    if last.lower is None or last.lower > last.upper:
        return math.inf
    rel = relative_error_bound(last.lower, last.upper)
    return math.inf if rel is None else rel
