"""In-place Cholesky factorizations, plain and with optional stopping.

All routines work on a C-ordered float64 square array and read/write only
its lower triangle; the strict upper triangle is left as it was.  On a
``Stopped`` outcome the factorization is abandoned: rows ``< tau`` hold the
factor, later rows hold partially updated input.
"""

from __future__ import annotations

import math
import os
from dataclasses import dataclass, field

import numpy as np

from . import _blas
from .bounds import BoundsState, Stop, StoppingConfig, evaluate_stop
from .errors import FactorizationError, InputError

# Pivots at or below this fraction of the largest diagonal entry are
# treated as loss of positive definiteness.
PIVOT_RTOL = 1e-14

# Per-core block width; OpenBLAS's dgemm K-blocking on current x86 targets.
BLOCK_PER_CPU = 256


@dataclass(frozen=True)
class Stopped:
    estimate: float
    tau: int
    lower: float
    upper: float
    history: list[BoundsState] = field(default_factory=list, repr=False)

    stopped = True


@dataclass(frozen=True)
class Completed:
    log_det: float
    rows_processed: int
    factor: np.ndarray | None = field(default=None, repr=False)
    history: list[BoundsState] = field(default_factory=list, repr=False)

    stopped = False

    @property
    def estimate(self) -> float:
        return self.log_det


StopOutcome = Stopped | Completed


def default_block_size() -> int:
    cpus = len(os.sched_getaffinity(0)) if hasattr(os, "sched_getaffinity") else (os.cpu_count() or 1)
    return max(1, cpus) * BLOCK_PER_CPU


@dataclass(frozen=True)
class BlockPlan:
    block_size: int = field(default_factory=default_block_size)

    def __post_init__(self):
        if int(self.block_size) != self.block_size or self.block_size < 1:
            raise InputError(f"block size must be a positive integer, got {self.block_size}")

    def checkpoints(self, n_total: int) -> list[int]:
        b = self.block_size
        return [min(i * b, n_total) for i in range(1, -(-n_total // b) + 1)]


def _pivot_floor(a: np.ndarray) -> float:
    return PIVOT_RTOL * float(np.max(np.diagonal(a)))


def cholesky_full(a: np.ndarray) -> np.ndarray:
    """Factor ``a`` in place with LAPACK ``dpotrf`` and return it.

    The lower triangle then holds ``C`` with ``C C^T = A``.
    """
    view = _checked_view(a)
    floor = _pivot_floor(a)
    info = view.potrf(0, view.n)
    if info > 0:
        raise FactorizationError(info - 1, float("nan"))
    _check_diagonal(a, 0, view.n, floor)
    return a


def log_det_from_factor(c: np.ndarray) -> float:
    diag = np.diagonal(np.asarray(c))
    if np.any(~(diag > 0)):
        raise InputError("factor has a non-positive diagonal entry")
    return 2.0 * float(np.sum(np.log(diag)))


def stopped_cholesky_rowwise(a: np.ndarray, cfg: StoppingConfig) -> StopOutcome:
    """Row-by-row factorization checking the stopping rule after every row."""
    view = _checked_view(a, cfg)
    n_total = view.n
    floor = _pivot_floor(a)
    history = []
    d = 0.0
    for j in range(n_total):
        view.solve_row(j)
        row = a[j, :j]
        pivot = a[j, j] - float(row @ row)
        if not pivot > floor:
            raise FactorizationError(j, pivot)
        a[j, j] = math.sqrt(pivot)
        d += math.log(pivot)
        if j + 1 == n_total:
            break
        decision = evaluate_stop(j + 1, d, cfg)
        history.append(decision.bounds)
        if isinstance(decision, Stop):
            b = decision.bounds
            return Stopped(decision.estimate, j + 1, b.lower, b.upper, history)
    return Completed(d, n_total, a, history)


def stopped_cholesky_blocked(a: np.ndarray, plan: BlockPlan, cfg: StoppingConfig) -> StopOutcome:
    """Left-looking blocked factorization checking the rule once per block.

    For each block row ``[i, j)``: the panel ``A[i:j, :i]`` is solved against
    the finished factor, the diagonal block receives its Schur update and is
    factored, and the new diagonal entries extend the running log-det.
    """
    view = _checked_view(a, cfg)
    n_total = view.n
    floor = _pivot_floor(a)
    history = []
    d = 0.0
    start = 0
    for stop in plan.checkpoints(n_total):
        rows = stop - start
        if start > 0:
            view.solve_panel(start, rows, 0, start)
            view.schur_update(start, rows)
        info = view.potrf(start, rows)
        if info > 0:
            raise FactorizationError(start + info - 1, float(a[start + info - 1, start + info - 1]))
        _check_diagonal(a, start, stop, floor)
        d += 2.0 * float(np.sum(np.log(np.diagonal(a)[start:stop])))
        start = stop
        if stop == n_total:
            break
        decision = evaluate_stop(stop, d, cfg)
        history.append(decision.bounds)
        if isinstance(decision, Stop):
            b = decision.bounds
            return Stopped(decision.estimate, stop, b.lower, b.upper, history)
    return Completed(d, n_total, a, history)


def _checked_view(a: np.ndarray, cfg: StoppingConfig | None = None) -> _blas.BlockView:
    try:
        view = _blas.BlockView(a)
    except ValueError as exc:
        raise InputError(str(exc)) from None
    if cfg is not None and cfg.n_total != view.n:
        raise InputError(f"config is for N={cfg.n_total} but the matrix is {view.n}x{view.n}")
    return view


def _check_diagonal(a: np.ndarray, start: int, stop: int, floor: float) -> None:
    diag = np.diagonal(a)[start:stop]
    bad = np.flatnonzero(~(diag * diag > floor))
    if bad.size:
        j = start + int(bad[0])
        raise FactorizationError(j, float(a[j, j]) ** 2)
