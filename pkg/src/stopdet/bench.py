"""Experiment harness: parameter sweeps, timing, and the relative-time metric.

For every lengthscale (a *config group*) and every random permutation of the
data, the default LAPACK Cholesky is timed first; it provides the exact
log-determinant and the normaliser of the metric ``m = t / mean(t_full)``
over the group.  Stopped variants run once per requested precision ``r``.
When the pivoted baseline is selected it runs once per diagonal tolerance
``d``; the precision it can certify on stopping then becomes the target of a
paired stopped run.
"""

from __future__ import annotations

import csv
import json
import math
import time
from dataclasses import asdict, dataclass, field, fields
from pathlib import Path

import numpy as np

from .bounds import make_config
from .cholesky import BlockPlan, cholesky_full, log_det_from_factor, stopped_cholesky_blocked, stopped_cholesky_rowwise
from .data import load_dataset, permute, synth_gaussian
from .errors import InputError
from .kernels import KernelSpec, assemble_matrix, kappa_plus
from .oracle import trial_seed
from .pivoted import guaranteed_precision_at_stop, pivoted_cholesky

ALGORITHMS = ("full", "rowwise", "blocked", "pivoted")
STOPPED = ("rowwise", "blocked")
PIVOT_TOLERANCES = (0.001, 0.005, 0.01, 0.05, 0.1, 0.5)


@dataclass
class RunConfig:
    kernel: str = "rbf"
    theta: float = 1.0
    lengthscales: list[float] = field(default_factory=lambda: [1.0])
    sigma2: float = 1e-3
    delta: float = 0.1
    r: list[float] = field(default_factory=list)
    d: list[float] = field(default_factory=list)
    permutations: int = 10
    block_size: int | None = None
    algorithms: list[str] = field(default_factory=lambda: ["full", "blocked"])
    seed: int = 0
    data: str | None = None
    schema: str | None = None
    header: bool = True
    preclean: bool = False
    synthetic: tuple[int, int] | None = None
    max_rows: int | None = None

    def __post_init__(self):
        KernelSpec(self.kernel)  # validates the family name
        if not self.lengthscales:
            raise InputError("lengthscale grid is empty")
        if self.permutations < 1:
            raise InputError("permutations must be >= 1")
        unknown = set(self.algorithms) - set(ALGORITHMS)
        if unknown or not self.algorithms:
            raise InputError(f"algorithms must be a nonempty subset of {ALGORITHMS}, got {self.algorithms}")
        stopped = any(a in STOPPED for a in self.algorithms)
        if "pivoted" in self.algorithms and not self.d:
            self.d = list(PIVOT_TOLERANCES)
        if stopped and not self.r and "pivoted" not in self.algorithms:
            raise InputError("stopped algorithms need an r grid (or pivoted runs to pair with)")
        if (self.data is None) == (self.synthetic is None):
            raise InputError("give exactly one of 'data' or 'synthetic'")
        if self.data is not None and self.schema is None:
            raise InputError("'data' needs a 'schema' file")

    @property
    def dataset_name(self) -> str:
        if self.data is not None:
            return Path(self.data).stem
        return "synthetic-{}x{}".format(*self.synthetic)


def _floats(value: str) -> list[float]:
    return [float(v) for v in value.split(",") if v.strip()]


def _bool(value: str) -> bool:
    v = value.strip().lower()
    if v in ("1", "true", "yes", "on"):
        return True
    if v in ("0", "false", "no", "off"):
        return False
    raise ValueError(f"not a boolean: {value!r}")


_PARSERS = {
    "kernel": str.strip,
    "theta": float,
    "lengthscales": _floats,
    "lengthscale": _floats,
    "log_lengthscales": lambda v: [math.exp(x) for x in _floats(v)],
    "sigma2": float,
    "delta": float,
    "r": _floats,
    "d": _floats,
    "permutations": int,
    "block_size": int,
    "algorithms": lambda v: [a.strip() for a in v.split(",") if a.strip()],
    "seed": int,
    "data": str.strip,
    "schema": str.strip,
    "header": _bool,
    "preclean": _bool,
    "synthetic": lambda v: tuple(int(x) for x in v.split(",")),
    "max_rows": int,
}


def parse_run_config(text: str, base_dir=None) -> RunConfig:
    """Parse flat ``key = value`` lines (``#`` starts a comment).

    Grids are comma-separated.  ``log_lengthscales = -1,0,1`` means
    ``lengthscales = e^-1, e^0, e^1``.  Relative ``data``/``schema`` paths are
    resolved against ``base_dir``.
    """
    kwargs = {}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        key, sep, value = line.partition("=")
        key = key.strip().lower()
        if not sep or key not in _PARSERS:
            raise InputError(f"line {lineno}: cannot parse {raw!r}")
        try:
            parsed = _PARSERS[key](value)
        except ValueError as exc:
            raise InputError(f"line {lineno}: bad value for {key}: {exc}") from None
        if key in ("lengthscale", "log_lengthscales"):
            key = "lengthscales"
        if key in ("data", "schema") and base_dir is not None:
            parsed = str(Path(base_dir) / parsed)
        if key == "synthetic" and len(parsed) != 2:
            raise InputError(f"line {lineno}: synthetic needs 'n,dim'")
        kwargs[key] = parsed
    try:
        return RunConfig(**kwargs)
    except TypeError as exc:
        raise InputError(str(exc)) from None


def load_run_config(path) -> RunConfig:
    path = Path(path)
    return parse_run_config(path.read_text(), base_dir=path.parent)


@dataclass
class RunRecord:
    dataset: str
    n: int
    dim: int
    kernel: str
    theta: float
    lengthscale: float
    sigma2: float
    delta: float
    algorithm: str
    block_size: int | None
    tolerance_kind: str | None  # "r", "d" or None for the full factorization
    tolerance: float | None
    r_target: float | None
    permutation: int
    perm_seed: int
    wall_time: float
    cpu_time: float
    stop_index: int
    stopped: bool
    estimate: float
    reference: float | None
    rel_error: float | None
    m: float | None = None
    warnings: str = ""


RECORD_FIELDS = tuple(f.name for f in fields(RunRecord))


def _timed(fn, *args, **kwargs):
    cpu0, wall0 = time.process_time(), time.perf_counter()
    out = fn(*args, **kwargs)
    return out, time.perf_counter() - wall0, time.process_time() - cpu0


def _load_dataset(cfg: RunConfig):
    if cfg.data is not None:
        ds = load_dataset(cfg.data, cfg.schema, header=cfg.header, preclean=cfg.preclean)
    else:
        n, dim = cfg.synthetic
        ds = synth_gaussian(n, dim, cfg.seed)
    return ds


def run_sweep(cfg: RunConfig, progress=None) -> list[RunRecord]:
    dataset = _load_dataset(cfg)
    block = BlockPlan(cfg.block_size) if cfg.block_size else BlockPlan()
    stopped_algos = [a for a in cfg.algorithms if a in STOPPED]
    records = []
    for lengthscale in cfg.lengthscales:
        spec = KernelSpec(cfg.kernel, cfg.theta, lengthscale)
        group = []
        for p in range(cfg.permutations):
            perm_seed = trial_seed(cfg.seed, p)
            points = permute(dataset, perm_seed).rows
            if cfg.max_rows is not None:
                points = points[: cfg.max_rows]
            n, dim = points.shape
            a = assemble_matrix(points, spec, cfg.sigma2)
            kp = kappa_plus(spec, cfg.sigma2)

            def record(algorithm, wall, cpu, stop_index, stopped, estimate, **extra):
                rel = None if reference == 0 else abs(reference - estimate) / abs(reference)
                rec = RunRecord(
                    dataset=cfg.dataset_name, n=n, dim=dim, kernel=spec.family.value, theta=cfg.theta,
                    lengthscale=lengthscale, sigma2=cfg.sigma2, delta=cfg.delta, algorithm=algorithm,
                    block_size=block.block_size if algorithm == "blocked" else None,
                    tolerance_kind=extra.pop("tolerance_kind", None), tolerance=extra.pop("tolerance", None),
                    r_target=extra.pop("r_target", None), permutation=p, perm_seed=perm_seed,
                    wall_time=wall, cpu_time=cpu, stop_index=stop_index, stopped=stopped,
                    estimate=estimate, reference=reference, rel_error=rel,
                    warnings=";".join(extra.pop("warnings", [])),
                )
                group.append(rec)
                if progress:
                    progress(rec)

            if p == 0:
                cholesky_full(a.copy())  # warm-up, untimed

            work = a.copy()
            _, wall, cpu = _timed(cholesky_full, work)
            reference = log_det_from_factor(work)
            del work
            record("full", wall, cpu, n, False, reference)

            def run_stopped(algorithm, r, **tags):
                config = make_config(n, cfg.sigma2, cfg.delta, r, kp)
                warnings = list(tags.pop("warnings", []))
                if config.loose_precision:
                    warnings.append("r>=1")
                work = a.copy()
                if algorithm == "rowwise":
                    out, wall, cpu = _timed(stopped_cholesky_rowwise, work, config)
                else:
                    out, wall, cpu = _timed(stopped_cholesky_blocked, work, block, config)
                stop_index = out.tau if out.stopped else n
                record(algorithm, wall, cpu, stop_index, out.stopped, out.estimate, r_target=r, warnings=warnings, **tags)

            for r in cfg.r:
                for algorithm in stopped_algos:
                    run_stopped(algorithm, r, tolerance_kind="r", tolerance=r)

            if "pivoted" in cfg.algorithms:
                for d in cfg.d:
                    res, wall, cpu = _timed(pivoted_cholesky, a, d, sigma2=cfg.sigma2)
                    r_p = guaranteed_precision_at_stop(res)
                    warnings = []
                    if not math.isfinite(r_p):
                        warnings.append("pivoted-precision-undefined")
                        r_p = 1.0
                    estimate = res.estimate if res.estimate is not None else math.nan
                    record("pivoted", wall, cpu, res.rank, not res.completed, estimate,
                           tolerance_kind="d", tolerance=d, r_target=r_p, warnings=warnings)
                    for algorithm in stopped_algos:
                        run_stopped(algorithm, r_p, tolerance_kind="d", tolerance=d, warnings=warnings)

        t_default = float(np.mean([rec.wall_time for rec in group if rec.algorithm == "full"]))
        for rec in group:
            rec.m = rec.wall_time / t_default
        keep = set(cfg.algorithms)
        records.extend(rec for rec in group if rec.algorithm in keep)
    return records


def _csv_value(value):
    if value is None:
        return ""
    return repr(value) if isinstance(value, float) else value


def emit_report(records: list[RunRecord], path, fmt: str = "csv") -> None:
    """Write one record per line: CSV with a header row, or JSON-lines.

    Columns/keys follow ``RECORD_FIELDS``.
    """
    if not records:
        raise InputError("no records to write")
    path = Path(path)
    if fmt == "csv":
        with path.open("w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(RECORD_FIELDS)
            for rec in records:
                writer.writerow([_csv_value(getattr(rec, name)) for name in RECORD_FIELDS])
    elif fmt == "jsonl":
        with path.open("w") as fh:
            for rec in records:
                fh.write(json.dumps(asdict(rec)) + "\n")
    else:
        raise InputError(f"unknown report format {fmt!r}")


def read_jsonl(path) -> list[RunRecord]:
    with Path(path).open() as fh:
        return [RunRecord(**json.loads(line)) for line in fh if line.strip()]
