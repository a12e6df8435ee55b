"""Dataset loading and preprocessing: CSV + schema, one-hot encoding,
standardization, seeded shuffling, and synthetic Gaussian inputs."""

from __future__ import annotations

import csv
import re
from dataclasses import dataclass, replace
from pathlib import Path

import numpy as np

from .errors import InputError

NUMERIC = "numeric"
CATEGORICAL = "categorical"


@dataclass(frozen=True)
class RawTable:
    names: list[str]
    kinds: list[str]
    columns: list[list]  # floats for numeric columns, level strings otherwise
    levels: dict[int, list[str]]  # column index -> levels in first-appearance order

    @property
    def n_rows(self) -> int:
        return len(self.columns[0]) if self.columns else 0


@dataclass(frozen=True)
class Dataset:
    rows: np.ndarray
    column_meta: list  # "numeric" or ("onehot", source column name, level)
    standardized: bool = False

    @property
    def n(self) -> int:
        return self.rows.shape[0]

    @property
    def dim(self) -> int:
        return self.rows.shape[1]


def read_schema(path) -> list[str]:
    """One line per column, ``numeric`` or ``categorical``; blank lines and
    ``#`` comments are skipped."""
    kinds = []
    for lineno, line in enumerate(Path(path).read_text().splitlines(), 1):
        word = line.split("#", 1)[0].strip().lower()
        if not word:
            continue
        if word not in (NUMERIC, CATEGORICAL):
            raise InputError(f"{path}:{lineno}: expected 'numeric' or 'categorical', got {word!r}")
        kinds.append(word)
    if not kinds:
        raise InputError(f"{path}: empty schema")
    return kinds


_SPACES = re.compile(r"\s+")


def _preclean(line: str) -> str:
    return _SPACES.sub(" ", line.replace("'", "")).strip()


def load_csv(path, schema: list[str], header: bool = True, preclean: bool = False) -> RawTable:
    """Read a comma-separated UTF-8 file into typed columns.

    ``preclean`` strips apostrophes and collapses runs of whitespace before
    parsing, for files that the csv module would otherwise mis-split.
    """
    path = Path(path)
    with path.open(newline="", encoding="utf-8") as fh:
        lines = (_preclean(line) for line in fh) if preclean else fh
        records = [rec for rec in csv.reader(lines) if rec and any(field.strip() for field in rec)]
    if header:
        if not records:
            raise InputError(f"{path}: missing header row")
        names, records = [h.strip() for h in records[0]], records[1:]
    else:
        names = [f"x{i}" for i in range(len(schema))]
    width = len(schema)
    if len(names) != width:
        raise InputError(f"{path}: header has {len(names)} columns but schema has {width}")
    if not records:
        raise InputError(f"{path}: no data rows")

    columns = [[] for _ in range(width)]
    levels = {i: [] for i, kind in enumerate(schema) if kind == CATEGORICAL}
    seen = {i: set() for i in levels}
    first_row = 2 if header else 1
    for r, rec in enumerate(records, first_row):
        if len(rec) != width:
            raise InputError(f"{path}: row {r} has {len(rec)} fields, expected {width}")
        for c, (kind, value) in enumerate(zip(schema, rec)):
            value = value.strip()
            if kind == NUMERIC:
                try:
                    columns[c].append(float(value))
                except ValueError:
                    raise InputError(f"{path}: row {r}, column {c + 1} ({names[c]}): cannot parse {value!r} as a number") from None
            else:
                if value not in seen[c]:
                    seen[c].add(value)
                    levels[c].append(value)
                columns[c].append(value)
    return RawTable(names, list(schema), columns, levels)


def one_hot(table: RawTable) -> Dataset:
    blocks = []
    meta = []
    for c, (name, kind) in enumerate(zip(table.names, table.kinds)):
        values = table.columns[c]
        if kind == NUMERIC:
            blocks.append(np.asarray(values, dtype=float)[:, None])
            meta.append(NUMERIC)
        else:
            lv = table.levels[c]
            index = {level: k for k, level in enumerate(lv)}
            codes = np.fromiter((index[v] for v in values), dtype=int, count=len(values))
            blocks.append(np.eye(len(lv))[codes])
            meta.extend(("onehot", name, level) for level in lv)
    rows = np.hstack(blocks) if blocks else np.empty((table.n_rows, 0))
    return Dataset(np.ascontiguousarray(rows), meta, standardized=False)


def standardize(ds: Dataset) -> Dataset:
    """Center every column and scale it to unit population standard deviation.

    Constant columns become zeros.
    """
    constant = np.ptp(ds.rows, axis=0) == 0
    x = ds.rows - ds.rows.mean(axis=0)
    x -= x.mean(axis=0)  # second pass removes the rounding residue of the first
    x[:, constant] = 0.0
    # pre-scale so the squares in std neither underflow nor overflow
    scale = np.abs(x).max(axis=0)
    scale[scale == 0] = 1.0
    x /= scale
    std = x.std(axis=0)
    std[std == 0] = 1.0
    return replace(ds, rows=x / std, standardized=True)


def permute(ds: Dataset, seed) -> Dataset:
    order = np.random.default_rng(seed).permutation(ds.n)
    return replace(ds, rows=ds.rows[order])


def synth_gaussian(n: int, dim: int, seed) -> Dataset:
    if n < 1 or dim < 1:
        raise InputError(f"need n, dim >= 1, got n={n}, dim={dim}")
    rows = np.random.default_rng(seed).standard_normal((n, dim))
    return Dataset(rows, [NUMERIC] * dim, standardized=False)


def load_dataset(path, schema_path, header: bool = True, preclean: bool = False) -> Dataset:
    """The full preprocessing pipeline: load, one-hot encode, standardize."""
    return standardize(one_hot(load_csv(path, read_schema(schema_path), header=header, preclean=preclean)))
