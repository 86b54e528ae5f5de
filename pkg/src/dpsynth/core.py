"""Core domain types: categorical datasets, bounded test functions, linear statistics."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, Iterator, Sequence

import numpy as np

# A statistics vector is a plain float array with one entry per family index.
StatisticsVector = np.ndarray

# Explicit value tables are only allowed on domains small enough to enumerate.
TABLE_DOMAIN_CAP = 1 << 20


@dataclass(frozen=True)
class DataPoint:
    """A single record: one category index per coordinate."""

    values: tuple[int, ...]

    def __len__(self) -> int:
        return len(self.values)

    def __getitem__(self, i: int) -> int:
        return self.values[i]


class Dataset:
    """Ordered sequence of records over a fixed per-coordinate arity schema.

    Duplicates are legal and row order is preserved. Rows are held as a
    read-only (n, p) integer array.
    """

    def __init__(self, schema: Sequence[int], rows) -> None:
        self._schema = tuple(int(a) for a in schema)
        if len(self._schema) == 0:
            raise ValueError("schema must have at least one coordinate")
        if any(a < 1 for a in self._schema):
            raise ValueError("coordinate arities must be >= 1")
        arr = np.array(rows, dtype=np.int64, copy=True)
        if arr.size == 0:
            arr = arr.reshape(0, len(self._schema))
        if arr.ndim != 2 or arr.shape[1] != len(self._schema):
            raise ValueError(f"rows must have shape (n, {len(self._schema)})")
        if arr.size and (arr.min() < 0 or (arr >= np.asarray(self._schema)).any()):
            raise ValueError("row values must lie within the schema arities")
        arr.setflags(write=False)
        self._rows = arr

    @property
    def schema(self) -> tuple[int, ...]:
        return self._schema

    @property
    def rows(self) -> np.ndarray:
        return self._rows

    def __len__(self) -> int:
        return self._rows.shape[0]

    def __getitem__(self, i: int) -> DataPoint:
        return DataPoint(tuple(int(v) for v in self._rows[i]))

    def __iter__(self) -> Iterator[DataPoint]:
        for i in range(len(self)):
            yield self[i]

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, Dataset):
            return NotImplemented
        return self._schema == other._schema and np.array_equal(self._rows, other.rows)

    def __repr__(self) -> str:
        return f"Dataset(schema={self._schema}, n={len(self)})"

    def concat(self, other: "Dataset") -> "Dataset":
        if self._schema != other._schema:
            raise ValueError("cannot concatenate datasets with different schemas")
        return Dataset(self._schema, np.vstack([self._rows, other.rows]))

    @classmethod
    def from_points(cls, schema: Sequence[int], points: Iterable) -> "Dataset":
        rows = []
        for pt in points:
            if isinstance(pt, DataPoint):
                rows.append(pt.values)
            else:
                rows.append(tuple(pt))
        return cls(schema, rows)

    def to_text(self) -> str:
        """Serialize: arity line, then one comma-separated row per record."""
        lines = [",".join(str(a) for a in self._schema)]
        lines.extend(",".join(str(v) for v in row) for row in self._rows)
        return "\n".join(lines) + "\n"

    @classmethod
    def from_text(cls, text: str) -> "Dataset":
        lines = text.splitlines()
        if not lines or not lines[0].strip():
            raise ValueError("line 1: expected comma-separated arities")
        try:
            schema = tuple(int(tok) for tok in lines[0].split(","))
        except ValueError:
            raise ValueError("line 1: expected comma-separated arities") from None
        rows = []
        for lineno, line in enumerate(lines[1:], start=2):
            try:
                rows.append(tuple(int(tok) for tok in line.split(",")))
            except ValueError:
                raise ValueError(
                    f"line {lineno}: expected comma-separated category indices"
                ) from None
        try:
            return cls(schema, rows)
        except ValueError as exc:
            raise ValueError(f"invalid dataset: {exc}") from None


def _domain_size(schema: Sequence[int]) -> int:
    size = 1
    for a in schema:
        size *= int(a)
    return size


def _encode_rows(rows: np.ndarray, schema: Sequence[int]) -> np.ndarray:
    """Mixed-radix encoding of rows into flat table indices."""
    strides = np.ones(len(schema), dtype=np.int64)
    for i in range(len(schema) - 2, -1, -1):
        strides[i] = strides[i + 1] * schema[i + 1]
    return rows @ strides


class TestFunction:
    """A query mapping records to [-1, 1].

    Kinds:
      * ``constant``: the all-ones function.
      * ``monotone``: product of the 0/1 coordinates in ``coords`` (Boolean
        coordinates only).
      * ``assignment``: indicator that the coordinates in ``coords`` equal the
        fixed ``assigned`` values.
      * ``table``: explicit value table over a full (small) domain.
    """

    __slots__ = ("kind", "coords", "assigned", "schema", "table")

    def __init__(self, kind, coords=(), assigned=(), schema=None, table=None):
        self.kind = kind
        self.coords = tuple(int(c) for c in coords)
        self.assigned = tuple(int(v) for v in assigned)
        self.schema = tuple(int(a) for a in schema) if schema is not None else None
        self.table = table
        if any(c < 0 for c in self.coords):
            raise ValueError("coordinate indices must be nonnegative")
        if len(set(self.coords)) != len(self.coords):
            raise ValueError("coordinate indices must be distinct")

    @classmethod
    def constant_one(cls) -> "TestFunction":
        return cls("constant")

    @classmethod
    def monotone(cls, coords: Sequence[int]) -> "TestFunction":
        """Product of the selected Boolean coordinates (1 on the empty set)."""
        return cls("monotone", coords=tuple(sorted(int(c) for c in coords)))

    @classmethod
    def assignment(cls, coords: Sequence[int], values: Sequence[int]) -> "TestFunction":
        """Indicator that each selected coordinate takes its assigned value."""
        if len(coords) != len(values):
            raise ValueError("need one assigned value per coordinate")
        pairs = sorted(zip((int(c) for c in coords), (int(v) for v in values)))
        if any(v < 0 for _, v in pairs):
            raise ValueError("assigned values must be nonnegative")
        return cls(
            "assignment",
            coords=tuple(c for c, _ in pairs),
            assigned=tuple(v for _, v in pairs),
        )

    @classmethod
    def from_table(cls, schema: Sequence[int], values) -> "TestFunction":
        schema = tuple(int(a) for a in schema)
        if _domain_size(schema) > TABLE_DOMAIN_CAP:
            raise ValueError("domain too large for an explicit value table")
        table = np.array(values, dtype=float, copy=True).reshape(-1)
        if len(table) != _domain_size(schema):
            raise ValueError("table must cover the whole domain")
        if (np.abs(table) > 1.0 + 1e-12).any():
            raise ValueError("table values must lie in [-1, 1]")
        table.setflags(write=False)
        return cls("table", schema=schema, table=table)

    @property
    def is_constant_one(self) -> bool:
        if self.kind == "constant":
            return True
        if self.kind in ("monotone", "assignment"):
            return len(self.coords) == 0
        return bool(np.all(self.table == 1.0))

    def check_schema(self, schema: Sequence[int]) -> None:
        """Raise ValueError unless this function conforms to the schema."""
        schema = tuple(int(a) for a in schema)
        if self.kind == "table":
            if self.schema != schema:
                raise ValueError("schema mismatch: table built for a different domain")
            return
        if self.coords and max(self.coords) >= len(schema):
            raise ValueError("schema mismatch: coordinate index out of range")
        if self.kind == "monotone":
            if any(schema[c] != 2 for c in self.coords):
                raise ValueError("monotone marginals need Boolean coordinates")
        elif self.kind == "assignment":
            for c, v in zip(self.coords, self.assigned):
                if v >= schema[c]:
                    raise ValueError(
                        f"schema mismatch: value {v} out of range for coordinate {c + 1}"
                    )

    def values(self, rows: np.ndarray) -> np.ndarray:
        """Vectorized evaluation over an (n, p) row array."""
        n = rows.shape[0]
        if self.kind == "constant":
            return np.ones(n)
        if self.kind == "monotone":
            if not self.coords:
                return np.ones(n)
            return rows[:, list(self.coords)].prod(axis=1).astype(float)
        if self.kind == "assignment":
            if not self.coords:
                return np.ones(n)
            sel = rows[:, list(self.coords)] == np.asarray(self.assigned)
            return sel.all(axis=1).astype(float)
        return self.table[_encode_rows(rows, self.schema)]

    def __call__(self, point) -> float:
        vals = point.values if isinstance(point, DataPoint) else tuple(point)
        return float(self.values(np.asarray([vals], dtype=np.int64))[0])

    def label(self) -> str:
        if self.kind == "constant" or (self.kind != "table" and not self.coords):
            return "1"
        if self.kind == "monotone":
            return "*".join(f"x{c + 1}" for c in self.coords)
        if self.kind == "assignment":
            inner = ",".join(f"x{c + 1}={v}" for c, v in zip(self.coords, self.assigned))
            return f"ind({inner})"
        return "table"

    def _key(self):
        tbl = self.table.tobytes() if self.table is not None else None
        return (self.kind, self.coords, self.assigned, self.schema, tbl)

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, TestFunction):
            return NotImplemented
        return self._key() == other._key()

    def __hash__(self) -> int:
        return hash(self._key())

    def __repr__(self) -> str:
        return f"TestFunction({self.label()})"


class QueryFamily:
    """Ordered family of test functions with stable positional indices."""

    def __init__(self, functions: Iterable[TestFunction]):
        self._functions = tuple(functions)
        if not self._functions:
            raise ValueError("query family must contain at least one function")

    def __len__(self) -> int:
        return len(self._functions)

    def __getitem__(self, i: int) -> TestFunction:
        return self._functions[i]

    def __iter__(self) -> Iterator[TestFunction]:
        return iter(self._functions)

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, QueryFamily):
            return NotImplemented
        return self._functions == other._functions

    def __repr__(self) -> str:
        return f"QueryFamily(size={len(self)})"

    @property
    def contains_constant_one(self) -> bool:
        return any(f.is_constant_one for f in self._functions)

    def with_constant_one(self) -> "QueryFamily":
        """Return a family that starts with the constant-one function."""
        if self.contains_constant_one:
            return self
        return QueryFamily((TestFunction.constant_one(),) + self._functions)

    def check_schema(self, schema: Sequence[int]) -> None:
        for f in self._functions:
            f.check_schema(schema)

    def values_matrix(self, rows: np.ndarray) -> np.ndarray:
        """(|F|, n) matrix of function values over the given rows."""
        return np.stack([f.values(rows) for f in self._functions])


@dataclass(frozen=True)
class FiniteDensity:
    """Probability weights over the points of a finite support dataset."""

    support: Dataset
    weights: np.ndarray

    def __post_init__(self):
        w = np.array(self.weights, dtype=float, copy=True)
        if w.ndim != 1 or len(w) != len(self.support):
            raise ValueError("need exactly one weight per support point")
        if (w < 0).any():
            raise ValueError("weights must be nonnegative")
        if abs(math.fsum(w) - 1.0) > 1e-9:
            raise ValueError("weights must sum to 1 within 1e-9")
        w.setflags(write=False)
        object.__setattr__(self, "weights", w)

    @classmethod
    def uniform(cls, support: Dataset) -> "FiniteDensity":
        n = len(support)
        return cls(support, np.full(n, 1.0 / n))

    @classmethod
    def point_mass(cls, support: Dataset, index: int = 0) -> "FiniteDensity":
        w = np.zeros(len(support))
        w[index] = 1.0
        return cls(support, w)


def evaluate_statistic(f: TestFunction, data: Dataset) -> float:
    """Mean of one test function over a dataset (compensated summation)."""
    if len(data) == 0:
        raise ValueError("empty dataset")
    f.check_schema(data.schema)
    return math.fsum(f.values(data.rows)) / len(data)


def evaluate_all(queries: QueryFamily, data: Dataset) -> StatisticsVector:
    """Exact statistics of a dataset under every function in the family."""
    if len(data) == 0:
        raise ValueError("empty dataset")
    queries.check_schema(data.schema)
    rows = data.rows
    n = len(data)
    return np.array([math.fsum(f.values(rows)) / n for f in queries], dtype=float)


def weighted_statistics(queries: QueryFamily, density: FiniteDensity) -> StatisticsVector:
    """Statistics of a finite density: sum of f(z) * weight(z) over the support."""
    queries.check_schema(density.support.schema)
    rows = density.support.rows
    w = density.weights
    return np.array([math.fsum(f.values(rows) * w) for f in queries], dtype=float)


def accuracy_error(queries: QueryFamily, x: Dataset, y: Dataset) -> float:
    """Worst absolute disagreement between two datasets' statistics."""
    if x.schema != y.schema:
        raise ValueError("datasets must share a schema")
    return float(np.max(np.abs(evaluate_all(queries, x) - evaluate_all(queries, y))))
