"""CSV ingestion, cleaning, and discretization into categorical tables.

The pipeline is load_csv -> with_normalized_names -> clean -> discretize.
Everything downstream (discovery, validation, bayesnet) consumes the
resulting DataTable, which stores one integer level code per cell.
"""

from __future__ import annotations

import csv
import json
from bisect import bisect_right
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .errors import (
    CellParseError,
    EmptyAfterCleanError,
    HeaderMismatchError,
    MissingFileError,
    SpecForCategoricalColumnError,
    UnknownColumnError,
)

NUMERIC = "numeric"
CATEGORICAL = "categorical"


@dataclass(frozen=True)
class ColumnSpec:
    name: str
    kind: str  # NUMERIC or CATEGORICAL

    def __post_init__(self):
        if self.kind not in (NUMERIC, CATEGORICAL):
            raise ValueError(f"unknown column kind {self.kind!r}")
        if not self.name:
            raise ValueError("column name must be non-empty")


@dataclass
class RawTable:
    """Typed but not yet discretized table; numeric cells are floats."""

    columns: list[ColumnSpec]
    rows: list[list[object]]

    def __post_init__(self):
        names = [c.name for c in self.columns]
        if len(set(names)) != len(names):
            raise ValueError("duplicate column names")
        for r in self.rows:
            if len(r) != len(self.columns):
                raise ValueError("row width does not match column count")

    @property
    def n_rows(self) -> int:
        return len(self.rows)

    def column_index(self, name: str) -> int:
        for i, c in enumerate(self.columns):
            if c.name == name:
                return i
        raise UnknownColumnError(name)

    def column_values(self, name: str) -> list[object]:
        i = self.column_index(name)
        return [r[i] for r in self.rows]

    def drop_columns(self, names: list[str]) -> "RawTable":
        keep = [i for i, c in enumerate(self.columns) if c.name not in names]
        return RawTable(
            columns=[self.columns[i] for i in keep],
            rows=[[r[i] for i in keep] for r in self.rows],
        )


@dataclass(frozen=True)
class BinSpec:
    """Cut points for one numeric column; value v gets labels[i] where
    i = number of cut points <= v (a value on a cut point goes up)."""

    column: str
    cut_points: tuple[float, ...]
    labels: tuple[str, ...]

    def __post_init__(self):
        if len(self.labels) != len(self.cut_points) + 1:
            raise ValueError("need exactly len(cut_points) + 1 labels")
        if any(b <= a for a, b in zip(self.cut_points, self.cut_points[1:])):
            raise ValueError("cut points must be strictly ascending")
        if len(set(self.labels)) != len(self.labels):
            raise ValueError("labels must be unique")

    def label_for(self, value: float) -> str:
        return self.labels[bisect_right(list(self.cut_points), value)]


@dataclass(frozen=True)
class Column:
    name: str
    levels: tuple[str, ...]


class DataTable:
    """Cleaned, fully categorical dataset: named columns with fixed level
    sets and one level index per cell."""

    def __init__(self, columns: list[Column], codes: np.ndarray):
        codes = np.asarray(codes, dtype=np.int64)
        if codes.ndim != 2 or codes.shape[1] != len(columns):
            raise ValueError("codes must be (n_rows, n_columns)")
        if codes.shape[0] < 1:
            raise ValueError("DataTable needs at least one row")
        for j, col in enumerate(columns):
            if codes[:, j].min() < 0 or codes[:, j].max() >= len(col.levels):
                raise ValueError(f"cell index out of range for column {col.name!r}")
        self.columns = tuple(columns)
        self.codes = codes
        self._index = {c.name: j for j, c in enumerate(columns)}

    @property
    def n_rows(self) -> int:
        return int(self.codes.shape[0])

    @property
    def names(self) -> tuple[str, ...]:
        return tuple(c.name for c in self.columns)

    def column(self, name: str) -> Column:
        return self.columns[self.column_index(name)]

    def column_index(self, name: str) -> int:
        try:
            return self._index[name]
        except KeyError:
            raise UnknownColumnError(name) from None

    def levels(self, name: str) -> tuple[str, ...]:
        return self.column(name).levels

    def codes_for(self, name: str) -> np.ndarray:
        return self.codes[:, self.column_index(name)]

    def decode_rows(self) -> list[list[str]]:
        """Rows as level labels (inverse of encoding)."""
        out = []
        for row in self.codes:
            out.append([self.columns[j].levels[row[j]] for j in range(len(self.columns))])
        return out

    @staticmethod
    def from_label_rows(columns: list[Column], rows: list[list[str]]) -> "DataTable":
        lookup = [{lvl: i for i, lvl in enumerate(c.levels)} for c in columns]
        codes = np.array(
            [[lookup[j][cell] for j, cell in enumerate(row)] for row in rows],
            dtype=np.int64,
        )
        return DataTable(columns, codes)

    def to_json_dict(self) -> dict:
        return {
            "columns": [{"name": c.name, "levels": list(c.levels)} for c in self.columns],
            "rows": self.codes.tolist(),
        }

    @staticmethod
    def from_json_dict(doc: dict) -> "DataTable":
        cols = [Column(c["name"], tuple(c["levels"])) for c in doc["columns"]]
        return DataTable(cols, np.array(doc["rows"], dtype=np.int64))

    def save(self, path: str | Path) -> None:
        Path(path).write_text(json.dumps(self.to_json_dict(), indent=2) + "\n")

    @staticmethod
    def load(path: str | Path) -> "DataTable":
        return DataTable.from_json_dict(json.loads(Path(path).read_text()))


def load_csv(path: str | Path, schema: list[ColumnSpec] | list[tuple[str, str]]) -> RawTable:
    """Read a comma-delimited UTF-8 CSV with a header row.

    The header must match the schema names exactly and in order; numeric
    cells that fail to parse raise CellParseError rather than becoming
    silent nulls.
    """
    specs = [c if isinstance(c, ColumnSpec) else ColumnSpec(*c) for c in schema]
    p = Path(path)
    if not p.exists():
        raise MissingFileError(str(p))
    with p.open(newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise HeaderMismatchError([c.name for c in specs], []) from None
        if header != [c.name for c in specs]:
            raise HeaderMismatchError([c.name for c in specs], header)
        rows: list[list[object]] = []
        for lineno, raw in enumerate(reader, start=1):
            if not raw:
                continue
            if len(raw) != len(specs):
                raise CellParseError(lineno, "<row>", ",".join(raw))
            row: list[object] = []
            for spec, cell in zip(specs, raw):
                if spec.kind == NUMERIC:
                    try:
                        row.append(float(cell))
                    except ValueError:
                        raise CellParseError(lineno, spec.name, cell) from None
                else:
                    row.append(cell)
            rows.append(row)
    return RawTable(columns=specs, rows=rows)


def infer_schema(path: str | Path) -> list[ColumnSpec]:
    """Sniff a schema: a column is numeric iff every cell parses as float."""
    p = Path(path)
    if not p.exists():
        raise MissingFileError(str(p))
    with p.open(newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        header = next(reader)
        numeric = [True] * len(header)
        for raw in reader:
            for j, cell in enumerate(raw):
                if numeric[j]:
                    try:
                        float(cell)
                    except ValueError:
                        numeric[j] = False
    return [ColumnSpec(n, NUMERIC if num else CATEGORICAL) for n, num in zip(header, numeric)]


def with_normalized_names(raw: RawTable) -> RawTable:
    """Replace spaces with underscores in column names (e.g. 'Stress Level'
    -> 'Stress_Level') so they match structure-file node names."""
    cols = [ColumnSpec(c.name.strip().replace(" ", "_"), c.kind) for c in raw.columns]
    return RawTable(columns=cols, rows=raw.rows)


def _quartiles(values: np.ndarray) -> tuple[float, float]:
    # linear interpolation between order statistics (numpy's default rule)
    q1, q3 = np.percentile(values, [25.0, 75.0])
    return float(q1), float(q3)


def clean(raw: RawTable, outlier_policy: str = "none", iqr_multiplier: float = 1.5) -> RawTable:
    """Remove exact-duplicate rows (first occurrence kept), then drop
    numeric outlier rows under the 'iqr' policy.

    A row is an outlier if any numeric cell falls outside
    [Q1 - m*IQR, Q3 + m*IQR] for its column. Fences are recomputed and the
    sweep repeated until no row is dropped, which makes clean idempotent.
    """
    if outlier_policy not in ("none", "iqr"):
        raise ValueError(f"unknown outlier policy {outlier_policy!r}")

    seen = set()
    rows = []
    for r in raw.rows:
        key = tuple(r)
        if key not in seen:
            seen.add(key)
            rows.append(r)

    if outlier_policy == "iqr":
        numeric_idx = [i for i, c in enumerate(raw.columns) if c.kind == NUMERIC]
        changed = True
        while changed and rows:
            changed = False
            fences = {}
            for i in numeric_idx:
                col = np.array([r[i] for r in rows], dtype=float)
                q1, q3 = _quartiles(col)
                iqr = q3 - q1
                fences[i] = (q1 - iqr_multiplier * iqr, q3 + iqr_multiplier * iqr)
            kept = [
                r for r in rows
                if all(fences[i][0] <= r[i] <= fences[i][1] for i in numeric_idx)
            ]
            if len(kept) < len(rows):
                rows = kept
                changed = True

    if not rows:
        raise EmptyAfterCleanError("no rows remain after cleaning")
    return RawTable(columns=list(raw.columns), rows=rows)


def _numeric_level_label(value: float) -> str:
    # 7.0 -> "7", 6.5 -> "6.5"
    return str(int(value)) if float(value).is_integer() else repr(float(value))


def discretize(raw: RawTable, specs: list[BinSpec]) -> DataTable:
    """Map every cell to a level index.

    Numeric columns with a BinSpec use its labels; numeric columns without
    one keep their observed values as levels (ascending); categorical
    columns pass through with observed levels sorted lexicographically.
    """
    by_column = {}
    names = {c.name for c in raw.columns}
    kinds = {c.name: c.kind for c in raw.columns}
    for spec in specs:
        if spec.column not in names:
            raise UnknownColumnError(spec.column)
        if kinds[spec.column] != NUMERIC:
            raise SpecForCategoricalColumnError(spec.column)
        by_column[spec.column] = spec

    columns: list[Column] = []
    code_cols: list[np.ndarray] = []
    for j, cspec in enumerate(raw.columns):
        cells = [r[j] for r in raw.rows]
        if cspec.kind == NUMERIC and cspec.name in by_column:
            bins = by_column[cspec.name]
            labels = bins.labels
            codes = np.array(
                [bisect_right(list(bins.cut_points), v) for v in cells], dtype=np.int64
            )
        elif cspec.kind == NUMERIC:
            observed = sorted(set(float(v) for v in cells))
            labels = tuple(_numeric_level_label(v) for v in observed)
            lookup = {v: i for i, v in enumerate(observed)}
            codes = np.array([lookup[float(v)] for v in cells], dtype=np.int64)
        else:
            labels = tuple(sorted(set(str(v) for v in cells)))
            lookup = {v: i for i, v in enumerate(labels)}
            codes = np.array([lookup[str(v)] for v in cells], dtype=np.int64)
        columns.append(Column(cspec.name, tuple(labels)))
        code_cols.append(codes)

    return DataTable(columns, np.stack(code_cols, axis=1))


# --- bins / preprocessing config -------------------------------------------

@dataclass
class BinsConfig:
    """Parsed --bins file: columns to drop plus per-column bin specs."""

    drop: list[str] = field(default_factory=list)
    bins: list[BinSpec] = field(default_factory=list)

    @staticmethod
    def from_json_dict(doc: dict) -> "BinsConfig":
        drop = list(doc.get("drop", []))
        bins = [
            BinSpec(col, tuple(float(c) for c in spec["cut_points"]), tuple(spec["labels"]))
            for col, spec in doc.get("bins", {}).items()
        ]
        return BinsConfig(drop=drop, bins=bins)

    @staticmethod
    def load(path: str | Path) -> "BinsConfig":
        p = Path(path)
        if not p.exists():
            raise MissingFileError(str(p))
        return BinsConfig.from_json_dict(json.loads(p.read_text()))


def preprocess(
    csv_path: str | Path,
    bins_config: BinsConfig,
    schema: list[ColumnSpec] | None = None,
    outlier_policy: str = "iqr",
    iqr_multiplier: float = 1.5,
) -> DataTable:
    """Full ingestion pipeline used by the CLI and the experiment scripts."""
    schema = schema if schema is not None else infer_schema(csv_path)
    raw = with_normalized_names(load_csv(csv_path, schema))
    raw = raw.drop_columns(bins_config.drop)
    raw = clean(raw, outlier_policy=outlier_policy, iqr_multiplier=iqr_multiplier)
    return discretize(raw, bins_config.bins)
