"""CSV ingestion: load, repair, encode, impute, standardize.

The pipeline is split so nothing fitted ever sees held-out rows: the
label column is parsed row-wise (no statistics), rows are partitioned,
then imputation fills, category maps and scaling parameters are fitted
on the training partition and merely applied everywhere else.

Column kinds: ``numeric`` (z-scored), ``binary_categorical`` (two
values, emitted as one 0/1 column), ``nominal_categorical`` (k > 2
values, one-hot into k columns), ``identifier`` (dropped) and
``target``. Kinds are inferred from the data and can be overridden per
column. Cells that fail to parse in a numeric column become missing
rather than fatal; empty-named columns and fully blank rows are
discarded with a note.
"""

from __future__ import annotations

import csv
import re
from collections import Counter
from dataclasses import dataclass, field

import numpy as np

from .data import Dataset, split_indices
from .errors import (
    ConfigError,
    DataError,
    EmptyFile,
    MissingTargetColumn,
    NonBinaryTarget,
    RaggedRow,
)

__all__ = [
    "ColumnSchema",
    "RawTable",
    "EncodingStats",
    "StandardizationParams",
    "PreparedSplit",
    "load_csv",
    "target_labels",
    "encode_and_impute",
    "standardize",
    "prepare_split",
    "KINDS",
]

KINDS = ("numeric", "binary_categorical", "nominal_categorical", "identifier", "target")

_MISSING_TOKENS = {"", "na", "n/a", "nan", "null", "none", "-"}


@dataclass(frozen=True)
class ColumnSchema:
    name: str
    kind: str
    inferred: bool = True  # False when the kind came from an override

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ConfigError(f"column {self.name!r}: unknown kind {self.kind!r}")


@dataclass(frozen=True)
class RawTable:
    """Typed, column-major table straight from a CSV file.

    Numeric-kind columns hold float-or-None cells; all other kinds hold
    string-or-None cells. Notes record repairs made while loading.
    """

    schema: tuple  # ColumnSchema per kept column, file order
    columns: dict  # name -> list of cells
    n_rows: int
    notes: tuple = field(default=())

    @property
    def target_name(self) -> str:
        for c in self.schema:
            if c.kind == "target":
                return c.name
        raise MissingTargetColumn("table has no target column")

    def take(self, idx) -> "RawTable":
        idx = np.asarray(idx)
        return RawTable(
            schema=self.schema,
            columns={n: [v[i] for i in idx] for n, v in self.columns.items()},
            n_rows=len(idx),
            notes=self.notes,
        )


def _clean_header(h: str) -> str:
    return re.sub(r"\s+", " ", h.strip())


def _normalize_cell(c: str):
    c = c.strip()
    return None if c.lower() in _MISSING_TOKENS else c


def _parse_float(s):
    try:
        v = float(s)
    except ValueError:
        return None
    return v if np.isfinite(v) else None


def _infer_kind(cells: list) -> str:
    present = [c for c in cells if c is not None]
    if not present:
        return "numeric"  # all-missing; imputation will note it
    floats = [_parse_float(c) for c in present]
    parsed = [v for v in floats if v is not None]
    if len(parsed) == len(present):
        distinct = sorted(set(parsed))
        if len(distinct) == 2:
            return "binary_categorical"
        # serial-number pattern: distinct integers, strictly increasing in
        # file order
        if (
            len(distinct) >= 3
            and len(distinct) == len(parsed)
            and all(v == int(v) for v in parsed)
            and all(a < b for a, b in zip(parsed, parsed[1:]))
        ):
            return "identifier"
        return "numeric"
    if 2 * len(parsed) >= len(present):
        return "numeric"  # mostly numbers; the stragglers become missing
    distinct = set(present)
    if len(distinct) == 2:
        return "binary_categorical"
    if len(distinct) == len(present):
        return "identifier"
    return "nominal_categorical"


def load_csv(path, target: str | None, overrides: dict | None = None) -> RawTable:
    """Read a UTF-8 CSV with a header row into a typed RawTable.

    ``target`` names the label column (after whitespace normalization);
    ``None`` loads the table without designating one, for inspection.
    ``overrides`` maps column name -> kind and wins over inference.
    """
    overrides = dict(overrides or {})
    notes: list[str] = []

    with open(path, newline="", encoding="utf-8-sig") as fh:
        reader = csv.reader(fh)
        try:
            raw_header = next(reader)
        except StopIteration:
            raise EmptyFile(f"{path}: no header row") from None
        rows = []
        for lineno, row in enumerate(reader, start=2):
            if all(not c.strip() for c in row):
                continue  # blank line
            if len(row) != len(raw_header):
                raise RaggedRow(
                    f"{path}: line {lineno} has {len(row)} cells, header has {len(raw_header)}"
                )
            rows.append(row)

    if not rows:
        raise EmptyFile(f"{path}: header but no data rows")

    header = [_clean_header(h) for h in raw_header]
    keep_idx = [i for i, h in enumerate(header) if h]
    if len(keep_idx) != len(header):
        notes.append(f"dropped {len(header) - len(keep_idx)} empty-named column(s)")
    names = [header[i] for i in keep_idx]
    dupes = [n for n, k in Counter(names).items() if k > 1]
    if dupes:
        raise DataError(f"{path}: duplicate column names after cleanup: {dupes}")

    target_clean = None if target is None else _clean_header(target)
    if target is not None and target_clean not in names:
        raise MissingTargetColumn(
            f"{path}: no column named {target_clean!r}; columns: {names[:8]}..."
        )

    unknown = set(overrides) - set(names)
    if unknown:
        raise ConfigError(f"schema overrides name unknown columns: {sorted(unknown)}")

    columns: dict[str, list] = {
        n: [_normalize_cell(r[i]) for r in rows] for n, i in zip(names, keep_idx)
    }

    schema = []
    for n in names:
        if n == target_clean:
            kind, inferred = "target", False
        elif n in overrides:
            kind, inferred = overrides[n], False
            if kind not in KINDS:
                raise ConfigError(f"override for {n!r}: unknown kind {kind!r}")
            if kind == "target":
                raise ConfigError(f"override for {n!r}: the target is fixed by name")
        else:
            kind, inferred = _infer_kind(columns[n]), True
        schema.append(ColumnSchema(name=n, kind=kind, inferred=inferred))

    # type numeric columns: unparseable or non-finite cells become missing
    for col in schema:
        if col.kind != "numeric":
            continue
        cells = columns[col.name]
        bad = 0
        typed = []
        for c in cells:
            if c is None:
                typed.append(None)
                continue
            v = _parse_float(c)
            if v is None:
                bad += 1
            typed.append(v)
        if bad:
            notes.append(f"column {col.name!r}: {bad} unparseable numeric cell(s) -> missing")
        columns[col.name] = typed

    notes.insert(0, f"{len(rows)} rows, {len(names)} named columns")
    return RawTable(schema=tuple(schema), columns=columns, n_rows=len(rows), notes=tuple(notes))


def _sort_key_factory(values):
    """Numeric-aware ordering: numbers sort by value when all parse."""
    if all(_parse_float(v) is not None for v in values):
        return lambda v: (_parse_float(v), v)
    return lambda v: v


def _mode(cells, sort_key):
    counts = Counter(c for c in cells if c is not None)
    return min(counts.items(), key=lambda kv: (-kv[1], sort_key(kv[0])))[0]


def _target_mapping(values) -> dict:
    present = [v for v in values if v is not None]
    if len(present) != len(values):
        raise NonBinaryTarget(
            f"target column has {len(values) - len(present)} missing label(s)"
        )
    distinct = sorted(set(present), key=_sort_key_factory(set(present)))
    if len(distinct) != 2:
        raise NonBinaryTarget(
            f"target must have exactly 2 distinct values, got {len(distinct)}: {distinct[:6]}"
        )
    return {distinct[0]: 0, distinct[1]: 1}


def target_labels(table: RawTable) -> np.ndarray:
    """Row-wise 0/1 labels from the target column (no fitted statistics)."""
    values = table.columns[table.target_name]
    mapping = _target_mapping(values)
    return np.array([mapping[v] for v in values], dtype=np.int8)


@dataclass(frozen=True)
class EncodingStats:
    """Everything fitted during encoding, reusable on unseen rows."""

    per_column: dict  # name -> {"kind", "fill", "mapping"/"categories"}
    target_mapping: dict
    feature_names: tuple
    feature_roles: tuple  # "numeric" | "binary" | "onehot" per feature

    def to_doc(self) -> dict:
        return {
            "per_column": self.per_column,
            "target_mapping": {str(k): v for k, v in self.target_mapping.items()},
            "feature_names": list(self.feature_names),
            "feature_roles": list(self.feature_roles),
        }


def encode_and_impute(table: RawTable, stats: EncodingStats | None = None):
    """Emit a Dataset; fit imputation/encoding statistics or apply given ones.

    With ``stats=None`` fills, category lists and value maps are fitted
    from this table and returned; passing fitted stats applies them
    unchanged (the leak-freedom contract).
    """
    fitting = stats is None
    per_column: dict = {} if fitting else stats.per_column
    notes: list[str] = []

    tname = table.target_name
    if fitting:
        target_map = _target_mapping(table.columns[tname])
    else:
        target_map = stats.target_mapping
    try:
        y = np.array([target_map[v] for v in table.columns[tname]], dtype=np.int8)
    except KeyError as exc:
        raise NonBinaryTarget(f"unseen target value {exc.args[0]!r}") from None

    out_cols: list[np.ndarray] = []
    names: list[str] = []
    roles: list[str] = []
    for col in table.schema:
        kind = col.kind
        if kind in ("identifier", "target"):
            continue
        cells = table.columns[col.name]

        if kind == "numeric":
            observed = [c for c in cells if c is not None]
            if fitting:
                fill = float(np.median(observed)) if observed else 0.0
                if not observed:
                    notes.append(f"column {col.name!r}: no observed values, fill 0")
                per_column[col.name] = {"kind": kind, "fill": fill}
            else:
                fill = per_column[col.name]["fill"]
            out_cols.append(np.array([fill if c is None else c for c in cells]))
            names.append(col.name)
            roles.append("numeric")

        elif kind == "binary_categorical":
            if fitting:
                present = sorted({c for c in cells if c is not None},
                                 key=_sort_key_factory({c for c in cells if c is not None}))
                if not present:
                    raise DataError(f"column {col.name!r}: binary but fully missing")
                if len(present) > 2:
                    raise DataError(
                        f"column {col.name!r} marked binary but has {len(present)} values"
                    )
                mapping = {v: i for i, v in enumerate(present)}
                fill = _mode(cells, _sort_key_factory(set(mapping)))
                per_column[col.name] = {"kind": kind, "mapping": mapping, "fill": fill}
            else:
                mapping = per_column[col.name]["mapping"]
                fill = per_column[col.name]["fill"]
            # unseen values behave like missing: imputed with the mode
            vals = [mapping.get(c if c in mapping else fill, 0) for c in cells]
            out_cols.append(np.array(vals, dtype=np.float64))
            names.append(col.name)
            roles.append("binary")

        elif kind == "nominal_categorical":
            if fitting:
                cats = sorted({c for c in cells if c is not None},
                              key=_sort_key_factory({c for c in cells if c is not None}))
                if not cats:
                    raise DataError(f"column {col.name!r}: nominal but fully missing")
                fill = _mode(cells, _sort_key_factory(set(cats)))
                per_column[col.name] = {"kind": kind, "categories": cats, "fill": fill}
            else:
                cats = per_column[col.name]["categories"]
                fill = per_column[col.name]["fill"]
            filled = [fill if c is None else c for c in cells]
            unseen = sum(1 for c in filled if c not in set(cats))
            if unseen:
                notes.append(
                    f"column {col.name!r}: {unseen} value(s) outside the fitted "
                    "categories encode as all-zero"
                )
            for cat in cats:
                out_cols.append(np.array([1.0 if c == cat else 0.0 for c in filled]))
                names.append(f"{col.name}={cat}")
                roles.append("onehot")

        else:  # pragma: no cover - schema constructor blocks unknown kinds
            raise DataError(f"column {col.name!r}: unhandled kind {kind!r}")

    X = np.column_stack(out_cols) if out_cols else np.empty((table.n_rows, 0))
    built = EncodingStats(
        per_column=per_column,
        target_mapping=target_map,
        feature_names=tuple(names),
        feature_roles=tuple(roles),
    )
    return Dataset(X, y, tuple(names), notes=tuple(notes)), built


@dataclass(frozen=True)
class StandardizationParams:
    """Train-fitted z-scoring: which columns survived, their means/stds."""

    input_names: tuple
    kept_names: tuple
    dropped_names: tuple
    scaled_mask: tuple  # per kept column
    means: tuple  # per kept column; 0.0 where not scaled
    stds: tuple  # per kept column; 1.0 where not scaled

    def apply(self, ds: Dataset) -> Dataset:
        if tuple(ds.feature_names) != self.input_names:
            raise DataError("dataset columns do not match the fitted parameters")
        keep = [i for i, n in enumerate(ds.feature_names) if n in set(self.kept_names)]
        X = ds.X[:, keep].copy()
        for j in range(X.shape[1]):
            if self.scaled_mask[j]:
                X[:, j] = (X[:, j] - self.means[j]) / self.stds[j]
        return Dataset(X, ds.y, self.kept_names, notes=ds.notes)

    def to_doc(self) -> dict:
        return {
            "kept": list(self.kept_names),
            "dropped": list(self.dropped_names),
            "scaled": list(self.scaled_mask),
            "means": list(self.means),
            "stds": list(self.stds),
        }


def standardize(train: Dataset, others: list, scale_columns=None):
    """Fit per-column z-scoring on train; transform train and others.

    ``scale_columns`` selects which columns get (x - mean) / std (default
    all). Columns constant on train are dropped from every dataset.
    Returns ``([train'] + others', params)``.
    """
    if train.n_rows == 0:
        raise DataError("cannot standardize an empty training set")
    d = train.n_cols
    if scale_columns is None:
        scale_columns = [True] * d
    scale_columns = list(scale_columns)
    if len(scale_columns) != d:
        raise DataError(f"scale mask has {len(scale_columns)} entries for {d} columns")

    means = train.X.mean(axis=0)
    stds = train.X.std(axis=0)  # population: divide by n
    constant = stds == 0.0
    kept_idx = [j for j in range(d) if not constant[j]]
    dropped = tuple(train.feature_names[j] for j in range(d) if constant[j])

    kept_names = tuple(train.feature_names[j] for j in kept_idx)
    params = StandardizationParams(
        input_names=tuple(train.feature_names),
        kept_names=kept_names,
        dropped_names=dropped,
        scaled_mask=tuple(bool(scale_columns[j]) for j in kept_idx),
        means=tuple(float(means[j]) if scale_columns[j] else 0.0 for j in kept_idx),
        stds=tuple(float(stds[j]) if scale_columns[j] else 1.0 for j in kept_idx),
    )
    return [params.apply(ds) for ds in [train, *others]], params


@dataclass(frozen=True)
class PreparedSplit:
    """A fully preprocessed, leak-free train/test pair."""

    train: Dataset
    test: Dataset
    train_idx: np.ndarray
    test_idx: np.ndarray
    encoding: EncodingStats
    scaling: StandardizationParams


def prepare_split(
    table: RawTable,
    test_fraction: float,
    seed: int,
    stratified: bool = True,
) -> PreparedSplit:
    """Split raw rows, then fit all preprocessing on the training side only.

    The test side gets ``ceil(n * test_fraction)`` rows.
    """
    y = target_labels(table)
    n_test = int(np.ceil(table.n_rows * test_fraction))
    train_idx, test_idx = split_indices(y, n_test, seed, stratified)
    ds_train, stats = encode_and_impute(table.take(train_idx))
    ds_test, _ = encode_and_impute(table.take(test_idx), stats=stats)
    scale = [r == "numeric" for r in stats.feature_roles]
    (ds_train2, ds_test2), params = standardize(ds_train, [ds_test], scale)
    return PreparedSplit(
        train=ds_train2,
        test=ds_test2,
        train_idx=train_idx,
        test_idx=test_idx,
        encoding=stats,
        scaling=params,
    )
