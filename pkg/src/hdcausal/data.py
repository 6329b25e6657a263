"""Tabular dataset handling: CSV ingestion, standardization, redundancy removal.

A :class:`Dataset` bundles the covariate matrix ``X`` (n rows, p columns),
the binary treatment indicator ``A``, the outcome ``Y`` and the feature
names. All arrays are frozen after construction so a dataset can be shared
freely across worker processes and threads.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field, replace

import numpy as np

from .errors import DataError

OUTCOME_KINDS = ("continuous", "binary")


@dataclass(frozen=True)
class Dataset:
    """Immutable (X, A, Y) triple with feature names.

    ``X`` is float64 with shape (n, p); ``A`` holds 0/1 integers; ``Y`` is
    float64. ``outcome_kind`` is ``"binary"`` when every outcome value is
    0 or 1, ``"continuous"`` otherwise.
    """

    X: np.ndarray
    A: np.ndarray
    Y: np.ndarray
    feature_names: tuple[str, ...]
    outcome_kind: str = "continuous"

    def __post_init__(self):
        X = np.ascontiguousarray(np.asarray(self.X, dtype=np.float64))
        A = np.asarray(self.A, dtype=np.int64)
        Y = np.asarray(self.Y, dtype=np.float64)
        if X.ndim != 2:
            raise DataError("X must be a 2-d matrix")
        n, p = X.shape
        if A.shape != (n,) or Y.shape != (n,):
            raise DataError("A and Y must be vectors of length n")
        if not np.isfinite(X).all():
            raise DataError("X contains non-finite values")
        if not np.isfinite(Y).all():
            raise DataError("Y contains non-finite values")
        if not np.isin(A, (0, 1)).all():
            raise DataError("treatment must be coded 0/1")
        if A.min() == A.max():
            raise DataError("treatment has a single level")
        names = tuple(self.feature_names)
        if len(names) != p:
            raise DataError(f"expected {p} feature names, got {len(names)}")
        if len(set(names)) != p:
            raise DataError("feature names must be unique")
        if self.outcome_kind not in OUTCOME_KINDS:
            raise DataError(f"unknown outcome_kind {self.outcome_kind!r}")
        for arr in (X, A, Y):
            arr.setflags(write=False)
        object.__setattr__(self, "X", X)
        object.__setattr__(self, "A", A)
        object.__setattr__(self, "Y", Y)
        object.__setattr__(self, "feature_names", names)

    @property
    def n(self) -> int:
        return self.X.shape[0]

    @property
    def p(self) -> int:
        return self.X.shape[1]

    @property
    def n_treated(self) -> int:
        return int(self.A.sum())

    @property
    def n_control(self) -> int:
        return self.n - self.n_treated

    def select_features(self, indices) -> "Dataset":
        """Dataset restricted to the given feature columns (order preserved)."""
        idx = np.asarray(indices, dtype=np.intp)
        names = tuple(self.feature_names[i] for i in idx)
        return replace(self, X=self.X[:, idx], feature_names=names)

    def take_rows(self, rows) -> "Dataset":
        """Dataset restricted to the given rows (with repetition allowed)."""
        rows = np.asarray(rows, dtype=np.intp)
        return replace(self, X=self.X[rows], A=self.A[rows], Y=self.Y[rows])


@dataclass(frozen=True)
class FeatureMeta:
    """Audit record for one feature column."""

    index: int
    name: str
    kept: bool = True
    removal_reason: str = "none"  # none | constant | redundant_correlation

    def __post_init__(self):
        if self.kept and self.removal_reason != "none":
            raise ValueError("kept feature cannot carry a removal reason")


@dataclass(frozen=True)
class ColumnRoles:
    """Which CSV columns play which role.

    ``features=None`` means every column other than treatment/outcome.
    """

    treatment: str
    outcome: str
    features: tuple[str, ...] | None = None
    outcome_kind: str | None = None  # override the binary/continuous inference


def _parse_cell(raw: str, row: int, column: str) -> float:
    text = raw.strip()
    if text == "":
        raise DataError(f"missing value at data row {row}, column {column!r}")
    try:
        value = float(text)
    except ValueError:
        raise DataError(
            f"non-numeric cell {text!r} at data row {row}, column {column!r}"
        ) from None
    if math.isnan(value):
        raise DataError(f"missing value at data row {row}, column {column!r}")
    if math.isinf(value):
        raise DataError(f"non-finite value at data row {row}, column {column!r}")
    return value


def load_csv(path, roles: ColumnRoles) -> Dataset:
    """Read a comma-separated file with a header row into a Dataset.

    Cells must be plain numbers ('.' decimal separator); any empty, NaN or
    non-numeric cell is an error that names the offending row and column.
    The treatment column must contain only 0/1 with both groups present.
    """
    try:
        fh = open(path, "r", encoding="utf-8-sig", newline="")
    except OSError as exc:
        raise DataError(f"cannot open {path}: {exc.strerror}") from None
    with fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise DataError(f"{path} is empty") from None
        header = [h.strip() for h in header]
        rows = [row for row in reader if row]

    if not rows:
        raise DataError(f"{path} has a header but no data rows")

    for col in (roles.treatment, roles.outcome):
        if col not in header:
            raise DataError(f"column {col!r} not found in {path}")
    if roles.features is None:
        feature_cols = [c for c in header if c not in (roles.treatment, roles.outcome)]
    else:
        feature_cols = list(roles.features)
        for col in feature_cols:
            if col not in header:
                raise DataError(f"feature column {col!r} not found in {path}")
    if not feature_cols:
        raise DataError("no feature columns")

    col_index = {name: i for i, name in enumerate(header)}
    n, p = len(rows), len(feature_cols)
    X = np.empty((n, p))
    A = np.empty(n, dtype=np.int64)
    Y = np.empty(n)
    for r, row in enumerate(rows, start=1):
        if len(row) != len(header):
            raise DataError(f"data row {r} has {len(row)} cells, expected {len(header)}")
        a = _parse_cell(row[col_index[roles.treatment]], r, roles.treatment)
        if a not in (0.0, 1.0):
            raise DataError(
                f"treatment value {a!r} outside {{0,1}} at data row {r}"
            )
        A[r - 1] = int(a)
        Y[r - 1] = _parse_cell(row[col_index[roles.outcome]], r, roles.outcome)
        for j, col in enumerate(feature_cols):
            X[r - 1, j] = _parse_cell(row[col_index[col]], r, col)

    if roles.outcome_kind is not None:
        kind = roles.outcome_kind
    else:
        kind = "binary" if np.isin(Y, (0.0, 1.0)).all() else "continuous"
    return Dataset(X=X, A=A, Y=Y, feature_names=tuple(feature_cols), outcome_kind=kind)


def write_csv(d: Dataset, path, treatment: str = "A", outcome: str = "Y") -> None:
    """Write a Dataset back to CSV (treatment and outcome first, then features)."""
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow([treatment, outcome, *d.feature_names])
        for i in range(d.n):
            writer.writerow(
                [int(d.A[i]), repr(float(d.Y[i])), *(repr(float(v)) for v in d.X[i])]
            )


def standardize(d: Dataset) -> Dataset:
    """Rescale every feature column to sample mean 0 and sample sd 1 (ddof=1).

    A and Y pass through unchanged. Constant columns cannot be standardized;
    drop them first (see :func:`drop_constant_features`).
    """
    mean = d.X.mean(axis=0)
    sd = d.X.std(axis=0, ddof=1)
    bad = np.flatnonzero(sd == 0.0)
    if bad.size:
        raise DataError(f"constant column {d.feature_names[bad[0]]}")
    return replace(d, X=(d.X - mean) / sd)


def drop_constant_features(d: Dataset) -> tuple[Dataset, list[FeatureMeta]]:
    """Remove zero-variance columns, returning the audit trail."""
    sd = d.X.std(axis=0, ddof=1)
    meta = [
        FeatureMeta(index=j, name=name, kept=bool(sd[j] > 0.0),
                    removal_reason="none" if sd[j] > 0.0 else "constant")
        for j, name in enumerate(d.feature_names)
    ]
    keep = np.flatnonzero(sd > 0.0)
    if keep.size == d.p:
        return d, meta
    if keep.size == 0:
        raise DataError("all feature columns are constant")
    return d.select_features(keep), meta


def correlation_filter(
    d: Dataset, cutoff: float
) -> tuple[Dataset, list[FeatureMeta]]:
    """Greedily drop features until no pair has |Pearson corr| above ``cutoff``.

    At each step the worst-offending pair is located; the member whose
    mean absolute correlation with the remaining features is larger gets
    removed (ties remove the higher column index). Deterministic for a
    given input.
    """
    if not 0.0 < cutoff <= 1.0:
        raise DataError(f"cutoff must be in (0, 1], got {cutoff}")
    p = d.p
    corr = np.abs(np.corrcoef(d.X, rowvar=False))
    if p == 1:
        corr = corr.reshape(1, 1)
    np.fill_diagonal(corr, 0.0)

    alive = np.ones(p, dtype=bool)
    removed: set[int] = set()
    while True:
        sub = corr[np.ix_(alive, alive)]
        if sub.size == 0 or sub.max() <= cutoff:
            break
        alive_idx = np.flatnonzero(alive)
        flat = int(np.argmax(sub))
        i, j = divmod(flat, sub.shape[1])
        a, b = int(alive_idx[i]), int(alive_idx[j])
        if alive.sum() > 1:
            denom = alive.sum() - 1
            mean_a = corr[a, alive].sum() / denom
            mean_b = corr[b, alive].sum() / denom
        else:  # pragma: no cover - loop exits before a single survivor
            mean_a = mean_b = 0.0
        if mean_a > mean_b:
            drop = a
        elif mean_b > mean_a:
            drop = b
        else:
            drop = max(a, b)
        alive[drop] = False
        removed.add(drop)

    meta = [
        FeatureMeta(
            index=j,
            name=name,
            kept=j not in removed,
            removal_reason="redundant_correlation" if j in removed else "none",
        )
        for j, name in enumerate(d.feature_names)
    ]
    keep = np.flatnonzero(alive)
    return d.select_features(keep), meta
