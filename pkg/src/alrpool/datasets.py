"""Dataset loading, encoding, standardization, splitting, and synthesis.

A :class:`Dataset` is an immutable bundle of a float feature matrix, optional
labels, and per-column metadata.  Categorical columns are stored as integer
codes into a lexicographically sorted vocabulary until
:func:`one_hot_encode` expands them into indicator columns.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

NUMERIC = "numeric"
CATEGORICAL = "categorical"

_SYNTH_KINDS = ("linear", "clustered")


@dataclass(frozen=True)
class Column:
    """Metadata for one feature column."""

    name: str
    kind: str = NUMERIC
    categories: tuple[str, ...] = ()  # sorted vocabulary; empty for numeric

    def __post_init__(self):
        if self.kind not in (NUMERIC, CATEGORICAL):
            raise ValueError(f"unknown column kind {self.kind!r}")
        if self.kind == CATEGORICAL and not self.categories:
            raise ValueError(f"categorical column {self.name!r} has an empty vocabulary")


@dataclass(frozen=True)
class Dataset:
    """An immutable regression dataset: N samples by d feature columns."""

    name: str
    features: np.ndarray
    labels: np.ndarray | None
    columns: tuple[Column, ...]

    def __post_init__(self):
        X = np.ascontiguousarray(np.asarray(self.features, dtype=float))
        if X.ndim != 2 or X.shape[0] < 1 or X.shape[1] < 1:
            raise ValueError(f"features must be a non-empty 2-D matrix, got shape {X.shape}")
        if not np.isfinite(X).all():
            raise ValueError("features contain non-finite values")
        if len(self.columns) != X.shape[1]:
            raise ValueError(
                f"column metadata length {len(self.columns)} does not match d={X.shape[1]}"
            )
        X.setflags(write=False)
        object.__setattr__(self, "features", X)
        if self.labels is not None:
            y = np.ascontiguousarray(np.asarray(self.labels, dtype=float))
            if y.shape != (X.shape[0],):
                raise ValueError(f"labels shape {y.shape} does not match N={X.shape[0]}")
            if not np.isfinite(y).all():
                raise ValueError("labels contain non-finite values")
            y.setflags(write=False)
            object.__setattr__(self, "labels", y)

    @property
    def n_samples(self) -> int:
        return self.features.shape[0]

    @property
    def n_features(self) -> int:
        return self.features.shape[1]

    def subset(self, indices: np.ndarray, name: str | None = None) -> "Dataset":
        """Row subset (copies), keeping column metadata and labels."""
        idx = np.asarray(indices, dtype=int)
        return Dataset(
            name=name if name is not None else self.name,
            features=self.features[idx],
            labels=None if self.labels is None else self.labels[idx],
            columns=self.columns,
        )


@dataclass(frozen=True)
class StandardizationParams:
    """Per-column affine normalization fitted on training data."""

    means: np.ndarray
    stds: np.ndarray

    def __post_init__(self):
        m = np.asarray(self.means, dtype=float)
        s = np.asarray(self.stds, dtype=float)
        if m.ndim != 1 or m.shape != s.shape:
            raise ValueError("means and stds must be 1-D vectors of equal length")
        if np.any(s <= 0):
            raise ValueError("stds must be positive after degenerate-column handling")
        object.__setattr__(self, "means", m)
        object.__setattr__(self, "stds", s)


@dataclass(frozen=True)
class SplitSpec:
    """How to split a dataset into a training pool and a test set."""

    pool_fraction: float = 0.5
    seed: int = 0

    def __post_init__(self):
        if not (0.0 < self.pool_fraction < 1.0):
            raise ValueError(f"pool_fraction must lie in (0, 1), got {self.pool_fraction}")
        if self.seed < 0:
            raise ValueError("seed must be a non-negative integer")


def load_csv(path, label_column: str | None, categorical_columns=()) -> Dataset:
    """Load a headered CSV file into a Dataset.

    ``label_column`` is removed from the features and parsed as the label
    vector (pass None for an unlabeled pool).  Columns named in
    ``categorical_columns`` keep their raw string values, which are coded
    against a lexicographically sorted vocabulary; everything else must parse
    as a finite float.  Missing (empty) cells are rejected.
    """
    path = Path(path)
    if not path.is_file():
        raise FileNotFoundError(f"dataset file not found: {path}")
    categorical = list(categorical_columns)

    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise ValueError(f"{path}: file is empty, expected a header row") from None
        header = [h.strip() for h in header]
        if len(set(header)) != len(header):
            dupes = sorted({h for h in header if header.count(h) > 1})
            raise ValueError(f"{path}: duplicate column names {dupes}")
        if label_column is not None and label_column not in header:
            raise ValueError(f"{path}: label column {label_column!r} not in header {header}")
        for c in categorical:
            if c not in header:
                raise ValueError(f"{path}: categorical column {c!r} not in header")
        if label_column is not None and label_column in categorical:
            raise ValueError(f"{path}: label column {label_column!r} cannot be categorical")
        rows = [row for row in reader if row]

    if not rows:
        raise ValueError(f"{path}: no data rows")

    feature_names = [h for h in header if h != label_column]
    cat_set = set(categorical)

    raw = {name: [] for name in header}
    for r, row in enumerate(rows, start=1):
        if len(row) != len(header):
            raise ValueError(f"{path}: row {r} has {len(row)} cells, expected {len(header)}")
        for name, cell in zip(header, row):
            raw[name].append(cell.strip())

    def parse_numeric(name, values):
        out = np.empty(len(values))
        for r, cell in enumerate(values, start=1):
            if cell == "":
                raise ValueError(f"{path}: row {r}, column {name!r}: missing value")
            try:
                v = float(cell)
            except ValueError:
                raise ValueError(
                    f"{path}: row {r}, column {name!r}: cannot parse {cell!r} as a number"
                ) from None
            if not math.isfinite(v):
                raise ValueError(f"{path}: row {r}, column {name!r}: non-finite value {cell!r}")
            out[r - 1] = v
        return out

    columns = []
    feature_cols = []
    for name in feature_names:
        values = raw[name]
        if name in cat_set:
            for r, cell in enumerate(values, start=1):
                if cell == "":
                    raise ValueError(f"{path}: row {r}, column {name!r}: missing value")
            vocab = tuple(sorted(set(values)))
            code = {c: i for i, c in enumerate(vocab)}
            feature_cols.append(np.array([code[c] for c in values], dtype=float))
            columns.append(Column(name=name, kind=CATEGORICAL, categories=vocab))
        else:
            feature_cols.append(parse_numeric(name, values))
            columns.append(Column(name=name))

    labels = None if label_column is None else parse_numeric(label_column, raw[label_column])
    features = np.column_stack(feature_cols)
    return Dataset(name=path.stem, features=features, labels=labels, columns=tuple(columns))


def one_hot_encode(d: Dataset) -> Dataset:
    """Expand every categorical column into one indicator column per category.

    A purely numeric dataset is returned unchanged.
    """
    if all(c.kind == NUMERIC for c in d.columns):
        return d

    blocks = []
    columns = []
    for j, col in enumerate(d.columns):
        x = d.features[:, j]
        if col.kind == NUMERIC:
            blocks.append(x[:, None])
            columns.append(col)
            continue
        v = len(col.categories)
        codes = x.astype(int)
        if np.any(x != codes) or codes.min() < 0 or codes.max() >= v:
            bad = int(np.argmax((x != codes) | (x < 0) | (x >= v)))
            raise ValueError(
                f"column {col.name!r}: row {bad + 1} holds value {x[bad]!r} "
                f"absent from the vocabulary of {v} categories"
            )
        block = np.zeros((d.n_samples, v))
        block[np.arange(d.n_samples), codes] = 1.0
        blocks.append(block)
        columns.extend(Column(name=f"{col.name}={cat}") for cat in col.categories)

    return Dataset(
        name=d.name,
        features=np.hstack(blocks),
        labels=d.labels,
        columns=tuple(columns),
    )


def standardize_fit(features: np.ndarray) -> StandardizationParams:
    """Per-column mean and population standard deviation.

    Constant columns get std 1 (and the exact constant as the mean), so
    applying the params maps them to all-zeros instead of dividing by zero.
    """
    X = np.asarray(features, dtype=float)
    if X.ndim != 2 or X.shape[0] < 1:
        raise ValueError(f"expected a non-empty 2-D matrix, got shape {X.shape}")
    if not np.isfinite(X).all():
        raise ValueError("features contain non-finite values")
    means = X.mean(axis=0)
    stds = X.std(axis=0)  # population convention (divide by N)
    constant = X.max(axis=0) == X.min(axis=0)
    means = np.where(constant, X[0], means)
    stds = np.where(constant, 1.0, stds)
    return StandardizationParams(means=means, stds=stds)


def standardize_apply(params: StandardizationParams, features: np.ndarray) -> np.ndarray:
    """Apply a fitted normalization: ``(x - mean) / std`` per column."""
    X = np.asarray(features, dtype=float)
    if X.ndim != 2 or X.shape[1] != params.means.shape[0]:
        raise ValueError(
            f"feature matrix with {X.shape[1] if X.ndim == 2 else '?'} columns does not "
            f"match params fitted on {params.means.shape[0]} columns"
        )
    return (X - params.means) / params.stds


def split_indices(n: int, spec: SplitSpec) -> tuple[np.ndarray, np.ndarray]:
    """Seeded shuffle of ``range(n)``; the first ``ceil(fraction * n)`` go to the pool."""
    if n < 2:
        raise ValueError(f"need at least 2 samples to split, got {n}")
    n_pool = math.ceil(spec.pool_fraction * n)
    if n_pool >= n:
        raise ValueError(
            f"pool_fraction={spec.pool_fraction} leaves an empty test set for N={n}"
        )
    perm = np.random.default_rng(spec.seed).permutation(n)
    return perm[:n_pool], perm[n_pool:]


def split_pool_test(d: Dataset, spec: SplitSpec) -> tuple[Dataset, Dataset]:
    """Split into (pool, test) and standardize both with pool-fitted params.

    Standardization is fitted on the pool features only, mirroring the fact
    that test samples are unknown at selection time.  Labels pass through
    untouched.
    """
    pool_idx, test_idx = split_indices(d.n_samples, spec)
    params = standardize_fit(d.features[pool_idx])

    def build(idx):
        return Dataset(
            name=d.name,
            features=standardize_apply(params, d.features[idx]),
            labels=None if d.labels is None else d.labels[idx],
            columns=d.columns,
        )

    return build(pool_idx), build(test_idx)


def synth_generate(kind: str, n: int, d: int, noise: float, seed: int, centers: int = 3) -> Dataset:
    """Deterministic synthetic regression data.

    ``linear``    y = w.x + noise * N(0,1) over a standard normal cloud.
    ``clustered`` ``centers`` Gaussian blobs spaced along the first axis,
                  each with its own linear label map; rows are assigned to
                  blobs round-robin so no blob is empty.
    """
    if kind not in _SYNTH_KINDS:
        raise ValueError(f"unknown generator {kind!r}, expected one of {_SYNTH_KINDS}")
    if n < 2 or d < 1:
        raise ValueError(f"need n >= 2 and d >= 1, got n={n}, d={d}")
    if noise < 0:
        raise ValueError(f"noise must be non-negative, got {noise}")
    rng = np.random.default_rng(seed)

    if kind == "linear":
        X = rng.standard_normal((n, d))
        w = rng.standard_normal(d)
        y = X @ w + noise * rng.standard_normal(n)
    else:
        base = np.zeros((centers, d))
        base[:, 0] = 12.0 * np.arange(centers)  # blob spacing >> unit blob std
        base += rng.uniform(-1.0, 1.0, size=(centers, d))
        blob = np.arange(n) % centers
        X = base[blob] + rng.standard_normal((n, d))
        W = rng.standard_normal((centers, d))
        b = rng.uniform(-5.0, 5.0, size=centers)
        y = np.einsum("ij,ij->i", X - base[blob], W[blob]) + b[blob]
        y = y + noise * rng.standard_normal(n)

    columns = tuple(Column(name=f"x{j}") for j in range(d))
    return Dataset(name=f"synth-{kind}-n{n}d{d}s{seed}", features=X, labels=y, columns=columns)
