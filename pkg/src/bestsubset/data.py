"""Dataset container, CSV I/O, and the sqrt(n)-norm standardization contract.

Every solver in this package assumes a design matrix whose columns have been
centered and rescaled to Euclidean norm sqrt(n).  For the linear family the
response is mean-centered as well, which removes the intercept from the
optimization; logistic models keep an explicit unpenalized intercept and Cox
models have none.
"""

import csv
import math
from dataclasses import dataclass

import numpy as np

FAMILIES = ("gaussian", "binomial", "cox")


def _frozen_array(values, dtype=float):
    arr = np.array(values, dtype=dtype)
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True, eq=False)
class Continuous:
    """Real-valued response vector."""

    y: np.ndarray

    def __post_init__(self):
        y = _frozen_array(self.y)
        if y.ndim != 1:
            raise ValueError("continuous response must be a 1-D vector")
        if not np.all(np.isfinite(y)):
            raise ValueError("continuous response contains non-finite values")
        object.__setattr__(self, "y", y)

    def __len__(self):
        return self.y.shape[0]


@dataclass(frozen=True, eq=False)
class Binary:
    """0/1 response vector."""

    y: np.ndarray

    def __post_init__(self):
        y = _frozen_array(self.y)
        if y.ndim != 1:
            raise ValueError("binary response must be a 1-D vector")
        if not np.all(np.isin(y, (0.0, 1.0))):
            raise ValueError("binary response out of range: values must be 0 or 1")
        object.__setattr__(self, "y", y)

    def __len__(self):
        return self.y.shape[0]


@dataclass(frozen=True, eq=False)
class Survival:
    """Right-censored survival response: observed time plus event indicator.

    ``status`` is 1 where the event was observed and 0 where the observation
    was censored.  Times must be strictly positive and at least one event is
    required, otherwise the partial likelihood is vacuous.
    """

    time: np.ndarray
    status: np.ndarray

    def __post_init__(self):
        time = _frozen_array(self.time)
        status = _frozen_array(self.status)
        if time.ndim != 1 or status.ndim != 1 or time.shape != status.shape:
            raise ValueError("time and status must be 1-D vectors of equal length")
        if not np.all(np.isfinite(time)) or np.any(time <= 0):
            raise ValueError("survival times must be positive and finite")
        if not np.all(np.isin(status, (0.0, 1.0))):
            raise ValueError("status must be 0 (censored) or 1 (event)")
        if not np.any(status == 1.0):
            raise ValueError("no events: all observations are censored")
        object.__setattr__(self, "time", time)
        object.__setattr__(self, "status", status)

    def __len__(self):
        return self.time.shape[0]


def response_kind(response) -> str:
    if isinstance(response, Continuous):
        return "continuous"
    if isinstance(response, Binary):
        return "binary"
    if isinstance(response, Survival):
        return "survival"
    raise TypeError(f"unknown response type {type(response).__name__}")


_FAMILY_KIND = {"gaussian": "continuous", "binomial": "binary", "cox": "survival"}


@dataclass(frozen=True, eq=False)
class Dataset:
    """A dense design matrix with a typed response.

    Rows are observations, columns are predictors.  Instances are immutable
    after construction (arrays are marked read-only) and safe to share
    across threads.
    """

    X: np.ndarray
    response: Continuous | Binary | Survival
    column_names: tuple[str, ...] | None = None

    def __post_init__(self):
        X = _frozen_array(self.X)
        if X.ndim != 2:
            raise ValueError("X must be a 2-D matrix")
        n, p = X.shape
        if n < 2:
            raise ValueError("need at least 2 observations")
        if p < 1:
            raise ValueError("need at least 1 predictor")
        if not np.all(np.isfinite(X)):
            raise ValueError("X contains non-finite entries")
        if len(self.response) != n:
            raise ValueError(
                f"response length {len(self.response)} does not match n={n}"
            )
        if self.column_names is not None:
            names = tuple(str(c) for c in self.column_names)
            if len(names) != p:
                raise ValueError("column_names length does not match p")
            object.__setattr__(self, "column_names", names)
        object.__setattr__(self, "X", X)

    @property
    def n(self) -> int:
        return self.X.shape[0]

    @property
    def p(self) -> int:
        return self.X.shape[1]

    def names(self) -> tuple[str, ...]:
        """Column names, defaulting to X1..Xp (1-based) when absent."""
        if self.column_names is not None:
            return self.column_names
        return tuple(f"X{j + 1}" for j in range(self.p))


@dataclass(frozen=True, eq=False)
class StandardizedDataset:
    """A dataset whose columns have sqrt(n) norm, plus the affine map back.

    ``column_centers`` and ``column_scales`` reconstruct the original design
    (X_orig = X_std * scales + centers); ``response_center`` is the response
    mean removed for the gaussian family and 0 otherwise.
    """

    dataset: Dataset
    column_centers: np.ndarray
    column_scales: np.ndarray
    response_center: float

    def __post_init__(self):
        object.__setattr__(self, "column_centers", _frozen_array(self.column_centers))
        object.__setattr__(self, "column_scales", _frozen_array(self.column_scales))


def standardize(d: Dataset) -> StandardizedDataset:
    """Center each column and rescale it to Euclidean norm sqrt(n).

    For a continuous response the mean is removed as well, so the fitted
    model needs no intercept.  Constant columns are rejected (silently
    dropping them would desynchronize reported indices from the user's
    data).
    """
    X = d.X
    n = d.n
    centers = X.mean(axis=0)
    Xc = X - centers
    norms = np.sqrt((Xc**2).sum(axis=0))
    if np.any(norms == 0.0):
        j = int(np.flatnonzero(norms == 0.0)[0])
        raise ValueError(
            f"constant column {d.names()[j]!r} (index {j}): zero variance"
        )
    scales = norms / math.sqrt(n)
    Xs = Xc / scales

    response = d.response
    response_center = 0.0
    if isinstance(response, Continuous):
        response_center = float(response.y.mean())
        response = Continuous(response.y - response_center)

    transformed = Dataset(Xs, response, d.column_names)
    return StandardizedDataset(transformed, centers, scales, response_center)


def destandardize_coefficients(
    beta_std: np.ndarray, meta: StandardizedDataset, intercept_std: float = 0.0
):
    """Map standardized-scale coefficients back to the original scale.

    Returns ``(intercept, beta_orig)`` such that the linear predictor
    ``intercept + X_orig @ beta_orig`` equals
    ``response_center + intercept_std + X_std @ beta_std`` exactly.
    """
    beta_std = np.asarray(beta_std, dtype=float)
    if beta_std.shape != (meta.dataset.p,):
        raise ValueError("beta_std length does not match p")
    beta_orig = beta_std / meta.column_scales
    intercept = (
        meta.response_center + intercept_std - float(meta.column_centers @ beta_orig)
    )
    return intercept, beta_orig


def _parse_cell(cell: str, row: int, column: str) -> float:
    text = cell.strip()
    if text == "":
        raise ValueError(f"missing value at row {row}, column {column!r}")
    try:
        return float(text)
    except ValueError:
        raise ValueError(
            f"non-numeric value {text!r} at row {row}, column {column!r}"
        ) from None


def default_response_columns(family: str):
    if family == "cox":
        return ("time", "status")
    return ("y",)


def load_csv(path, family: str, response=None, header: bool = True) -> Dataset:
    """Read a comma-separated file into a validated :class:`Dataset`.

    ``response`` names the response column (a pair ``(time, status)`` for the
    cox family); it defaults to ``y`` resp. ``("time", "status")``.  With
    ``header=False`` all columns are unnamed and the response is taken from
    the last column (last two for cox); predictors are then named X1..Xp.
    """
    if family not in FAMILIES:
        raise ValueError(f"unknown family {family!r}")
    if response is None:
        response = default_response_columns(family)
    elif isinstance(response, str):
        response = tuple(part.strip() for part in response.split(","))
    else:
        response = tuple(response)
    n_resp = 2 if family == "cox" else 1
    if header and len(response) != n_resp:
        raise ValueError(
            f"family {family!r} needs {n_resp} response column(s), got {len(response)}"
        )

    try:
        with open(path, newline="") as fh:
            rows = [row for row in csv.reader(fh) if row]
    except FileNotFoundError:
        raise ValueError(f"file not found: {path}") from None
    if not rows:
        raise ValueError(f"empty file: {path}")

    if header:
        names = [c.strip() for c in rows[0]]
        body = rows[1:]
        for col in response:
            if col not in names:
                raise ValueError(f"response column {col!r} not found in header")
        resp_idx = [names.index(c) for c in response]
    else:
        width = len(rows[0])
        if width < n_resp + 1:
            raise ValueError("too few columns for predictors plus response")
        body = rows
        resp_idx = list(range(width - n_resp, width))
        names = [f"X{j + 1}" for j in range(width - n_resp)] + list(
            default_response_columns(family)
        )

    width = len(names)
    parsed = np.empty((len(body), width), dtype=float)
    for i, row in enumerate(body):
        if len(row) != width:
            raise ValueError(f"row {i + 1} has {len(row)} fields, expected {width}")
        for j, cell in enumerate(row):
            parsed[i, j] = _parse_cell(cell, i + 1, names[j])

    x_idx = [j for j in range(width) if j not in resp_idx]
    if not x_idx:
        raise ValueError("no predictor columns left after removing the response")
    X = parsed[:, x_idx]
    x_names = tuple(names[j] for j in x_idx)

    if family == "gaussian":
        resp = Continuous(parsed[:, resp_idx[0]])
    elif family == "binomial":
        resp = Binary(parsed[:, resp_idx[0]])
    else:
        resp = Survival(parsed[:, resp_idx[0]], parsed[:, resp_idx[1]])
    return Dataset(X, resp, x_names)


def save_csv(d: Dataset, path) -> None:
    """Write a dataset back to CSV; values use repr so reloads are bit-exact."""
    kind = response_kind(d.response)
    if kind == "survival":
        resp_names = ["time", "status"]
        resp_cols = [d.response.time, d.response.status]
    else:
        resp_names = ["y"]
        resp_cols = [d.response.y]
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(list(d.names()) + resp_names)
        for i in range(d.n):
            row = [repr(float(v)) for v in d.X[i]]
            row += [repr(float(col[i])) for col in resp_cols]
            writer.writerow(row)
