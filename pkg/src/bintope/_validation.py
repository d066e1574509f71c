"""Input checks shared by the estimator wrappers."""
from __future__ import annotations

from fractions import Fraction

import numpy as np
from sklearn.utils.validation import check_array


def _as_int_array(X, what: str) -> np.ndarray:
    arr = check_array(X, dtype=None, ensure_2d=True, ensure_all_finite=True)
    if arr.dtype.kind in "iu":
        return arr.astype(np.int64)
    if arr.dtype.kind == "f":
        if not np.all(arr == np.round(arr)):
            raise ValueError(f"{what} must have integer entries")
        return arr.astype(np.int64)
    raise ValueError(f"{what} must be numeric, got dtype {arr.dtype}")


def check_lattice_points(X) -> np.ndarray:
    """An (n, d) integer array of points that can span R^d."""
    X = _as_int_array(X, "points")
    n, d = X.shape
    if len({tuple(r) for r in X.tolist()}) < d + 1:
        raise ValueError(f"need at least {d + 1} distinct points in dimension {d}")
    return X


def check_exponent_matrix(A) -> np.ndarray:
    return _as_int_array(A, "exponent matrix")


def check_rhs(b, m: int) -> tuple:
    if b is None:
        return (1,) * m
    vals = list(b)
    if len(vals) != m:
        raise ValueError(f"expected {m} right-hand sides, got {len(vals)}")
    out = []
    for v in vals:
        if isinstance(v, (int, np.integer)) and not isinstance(v, bool):
            out.append(Fraction(int(v)))
        elif isinstance(v, Fraction):
            out.append(v)
        else:
            out.append(complex(v))
    if any(v == 0 for v in out):
        raise ValueError("right-hand sides must be nonzero")
    return tuple(out)
