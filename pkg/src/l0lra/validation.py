"""Input checks shared by the estimator and the CLI."""
from __future__ import annotations

import math
import numbers
from fractions import Fraction

import numpy as np

from .core import RationalMatrix
from .errors import DimensionError, ParameterError


def _exact(x, where: str) -> Fraction:
    if isinstance(x, Fraction):
        return x
    if isinstance(x, (bool, np.bool_)):
        return Fraction(int(x))
    if isinstance(x, (numbers.Integral, np.integer)):
        return Fraction(int(x))
    if isinstance(x, (numbers.Real, np.floating)):
        f = float(x)
        if not math.isfinite(f):
            raise ParameterError(f"non-finite entry at {where}")
        return Fraction(f)
    if isinstance(x, str):
        try:
            return Fraction(x)
        except ValueError as exc:
            raise ParameterError(f"bad entry {x!r} at {where}") from exc
    raise ParameterError(f"unsupported entry type {type(x).__name__} at {where}")


def check_matrix(X, name: str = "X", allow_empty: bool = False) -> RationalMatrix:
    """Coerce X to an exact RationalMatrix.

    Accepts a RationalMatrix, nested sequences, or a 2-D numpy array.
    Floats convert to their exact binary value, so 0.1 is not 1/10; pass
    strings or Fractions for decimal input.
    """
    if isinstance(X, RationalMatrix):
        M = X
    else:
        if isinstance(X, np.ndarray):
            if X.ndim != 2:
                raise DimensionError(f"{name} must be 2-D, got {X.ndim}-D")
            rows = X.tolist()
        else:
            try:
                rows = [list(r) for r in X]
            except TypeError as exc:
                raise DimensionError(f"{name} must be a 2-D array") from exc
        widths = {len(r) for r in rows}
        if len(widths) > 1:
            raise DimensionError(f"{name} has ragged rows")
        n_cols = widths.pop() if widths else 0
        M = RationalMatrix([[_exact(x, f"{name}[{i}, {j}]") for j, x in enumerate(r)]
                            for i, r in enumerate(rows)], n_cols)
    if not allow_empty and (M.n_rows == 0 or M.n_cols == 0):
        raise DimensionError(f"{name} must have at least one row and one column")
    return M


def check_rank(k) -> int:
    if isinstance(k, bool) or not isinstance(k, (numbers.Integral, np.integer)):
        raise ParameterError(f"k must be an integer, got {k!r}")
    if k < 1:
        raise ParameterError("k must be at least 1")
    return int(k)


def check_fraction(x, name: str, low=0, high=1, closed_high: bool = True) -> Fraction:
    """Exact value in (low, high] (or (low, high) with ``closed_high=False``)."""
    try:
        v = Fraction(str(x)) if isinstance(x, float) else Fraction(x)
    except (TypeError, ValueError) as exc:
        raise ParameterError(f"{name} must be a number, got {x!r}") from exc
    ok = low < v and (v <= high if closed_high else v < high)
    if not ok:
        bracket = "]" if closed_high else ")"
        raise ParameterError(f"{name} must lie in ({low}, {high}{bracket}, got {x!r}")
    return v


def check_seed(seed) -> int:
    if isinstance(seed, bool) or not isinstance(seed, (numbers.Integral, np.integer)):
        raise ParameterError(f"seed must be an integer, got {seed!r}")
    return int(seed)


def check_budget(budget) -> int | None:
    if budget is None:
        return None
    if isinstance(budget, bool) or not isinstance(budget, (numbers.Integral, np.integer)) or budget < 1:
        raise ParameterError(f"budget must be a positive integer, got {budget!r}")
    return int(budget)


def to_object_array(M: RationalMatrix) -> np.ndarray:
    out = np.empty(M.shape, dtype=object)
    for i, j, a in M.entries():
        out[i, j] = a
    return out
