"""scikit-learn style wrapper around the solvers.

``L0LowRank`` fits a rank-k factorization minimizing the number of
mismatched entries. After fitting, ``components_`` holds the column factor
W; ``transform`` maps new rows to their best row factors against W,
``inverse_transform`` maps factors back, and ``predict`` does both.
Outputs are numpy object arrays of Fractions so no precision is lost.
"""
from __future__ import annotations

import numpy as np
from sklearn.base import BaseEstimator, TransformerMixin
from sklearn.utils.validation import check_is_fitted

from .additive import hinted_supercores, run_additive
from .core import FactorPair, RationalMatrix, l0_error
from .csp import DEFAULT_BUDGET
from .errors import DimensionError, ParameterError
from .oracle import RANK1_MAX_ENTRIES, exact_rank1
from .ptas import run_ptas
from .validation import (check_budget, check_fraction, check_matrix, check_rank, check_seed,
                         to_object_array)
from .voting import VoteInput, vote

SOLVERS = ("auto", "exact_rank1", "additive", "ptas")


class L0LowRank(BaseEstimator, TransformerMixin):
    """Entry-count low-rank approximation.

    Parameters
    ----------
    k : int
        Target rank.
    solver : {"auto", "exact_rank1", "additive", "ptas"}
        ``auto`` uses the exact rank-1 search when k = 1 and the matrix is
        within ``max_entries``, otherwise the additive scheme.
    eps : float or Fraction
        Accuracy for the additive scheme, and eps0 for the ptas.
    kappa1 : int
        Core size for the exhaustive supercore family (no hint given).
    """

    def __init__(self, k=1, solver="auto", eps=0.25, seed=0, kappa1=1,
                 max_entries=RANK1_MAX_ENTRIES, budget=None):
        self.k = k
        self.solver = solver
        self.eps = eps
        self.seed = seed
        self.kappa1 = kappa1
        self.max_entries = max_entries
        self.budget = budget

    def _validate_params(self):
        k = check_rank(self.k)
        if self.solver not in SOLVERS:
            raise ParameterError(f"unknown solver {self.solver!r}; pick one of {SOLVERS}")
        eps = check_fraction(self.eps, "eps")
        if not 0 <= self.kappa1 <= 4:
            raise ParameterError("kappa1 must lie in [0, 4]")
        return k, eps, check_seed(self.seed), check_budget(self.budget)

    def fit(self, X, y=None, hint: FactorPair | None = None):
        """Fit factors to X. ``hint`` (a known good pair) switches to hinted guesses."""
        k, eps, seed, budget = self._validate_params()
        A = check_matrix(X)
        solver = self.solver
        if solver == "auto":
            small = self.max_entries is None or A.n_rows * A.n_cols <= self.max_entries
            solver = "exact_rank1" if k == 1 and small else "additive"
        flags = ()
        if solver == "exact_rank1":
            if k != 1:
                raise ParameterError("exact_rank1 needs k = 1")
            pair, _ = exact_rank1(A, max_entries=self.max_entries, budget=budget)
        elif solver == "additive":
            if hint is not None:
                sol = run_additive(A, k, eps, mode="hinted", seed=seed,
                                   hints=hinted_supercores(A, hint), budget=budget or DEFAULT_BUDGET)
            else:
                sol = run_additive(A, k, eps, mode="exhaustive", seed=seed, kappa1=self.kappa1,
                                   budget=budget or DEFAULT_BUDGET)
            pair, flags = sol.pair, sol.flags
        else:
            mode = "hinted" if hint is not None else "exhaustive"
            sol = run_ptas(A, k, eps, mode=mode, planted=hint, seed=seed)
            pair, flags = sol.pair, sol.flags
        self.factors_ = pair
        self.components_ = to_object_array(pair.W)
        self.error_ = l0_error(A, pair.product())
        self.solver_ = solver
        self.flags_ = tuple(flags)
        self.n_features_in_ = A.n_cols
        return self

    def _check_X(self, X):
        check_is_fitted(self, "factors_")
        A = check_matrix(X)
        if A.n_cols != self.n_features_in_:
            raise DimensionError(f"X has {A.n_cols} columns, fitted on {self.n_features_in_}")
        return A

    def transform(self, X):
        """Row factors minimizing each row's mismatches against the fitted W."""
        A = self._check_X(X)
        W = self.factors_.W
        k = W.n_cols
        out = []
        for p in range(A.n_rows):
            inp = VoteInput.build(k, (A.n_cols,), [[(W.row(q), A[p, q]) for q in range(A.n_cols)]])
            out.append(vote(inp)[0])
        return to_object_array(RationalMatrix(out, k))

    def inverse_transform(self, Z):
        check_is_fitted(self, "factors_")
        U = check_matrix(Z, "Z", allow_empty=True)
        if U.n_cols != self.factors_.k:
            raise DimensionError(f"Z has {U.n_cols} columns, expected {self.factors_.k}")
        return to_object_array(U @ self.factors_.W.T)

    def predict(self, X):
        """Rank-k reconstruction of X through the fitted column factors."""
        return self.inverse_transform(self.transform(X))

    def score(self, X, y=None) -> int:
        """Negative count of entries the reconstruction gets wrong."""
        A = self._check_X(X)
        B = check_matrix(self.predict(X))
        return -l0_error(A, B)

    def reconstruction(self) -> np.ndarray:
        check_is_fitted(self, "factors_")
        return to_object_array(self.factors_.product())
