"""Finite-alphabet assignment problems.

Each row and column picks one vector from its own alphabet; an entry is
unsatisfied when the inner product of the two choices differs from A.
Mismatch tables are computed once with exact arithmetic and then searched
with integer numpy arrays.
"""
from __future__ import annotations

import logging
import math
import random
from dataclasses import dataclass, field
from fractions import Fraction
from itertools import product

import numpy as np

from .core import FactorPair, RationalMatrix, dot, l0_error, vec
from .errors import DimensionError, ParameterError

log = logging.getLogger(__name__)

DEFAULT_BUDGET = 100_000


@dataclass(frozen=True)
class AlphabetMap:
    """Candidate vectors per row and per column.

    Alphabets are deduplicated and sorted, so choice index order is
    lexicographic order on the vectors.
    """

    k: int
    row_alphabets: tuple
    col_alphabets: tuple

    @classmethod
    def build(cls, k: int, rows, cols) -> "AlphabetMap":
        def canon(alphs, side):
            out = []
            for idx, a in enumerate(alphs):
                vs = sorted({vec(v) for v in a})
                if not vs:
                    raise ParameterError(f"empty alphabet for {side} {idx}")
                for v in vs:
                    if len(v) != k:
                        raise DimensionError(f"alphabet vector of length {len(v)}, expected {k}")
                out.append(tuple(vs))
            return tuple(out)

        return cls(k, canon(rows, "row"), canon(cols, "column"))

    @property
    def shape(self) -> tuple:
        return (len(self.row_alphabets), len(self.col_alphabets))

    def total_size(self) -> int:
        return sum(map(len, self.row_alphabets)) + sum(map(len, self.col_alphabets))

    def merge(self, other: "AlphabetMap") -> "AlphabetMap":
        if self.shape != other.shape or self.k != other.k:
            raise DimensionError("alphabet maps disagree in shape")
        return AlphabetMap.build(
            self.k,
            [a + b for a, b in zip(self.row_alphabets, other.row_alphabets)],
            [a + b for a, b in zip(self.col_alphabets, other.col_alphabets)],
        )


@dataclass(frozen=True)
class Assignment:
    row_choice: tuple
    col_choice: tuple
    notes: tuple = field(default=(), compare=False)

    def to_pair(self, alphabets: AlphabetMap) -> FactorPair:
        k = alphabets.k
        us = [alphabets.row_alphabets[p][a] for p, a in enumerate(self.row_choice)]
        ws = [alphabets.col_alphabets[q][b] for q, b in enumerate(self.col_choice)]
        return FactorPair(RationalMatrix(us, k), RationalMatrix(ws, k))


def _check_shape(A: RationalMatrix, alphabets: AlphabetMap):
    if alphabets.shape != A.shape:
        raise DimensionError(f"alphabets cover {alphabets.shape}, matrix is {A.shape}")


def unsat_count(A: RationalMatrix, alphabets: AlphabetMap, assignment: Assignment) -> int:
    _check_shape(A, alphabets)
    return l0_error(A, assignment.to_pair(alphabets).product())


def mismatch_tables(A: RationalMatrix, alphabets: AlphabetMap) -> list:
    """``T[p][q][a, b]`` is 1 when row choice a and column choice b disagree with A[p, q]."""
    _check_shape(A, alphabets)
    tables = []
    for p, ra in enumerate(alphabets.row_alphabets):
        row = []
        for q, ca in enumerate(alphabets.col_alphabets):
            a_pq = A[p, q]
            t = np.empty((len(ra), len(ca)), dtype=np.int64)
            for x, u in enumerate(ra):
                for y, w in enumerate(ca):
                    t[x, y] = dot(u, w) != a_pq
            row.append(t)
        tables.append(row)
    return tables


def _integer_weights(cols, weights) -> dict:
    if weights is None:
        return {c: 1 for c in cols}
    ws = {c: Fraction(weights.get(c, 1)) for c in cols}
    if any(w < 0 for w in ws.values()):
        raise ParameterError("weights must be nonnegative")
    den = math.lcm(*(w.denominator for w in ws.values())) if ws else 1
    return {c: int(w * den) for c, w in ws.items()}


def _batch_greedy(tables, cols, choices: np.ndarray, iw: dict):
    """Rows best-respond to each seed row of ``choices``, then columns best-respond to rows.

    Returns (totals, row_picks, col_picks) with one entry per seed.
    """
    n_seeds = choices.shape[0]
    row_picks = []
    for t_p in tables:
        cost = np.zeros((n_seeds, t_p[0].shape[0]), dtype=np.int64)
        for idx, c in enumerate(cols):
            if iw[c]:
                cost += iw[c] * t_p[c][:, choices[:, idx]].T
        row_picks.append(np.argmin(cost, axis=1))
    totals = np.zeros(n_seeds, dtype=np.int64)
    col_picks = []
    n_cols = len(tables[0]) if tables else 0
    for q in range(n_cols):
        cost = None
        for p, t_p in enumerate(tables):
            part = t_p[q][row_picks[p], :]
            cost = part if cost is None else cost + part
        if cost is None:
            col_picks.append(np.zeros(n_seeds, dtype=np.int64))
            continue
        pick = np.argmin(cost, axis=1)
        col_picks.append(pick)
        totals += cost[np.arange(n_seeds), pick]
    return totals, row_picks, col_picks


def greedy_rows_then_cols(A: RationalMatrix, alphabets: AlphabetMap, col_seed: dict,
                          weights: dict | None = None) -> Assignment:
    """Rows pick the vector minimizing weighted mismatches against the seeded columns;
    then every column picks its best vector against the chosen rows.

    ``weights`` maps a seeded column to its weight (layer size over sample
    count when the seeds come from layer samples). Ties go to the lowest
    choice index.
    """
    _check_shape(A, alphabets)
    cols = sorted(col_seed)
    for c in cols:
        if not 0 <= col_seed[c] < len(alphabets.col_alphabets[c]):
            raise ParameterError(f"seed choice out of range for column {c}")
    tables = mismatch_tables(A, alphabets)
    choices = np.array([[col_seed[c] for c in cols]], dtype=np.int64).reshape(1, len(cols))
    _, rp, cp = _batch_greedy(tables, cols, choices, _integer_weights(cols, weights))
    return Assignment(tuple(int(r[0]) for r in rp), tuple(int(c[0]) for c in cp))


def sample_size(alphabets: AlphabetMap, eps) -> int:
    eps = Fraction(eps)
    if not 0 < eps <= 1:
        raise ParameterError("eps must lie in (0, 1]")
    q = max(alphabets.total_size(), 2)
    return max(1, math.ceil(math.log(q) / float(eps * eps)))


def solve_additive(A: RationalMatrix, alphabets: AlphabetMap, eps, seed: int = 0,
                   budget: int = DEFAULT_BUDGET) -> Assignment:
    """Sample columns, try every alphabet choice on them, and finish greedily.

    The sample has about log(total alphabet size)/eps^2 columns, trimmed so
    the number of enumerated seed choices stays within ``budget``. Trimming
    is reported in ``Assignment.notes``.
    """
    _check_shape(A, alphabets)
    n_rows, n_cols = A.shape
    if n_rows == 0 or n_cols == 0:
        return Assignment((0,) * n_rows, (0,) * n_cols)
    want = min(sample_size(alphabets, eps), n_cols)
    rng = random.Random(seed)
    cols = sorted(rng.sample(range(n_cols), want))
    sizes = [len(alphabets.col_alphabets[c]) for c in cols]
    notes = []
    while cols and math.prod(sizes) > budget:
        cols.pop()
        sizes.pop()
    if len(cols) < want:
        notes.append(f"sample trimmed from {want} to {len(cols)} columns by budget {budget}")
        log.warning(notes[-1])
    tables = mismatch_tables(A, alphabets)
    if cols:
        choices = np.array(list(product(*(range(s) for s in sizes))), dtype=np.int64)
    else:
        choices = np.zeros((1, 0), dtype=np.int64)
    totals, rp, cp = _batch_greedy(tables, cols, choices, _integer_weights(cols, None))
    best = int(np.argmin(totals))
    return Assignment(tuple(int(r[best]) for r in rp), tuple(int(c[best]) for c in cp), tuple(notes))
