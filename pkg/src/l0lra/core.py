"""Exact rational matrices, subspaces and planted instances.

Everything here works over ``fractions.Fraction`` so that equality tests,
ranks and error counts are exact. Vectors are plain tuples of Fractions.
"""
from __future__ import annotations

import random
import re
from dataclasses import dataclass
from fractions import Fraction
from math import lcm
from typing import Iterable, Sequence

from .errors import DimensionError, ParameterError, ParseError

Rational = Fraction
Vector = tuple

_TOKEN = re.compile(r"^([+-]?\d+)(?:/([+-]?\d+))?$")


def to_rational(x) -> Fraction:
    """Coerce an int, Fraction, ``"p/q"`` string or float (exactly) to a Fraction."""
    if isinstance(x, Fraction):
        return x
    if isinstance(x, bool):
        raise ParameterError("booleans are not matrix entries")
    if isinstance(x, int):
        return Fraction(x)
    if isinstance(x, str):
        return parse_rational(x)
    try:
        return Fraction(x)
    except (TypeError, ValueError) as exc:
        raise ParameterError(f"cannot interpret {x!r} as a rational") from exc


def parse_rational(token: str) -> Fraction:
    m = _TOKEN.match(token.strip())
    if not m:
        raise ParseError(f"bad rational token {token!r}")
    p = int(m.group(1))
    if m.group(2) is None:
        return Fraction(p)
    q = int(m.group(2))
    if q == 0:
        raise ParseError(f"zero denominator in {token!r}")
    return Fraction(p, q)


def vec(xs: Iterable) -> tuple:
    return tuple(to_rational(x) for x in xs)


def zero_vec(k: int) -> tuple:
    return (Fraction(0),) * k


def unit_vec(k: int, i: int) -> tuple:
    return tuple(Fraction(int(t == i)) for t in range(k))


def dot(u: Sequence, w: Sequence) -> Fraction:
    if len(u) != len(w):
        raise DimensionError(f"length mismatch {len(u)} vs {len(w)}")
    s = Fraction(0)
    for a, b in zip(u, w):
        if a and b:
            s += a * b
    return s


def vadd(u, w):
    return tuple(a + b for a, b in zip(u, w))


def vsub(u, w):
    return tuple(a - b for a, b in zip(u, w))


def vscale(c, u):
    return tuple(c * a for a in u)


def is_zero(u) -> bool:
    return not any(u)


# ---------------------------------------------------------------------------
# Matrices


class RationalMatrix:
    """Immutable dense matrix of Fractions, stored row-major."""

    __slots__ = ("n_rows", "n_cols", "_rows")

    def __init__(self, rows: Iterable[Iterable], n_cols: int | None = None):
        data = tuple(vec(r) for r in rows)
        if n_cols is None:
            n_cols = len(data[0]) if data else 0
        for r in data:
            if len(r) != n_cols:
                raise DimensionError("ragged rows")
        self.n_rows = len(data)
        self.n_cols = n_cols
        self._rows = data

    @classmethod
    def zeros(cls, n_rows: int, n_cols: int) -> "RationalMatrix":
        return cls([zero_vec(n_cols) for _ in range(n_rows)], n_cols)

    @classmethod
    def identity(cls, n: int) -> "RationalMatrix":
        return cls([unit_vec(n, i) for i in range(n)], n)

    @classmethod
    def from_columns(cls, cols: Sequence[Sequence], n_rows: int | None = None) -> "RationalMatrix":
        if not cols:
            return cls.zeros(n_rows or 0, 0)
        return cls(zip(*cols), len(cols))

    @property
    def shape(self) -> tuple:
        return (self.n_rows, self.n_cols)

    @property
    def rows(self) -> tuple:
        return self._rows

    def row(self, i: int) -> tuple:
        return self._rows[i]

    def col(self, j: int) -> tuple:
        return tuple(r[j] for r in self._rows)

    def cols(self) -> tuple:
        return tuple(self.col(j) for j in range(self.n_cols))

    def __getitem__(self, ij):
        i, j = ij
        return self._rows[i][j]

    def entries(self):
        """Yield ``(i, j, value)`` in row-major order."""
        for i, r in enumerate(self._rows):
            for j, a in enumerate(r):
                yield i, j, a

    @property
    def T(self) -> "RationalMatrix":
        return RationalMatrix.from_columns(self._rows, self.n_cols) if self.n_rows else RationalMatrix.zeros(self.n_cols, 0)

    def __matmul__(self, other: "RationalMatrix") -> "RationalMatrix":
        if self.n_cols != other.n_rows:
            raise DimensionError(f"cannot multiply {self.shape} by {other.shape}")
        cols = other.cols()
        return RationalMatrix(
            [[dot(r, c) for c in cols] for r in self._rows], other.n_cols
        )

    def __add__(self, other: "RationalMatrix") -> "RationalMatrix":
        if self.shape != other.shape:
            raise DimensionError("shape mismatch")
        return RationalMatrix([vadd(a, b) for a, b in zip(self._rows, other._rows)], self.n_cols)

    def __sub__(self, other: "RationalMatrix") -> "RationalMatrix":
        if self.shape != other.shape:
            raise DimensionError("shape mismatch")
        return RationalMatrix([vsub(a, b) for a, b in zip(self._rows, other._rows)], self.n_cols)

    def submatrix(self, rows: Sequence[int], cols: Sequence[int]) -> "RationalMatrix":
        return RationalMatrix([[self._rows[i][j] for j in cols] for i in rows], len(cols))

    def replace(self, i: int, j: int, value) -> "RationalMatrix":
        rows = [list(r) for r in self._rows]
        rows[i][j] = to_rational(value)
        return RationalMatrix(rows, self.n_cols)

    def to_lists(self) -> list:
        return [list(r) for r in self._rows]

    def __eq__(self, other) -> bool:
        if not isinstance(other, RationalMatrix):
            return NotImplemented
        return self.shape == other.shape and self._rows == other._rows

    def __hash__(self) -> int:
        return hash((self.shape, self._rows))

    def __repr__(self) -> str:
        body = "; ".join(" ".join(str(a) for a in r) for r in self._rows)
        return f"RationalMatrix({self.n_rows}x{self.n_cols}: {body})"


def as_matrix(A) -> RationalMatrix:
    return A if isinstance(A, RationalMatrix) else RationalMatrix(A)


@dataclass(frozen=True)
class FactorPair:
    """Rank-k factorization B = U W^T with U of shape (n_R, k) and W of shape (n_C, k)."""

    U: RationalMatrix
    W: RationalMatrix

    def __post_init__(self):
        if self.U.n_cols != self.W.n_cols:
            raise DimensionError(
                f"U has {self.U.n_cols} columns but W has {self.W.n_cols}"
            )

    @property
    def k(self) -> int:
        return self.U.n_cols

    @property
    def shape(self) -> tuple:
        return (self.U.n_rows, self.W.n_rows)

    def product(self) -> RationalMatrix:
        return self.U @ self.W.T if self.k else RationalMatrix.zeros(self.U.n_rows, self.W.n_rows)

    @classmethod
    def from_vectors(cls, us: Sequence[Sequence], ws: Sequence[Sequence], k: int) -> "FactorPair":
        return cls(RationalMatrix(us, k), RationalMatrix(ws, k))


def l0_error(A: RationalMatrix, B: RationalMatrix) -> int:
    """Number of entries where A and B differ."""
    if A.shape != B.shape:
        raise DimensionError(f"shape mismatch {A.shape} vs {B.shape}")
    return sum(a != b for ra, rb in zip(A.rows, B.rows) for a, b in zip(ra, rb))


def mismatch_positions(A: RationalMatrix, B: RationalMatrix) -> list:
    if A.shape != B.shape:
        raise DimensionError(f"shape mismatch {A.shape} vs {B.shape}")
    return [(i, j) for i, j, a in A.entries() if a != B[i, j]]


# ---------------------------------------------------------------------------
# Elimination


def _integer_rows(rows) -> list:
    out = []
    for r in rows:
        d = lcm(*(a.denominator for a in r)) if r else 1
        out.append([int(a * d) for a in r])
    return out


def rank(A) -> int:
    """Rank by fraction-free (Bareiss) elimination on integer-scaled rows."""
    A = as_matrix(A)
    m = _integer_rows(A.rows)
    n_rows, n_cols = A.n_rows, A.n_cols
    r, prev = 0, 1
    for c in range(n_cols):
        if r == n_rows:
            break
        piv = next((i for i in range(r, n_rows) if m[i][c] != 0), None)
        if piv is None:
            continue
        m[r], m[piv] = m[piv], m[r]
        p = m[r][c]
        for i in range(r + 1, n_rows):
            mi = m[i]
            f = mi[c]
            for j in range(c + 1, n_cols):
                mi[j] = (mi[j] * p - f * m[r][j]) // prev
            mi[c] = 0
        prev = p
        r += 1
    return r


def rref(rows: Sequence[Sequence], n_cols: int):
    """Reduced row echelon form.

    Returns ``(rows, pivots)`` with zero rows dropped, so ``len(rows)`` is
    the rank.
    """
    m = [list(r) for r in rows]
    pivots = []
    r = 0
    for c in range(n_cols):
        piv = next((i for i in range(r, len(m)) if m[i][c] != 0), None)
        if piv is None:
            continue
        m[r], m[piv] = m[piv], m[r]
        p = m[r][c]
        if p != 1:
            m[r] = [a / p for a in m[r]]
        pr = m[r]
        for i in range(len(m)):
            if i != r and m[i][c] != 0:
                f = m[i][c]
                m[i] = [a - f * b for a, b in zip(m[i], pr)]
        pivots.append(c)
        r += 1
        if r == len(m):
            break
    return [tuple(x) for x in m[:r]], pivots


def solve_particular(rows: Sequence[Sequence], rhs: Sequence, n_cols: int):
    """A solution of ``rows @ x = rhs`` with free variables set to zero, or None."""
    aug = [tuple(r) + (b,) for r, b in zip(rows, rhs)]
    red, piv = rref(aug, n_cols + 1)
    if piv and piv[-1] == n_cols:
        return None
    x = [Fraction(0)] * n_cols
    for r, c in zip(red, piv):
        x[c] = r[n_cols]
    return tuple(x)


def solve_min_norm(rows: Sequence[Sequence], rhs: Sequence, n_cols: int):
    """The minimum Euclidean-norm solution of ``rows @ x = rhs``, or None if inconsistent.

    The system is reduced to full row rank R x = c; the answer is R^T y
    with (R R^T) y = c, which is the unique solution inside the row space.
    """
    if not rows:
        return zero_vec(n_cols)
    aug = [tuple(r) + (b,) for r, b in zip(rows, rhs)]
    red, piv = rref(aug, n_cols + 1)
    if piv and piv[-1] == n_cols:
        return None
    if not red:
        return zero_vec(n_cols)
    R = [r[:n_cols] for r in red]
    c = [r[n_cols] for r in red]
    gram = [[dot(a, b) for b in R] for a in R]
    y = solve_particular(gram, c, len(R))
    x = [Fraction(0)] * n_cols
    for yi, r in zip(y, R):
        if yi:
            for j, a in enumerate(r):
                if a:
                    x[j] += yi * a
    return tuple(x)


def nullspace(rows: Sequence[Sequence], n_cols: int) -> list:
    """Canonical kernel basis: one vector per free column, that variable set to 1."""
    red, piv = rref(rows, n_cols)
    free = [c for c in range(n_cols) if c not in piv]
    basis = []
    for f in free:
        x = [Fraction(0)] * n_cols
        x[f] = Fraction(1)
        for r, c in zip(red, piv):
            x[c] = -r[f]
        basis.append(tuple(x))
    return basis


def inverse(A) -> "RationalMatrix":
    """Exact inverse of a square matrix; raises ParameterError when singular."""
    A = as_matrix(A)
    n = A.n_rows
    if A.n_cols != n:
        raise DimensionError("only square matrices have inverses")
    aug = [A.row(i) + unit_vec(n, i) for i in range(n)]
    red, piv = rref(aug, 2 * n)
    # [A | I] always has rank n; A is invertible iff its own columns hold every pivot.
    if n and piv[n - 1] != n - 1:
        raise ParameterError("matrix is singular")
    return RationalMatrix([r[n:] for r in red], n)


def independent(vectors: Sequence[Sequence], k: int) -> bool:
    return len(rref(vectors, k)[0]) == len(vectors)


# ---------------------------------------------------------------------------
# Subspaces


@dataclass(frozen=True)
class Subspace:
    """A linear subspace of Q^k held by its canonical (RREF) basis."""

    ambient_dim: int
    basis: tuple

    @classmethod
    def span(cls, vectors: Iterable[Sequence], k: int) -> "Subspace":
        vs = [vec(v) for v in vectors]
        for v in vs:
            if len(v) != k:
                raise DimensionError(f"vector of length {len(v)} in Q^{k}")
        return cls(k, tuple(rref(vs, k)[0]))

    @classmethod
    def zero(cls, k: int) -> "Subspace":
        return cls(k, ())

    @classmethod
    def full(cls, k: int) -> "Subspace":
        return cls(k, tuple(unit_vec(k, i) for i in range(k)))

    @property
    def dim(self) -> int:
        return len(self.basis)

    def contains(self, v: Sequence) -> bool:
        v = vec(v)
        if len(v) != self.ambient_dim:
            raise DimensionError("ambient dimension mismatch")
        if not any(v):
            return True
        if not self.basis:
            return False
        # Reduce v by the RREF basis; the pivot of each basis row is its leading 1.
        r = list(v)
        for b in self.basis:
            c = next(i for i, a in enumerate(b) if a)
            if r[c]:
                f = r[c]
                r = [x - f * y for x, y in zip(r, b)]
        return not any(r)

    def join(self, other: "Subspace") -> "Subspace":
        return Subspace.span(self.basis + other.basis, self.ambient_dim)

    def add(self, v: Sequence) -> "Subspace":
        return Subspace.span(self.basis + (vec(v),), self.ambient_dim)

    def is_subspace_of(self, other: "Subspace") -> bool:
        return all(other.contains(b) for b in self.basis)

    def complement_basis(self) -> list:
        """Basis of the orthogonal complement."""
        return nullspace(self.basis, self.ambient_dim)

    def intersect(self, other: "Subspace") -> "Subspace":
        k = self.ambient_dim
        cons = self.complement_basis() + other.complement_basis()
        return Subspace.span(nullspace(cons, k) if cons else Subspace.full(k).basis, k)

    def project(self, v: Sequence) -> tuple:
        return project(v, self)

    def key(self) -> tuple:
        return self.basis


def project(v: Sequence, T: Subspace) -> tuple:
    """Orthogonal projection of v onto T via the normal equations."""
    v = vec(v)
    if len(v) != T.ambient_dim:
        raise DimensionError("ambient dimension mismatch")
    if T.dim == 0:
        return zero_vec(T.ambient_dim)
    if T.dim == T.ambient_dim:
        return v
    B = T.basis
    gram = [[dot(a, b) for b in B] for a in B]
    y = solve_particular(gram, [dot(b, v) for b in B], len(B))
    out = [Fraction(0)] * T.ambient_dim
    for yi, b in zip(y, B):
        for j, a in enumerate(b):
            if a:
                out[j] += yi * a
    return tuple(out)


# ---------------------------------------------------------------------------
# Planted instances


@dataclass(frozen=True)
class PlantedInstance:
    A: RationalMatrix
    pair: FactorPair
    corrupted: tuple
    seed: int

    @property
    def k(self) -> int:
        return self.pair.k


def plant(n_rows: int, n_cols: int, k: int, error_count: int, seed: int,
          entry_range: int = 3, max_tries: int = 1000) -> PlantedInstance:
    """Plant a rank-k matrix and corrupt exactly ``error_count`` entries.

    U and W get integer entries in [-entry_range, entry_range], redrawn until
    U W^T has rank exactly k. Each corrupted entry gets a nonzero rational
    added to it. The same arguments always give the same instance.
    """
    if n_rows < 1 or n_cols < 1:
        raise ParameterError("matrix dimensions must be positive")
    if not 0 <= k <= min(n_rows, n_cols):
        raise ParameterError(f"k={k} must lie in [0, min(n_R, n_C)]")
    if not 0 <= error_count <= n_rows * n_cols:
        raise ParameterError("error_count out of range")
    rng = random.Random(seed)
    lo, hi = -entry_range, entry_range
    for _ in range(max_tries):
        U = RationalMatrix([[rng.randint(lo, hi) for _ in range(k)] for _ in range(n_rows)], k)
        W = RationalMatrix([[rng.randint(lo, hi) for _ in range(k)] for _ in range(n_cols)], k)
        pair = FactorPair(U, W)
        B = pair.product()
        if rank(B) == k:
            break
    else:
        raise ParameterError("could not draw a rank-k product; widen entry_range")
    cells = sorted(rng.sample(range(n_rows * n_cols), error_count))
    rows = B.to_lists()
    corrupted = []
    for c in cells:
        i, j = divmod(c, n_cols)
        delta = Fraction(rng.choice([-3, -2, -1, 1, 2, 3]), rng.choice([1, 1, 2]))
        rows[i][j] += delta
        corrupted.append((i, j))
    return PlantedInstance(RationalMatrix(rows, n_cols), pair, tuple(corrupted), seed)


# ---------------------------------------------------------------------------
# Text format: "n_rows n_cols" header, then one whitespace-separated row per line.


def serialize(A: RationalMatrix) -> str:
    lines = [f"{A.n_rows} {A.n_cols}"]
    lines += [" ".join(str(a) for a in r) for r in A.rows]
    return "\n".join(lines) + "\n"


def _parse_matrix_lines(lines: list, pos: int):
    while pos < len(lines) and not lines[pos].strip():
        pos += 1
    if pos >= len(lines):
        raise ParseError("missing matrix header")
    head = lines[pos].split()
    if len(head) != 2 or not all(t.isdigit() for t in head):
        raise ParseError(f"bad header line {lines[pos]!r}")
    n_rows, n_cols = int(head[0]), int(head[1])
    pos += 1
    rows = []
    while len(rows) < n_rows:
        if pos >= len(lines):
            raise ParseError(f"expected {n_rows} rows, found {len(rows)}")
        toks = lines[pos].split()
        pos += 1
        if not toks:
            continue
        if len(toks) != n_cols:
            raise ParseError(f"row {len(rows)} has {len(toks)} entries, expected {n_cols}")
        rows.append([parse_rational(t) for t in toks])
    return RationalMatrix(rows, n_cols), pos


def parse(text: str) -> RationalMatrix:
    lines = text.splitlines()
    A, pos = _parse_matrix_lines(lines, 0)
    if any(l.strip() for l in lines[pos:]):
        raise ParseError("trailing content after matrix")
    return A


def serialize_pair(pair: FactorPair) -> str:
    return serialize(pair.U) + serialize(pair.W)


def parse_pair(text: str) -> FactorPair:
    lines = text.splitlines()
    U, pos = _parse_matrix_lines(lines, 0)
    W, pos = _parse_matrix_lines(lines, pos)
    if any(l.strip() for l in lines[pos:]):
        raise ParseError("trailing content after factor pair")
    try:
        return FactorPair(U, W)
    except DimensionError as exc:
        raise ParseError(str(exc)) from exc
