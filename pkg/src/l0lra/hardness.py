"""Set Cover to low-rank approximation reduction, with certificates.

Given sets S_1..S_m over {1..n}, let A be the n x m incidence matrix
and V its kernel with basis b_1..b_k. The instance matrix M (m rows) holds
m + 1 copies of the block [b_1 .. b_k] followed by one column w solving
A w = -1. An exact cover of size l yields a rank-k approximation of M with
exactly l errors, all in the last column.
"""
from __future__ import annotations

import random
from dataclasses import dataclass
from itertools import combinations

from .core import FactorPair, RationalMatrix, Subspace, as_matrix, l0_error, nullspace, rank, \
    solve_particular, unit_vec, vec
from .errors import CertificateError, DimensionError, IdentifiedNo, ParameterError, ParseError


@dataclass(frozen=True)
class SetCoverInstance:
    universe_size: int
    sets: tuple  # of frozensets over 1..universe_size

    def __post_init__(self):
        if self.universe_size < 1:
            raise ParameterError("the universe must be nonempty")
        for t, s in enumerate(self.sets):
            if not s:
                raise ParameterError(f"set {t + 1} is empty")
            if any(not 1 <= e <= self.universe_size for e in s):
                raise ParameterError(f"set {t + 1} has elements outside 1..{self.universe_size}")

    @classmethod
    def build(cls, universe_size: int, sets) -> "SetCoverInstance":
        return cls(int(universe_size), tuple(frozenset(int(e) for e in s) for s in sets))

    @property
    def n_sets(self) -> int:
        return len(self.sets)

    def is_cover(self, indices) -> bool:
        got = set()
        for t in indices:
            got |= self.sets[t]
        return len(got) == self.universe_size

    def is_exact_cover(self, indices) -> bool:
        indices = list(indices)
        if len(set(indices)) != len(indices) or any(not 0 <= t < self.n_sets for t in indices):
            return False
        return self.is_cover(indices) and sum(len(self.sets[t]) for t in indices) == self.universe_size


def parse_set_cover(text: str) -> SetCoverInstance:
    """First line "n m", then m lines of space-separated elements."""
    lines = [l for l in text.splitlines()]
    while lines and not lines[-1].strip():
        lines.pop()
    if not lines:
        raise ParseError("empty set cover file")
    head = lines[0].split()
    if len(head) != 2 or not all(t.isdigit() for t in head):
        raise ParseError(f"bad header line {lines[0]!r}")
    n, m = map(int, head)
    body = lines[1:]
    if len(body) != m:
        raise ParseError(f"expected {m} set lines, found {len(body)}")
    sets = []
    for t, line in enumerate(body):
        toks = line.split()
        if not all(x.isdigit() for x in toks):
            raise ParseError(f"set line {t + 1} has a non-integer element")
        sets.append([int(x) for x in toks])
    try:
        return SetCoverInstance.build(n, sets)
    except ParameterError as exc:
        raise ParseError(str(exc)) from exc


def serialize_set_cover(inst: SetCoverInstance) -> str:
    lines = [f"{inst.universe_size} {inst.n_sets}"]
    lines += [" ".join(str(e) for e in sorted(s)) for s in inst.sets]
    return "\n".join(lines) + "\n"


@dataclass(frozen=True)
class ReductionOutput:
    M: RationalMatrix
    k: int
    kernel_basis: tuple
    w: tuple
    incidence: RationalMatrix

    @property
    def n_sets(self) -> int:
        return self.incidence.n_cols


def incidence_matrix(inst: SetCoverInstance) -> RationalMatrix:
    return RationalMatrix([[int(e in s) for s in inst.sets] for e in range(1, inst.universe_size + 1)],
                          inst.n_sets)


def kernel_basis(A) -> list:
    """Canonical basis of ker A: free variables in column order, each set to 1."""
    A = as_matrix(A)
    return nullspace(A.rows, A.n_cols)


def reduce(inst: SetCoverInstance) -> ReductionOutput:
    A = incidence_matrix(inst)
    m = inst.n_sets
    w = solve_particular(A.rows, [-1] * A.n_rows, m)
    if w is None:
        raise IdentifiedNo("A w = -1 has no solution, so no exact cover exists")
    w = vec(w)
    basis = kernel_basis(A)
    k = len(basis)
    cols = [b for _ in range(m + 1) for b in basis] + [w]
    M = RationalMatrix.from_columns(cols, m)
    return ReductionOutput(M, k, tuple(basis), w, A)


def _coordinates(x, basis, m):
    """Coefficients of x in ``basis`` (the basis is canonical, so read them off free columns)."""
    rows = [[b[i] for b in basis] for i in range(m)]
    c = solve_particular(rows, list(x), len(basis))
    if c is None:
        raise CertificateError("vector is not in the kernel")
    return c


def certify_yes(out: ReductionOutput, cover) -> tuple:
    """Rank-k factor pair of M with the cover's defect moved into the last column.

    Returns ``(pair, error)`` where error counts entries differing from M;
    it equals the cover size.
    """
    cover = list(cover)
    m, k = out.n_sets, out.k
    A = out.incidence
    if len(set(cover)) != len(cover) or any(not 0 <= t < m for t in cover):
        raise CertificateError("cover indices must be distinct set indices")
    hits = [sum(A[e, t] for t in cover) for e in range(A.n_rows)]
    if any(h != 1 for h in hits):
        raise CertificateError("the given sets are not an exact cover")
    v = [0] * m
    for t in cover:
        v[t] = -1
    last = tuple(a - b for a, b in zip(out.w, v))
    if any(x for x in (A @ RationalMatrix.from_columns([last], m)).col(0)):
        raise CertificateError("w - v is not in the kernel")
    if k == 0:
        pair = FactorPair(RationalMatrix.zeros(m, 0), RationalMatrix.zeros(out.M.n_cols, 0))
    else:
        U = RationalMatrix.from_columns(list(out.kernel_basis), m)
        ws = [unit_vec(k, t) for _ in range(m + 1) for t in range(k)]
        ws.append(_coordinates(last, out.kernel_basis, m))
        pair = FactorPair(U, RationalMatrix(ws, k))
    err = l0_error(out.M, pair.product())
    if err != len(cover):
        raise CertificateError(f"certificate error {err} differs from cover size {len(cover)}")
    return pair, err


@dataclass(frozen=True)
class Diagnosis:
    status: str  # "cover", "error-exceeds-m" or "claim-violation"
    error: int
    cover: tuple = ()
    message: str = ""


def soundness_probe(out: ReductionOutput, candidate: FactorPair) -> Diagnosis:
    """Read a set cover back out of any rank-k approximation with at most m errors."""
    m, k = out.n_sets, out.k
    if candidate.shape != out.M.shape:
        raise DimensionError("candidate shape does not match M")
    B = candidate.product()
    if rank(B) > k:
        raise ParameterError(f"candidate has rank above {k}")
    err = l0_error(out.M, B)
    if err > m:
        return Diagnosis("error-exceeds-m", err, (), f"error {err} exceeds m = {m}, no claim applies")
    V = Subspace.span(out.kernel_basis, m)
    if Subspace.span(B.cols(), m) != V:
        return Diagnosis("claim-violation", err, (), "column space differs from the kernel")
    diff = vec(a - b for a, b in zip(out.w, B.col(B.n_cols - 1)))
    support = tuple(t for t, x in enumerate(diff) if x)
    inc = out.incidence
    covered = all(any(inc[e, t] for t in support) for e in range(inc.n_rows))
    if not covered:
        return Diagnosis("claim-violation", err, support, "support of w minus last column is not a cover")
    return Diagnosis("cover", err, support)


def min_cover_size(inst: SetCoverInstance) -> int:
    for size in range(1, inst.n_sets + 1):
        if any(inst.is_cover(c) for c in combinations(range(inst.n_sets), size)):
            return size
    raise ParameterError("the sets do not cover the universe")


def generate_exact_coverable(n: int, m: int, seed: int, k: int | None = None,
                             max_tries: int = 2000) -> tuple:
    """Random family with an exact cover that is also a minimum set cover.

    An exact cover is planted; if a smaller set cover exists, the smallest
    exact cover is returned instead, and the draw is rejected if there is
    none. With the cover minimum, the sparsest correction of the last
    column has exactly l entries, so the instance's optimum equals l.
    ``k`` pins the kernel dimension. Returns ``(instance, cover)`` with
    0-based set indices.
    """
    if n < 1 or m < 1:
        raise ParameterError("n and m must be positive")
    rng = random.Random(seed)
    for _ in range(max_tries):
        ell = rng.randint(min(2, n, m), min(n, m))
        elems = list(range(1, n + 1))
        rng.shuffle(elems)
        cuts = sorted(rng.sample(range(1, n), ell - 1)) if ell > 1 else []
        blocks = [frozenset(elems[a:b]) for a, b in zip([0] + cuts, cuts + [n])]
        extra = []
        while len(extra) < m - ell:
            size = rng.randint(1, max(1, n - 1))
            s = frozenset(rng.sample(range(1, n + 1), size))
            if s not in blocks and s not in extra:
                extra.append(s)
        order = list(range(m))
        rng.shuffle(order)
        family = blocks + extra
        sets = [None] * m
        for src, dst in enumerate(order):
            sets[dst] = family[src]
        inst = SetCoverInstance(n, tuple(sets))
        cover = tuple(sorted(order[:ell]))
        kernel = m - rank(incidence_matrix(inst))
        if k is not None and kernel != k:
            continue
        best = min_cover_size(inst)
        if best < ell:
            smaller = [c for c in combinations(range(m), best) if inst.is_exact_cover(c)]
            if not smaller:
                continue
            cover = smaller[0]
        return inst, cover
    raise ParameterError(f"no instance found for n={n}, m={m}, k={k} within {max_tries} tries")
