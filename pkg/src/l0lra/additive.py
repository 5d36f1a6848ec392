"""Additive-error scheme built on guessed supercores.

A supercore fixes a few rows R_S and columns C_S, a set E of entries among
them that the solution must reproduce exactly, and the linear matroid of
the row vectors and of the column vectors. Solving the core pins down those
vectors (up to a change of basis) and every other row then gets a short
alphabet of candidate vectors: for each small family of independent core
sets, the minimum-norm vector consistent with spanning and equality
constraints drawn from it. A finite-alphabet CSP over those alphabets
finishes the job.
"""
from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from fractions import Fraction
from itertools import combinations
from typing import Iterable, Sequence

from .core import (FactorPair, RationalMatrix, Subspace, as_matrix, dot, l0_error, nullspace,
                   rref, solve_min_norm, unit_vec, vec, zero_vec)
from .csp import DEFAULT_BUDGET, AlphabetMap, solve_additive
from .errors import DimensionError, ParameterError
from .matroid import MatroidDescriptor, enumerate_matroids

log = logging.getLogger(__name__)

KAPPA1_DEFAULT = 3
KAPPA1_CAP = 4


@dataclass(frozen=True)
class Supercore:
    rows: tuple
    cols: tuple
    edges: frozenset
    row_matroid: MatroidDescriptor
    col_matroid: MatroidDescriptor

    def __post_init__(self):
        if tuple(sorted(set(self.rows))) != tuple(self.rows) or \
                tuple(sorted(set(self.cols))) != tuple(self.cols):
            raise ParameterError("core rows and columns must be sorted and distinct")
        rs, cs = set(self.rows), set(self.cols)
        for i, j in self.edges:
            if i not in rs or j not in cs:
                raise ParameterError(f"edge {(i, j)} leaves the core")
        if self.row_matroid.ground_size != len(self.rows) or \
                self.col_matroid.ground_size != len(self.cols):
            raise ParameterError("matroid ground sets must match the core")

    def row_sets(self) -> list:
        """Independent row sets, as tuples of matrix row indices."""
        return [tuple(self.rows[p] for p in sorted(s)) for s in self.row_matroid.sorted_sets()]

    def col_sets(self) -> list:
        return [tuple(self.cols[p] for p in sorted(s)) for s in self.col_matroid.sorted_sets()]


@dataclass(frozen=True)
class ProjectionConstraints:
    """Linear side conditions ``row_map @ u_p = row_targets[p]`` (and likewise for columns).

    An empty map means no condition on that side.
    """

    k: int
    row_map: tuple = ()
    row_targets: tuple = ()
    col_map: tuple = ()
    col_targets: tuple = ()

    @classmethod
    def build(cls, k, row_map=(), row_targets=(), col_map=(), col_targets=()):
        rm = tuple(vec(r) for r in row_map)
        cm = tuple(vec(r) for r in col_map)
        for r in rm + cm:
            if len(r) != k:
                raise DimensionError("constraint rows must have length k")
        rt = tuple(vec(t) for t in row_targets) if rm else ()
        ct = tuple(vec(t) for t in col_targets) if cm else ()
        if any(len(t) != len(rm) for t in rt) or any(len(t) != len(cm) for t in ct):
            raise DimensionError("constraint targets must match the map height")
        return cls(k, rm, rt, cm, ct)

    def row_system(self, p: int):
        if not self.row_map:
            return [], []
        return list(self.row_map), list(self.row_targets[p])

    def col_system(self, q: int):
        if not self.col_map:
            return [], []
        return list(self.col_map), list(self.col_targets[q])

    @property
    def trivial(self) -> bool:
        return not self.row_map and not self.col_map

    def satisfied(self, pair: FactorPair) -> bool:
        for p, u in enumerate(pair.U.rows):
            rows, rhs = self.row_system(p)
            if any(dot(r, u) != b for r, b in zip(rows, rhs)):
                return False
        for q, w in enumerate(pair.W.rows):
            rows, rhs = self.col_system(q)
            if any(dot(r, w) != b for r, b in zip(rows, rhs)):
                return False
        return True


# ---------------------------------------------------------------------------
# Enumeration


def supercore_count(n_rows: int, n_cols: int, kappa1: int, k: int) -> int:
    """Size of the exhaustive supercore family, from the closed-form product."""
    total = 0
    for r in range(min(kappa1, n_rows) + 1):
        for c in range(min(kappa1, n_cols) + 1):
            total += (math.comb(n_rows, r) * math.comb(n_cols, c) * 2 ** (r * c)
                      * len(enumerate_matroids(r, k)) * len(enumerate_matroids(c, k)))
    return total


def enumerate_supercores(n_rows: int, n_cols: int, k: int, kappa1: int = KAPPA1_DEFAULT,
                         mode: str = "exhaustive", hints: Iterable | None = None):
    """Yield candidate supercores.

    ``exhaustive`` walks every core with at most ``kappa1`` rows and columns,
    every edge set and every pair of rank-<=k matroids (capped at
    ``KAPPA1_CAP``). ``hinted`` yields the supplied hints after validation.
    """
    if mode == "hinted":
        for sc in hints or ():
            if not isinstance(sc, Supercore):
                raise ParameterError("hints must be Supercore objects")
            if any(i >= n_rows for i in sc.rows) or any(j >= n_cols for j in sc.cols):
                raise ParameterError("hinted core leaves the matrix")
            yield sc
        return
    if mode != "exhaustive":
        raise ParameterError(f"unknown mode {mode!r}")
    if not 0 <= kappa1 <= KAPPA1_CAP:
        raise ParameterError(f"kappa1 must lie in [0, {KAPPA1_CAP}]")
    for r in range(min(kappa1, n_rows) + 1):
        for c in range(min(kappa1, n_cols) + 1):
            row_ms = enumerate_matroids(r, k)
            col_ms = enumerate_matroids(c, k)
            for rows in combinations(range(n_rows), r):
                for cols in combinations(range(n_cols), c):
                    cells = [(i, j) for i in rows for j in cols]
                    for mask in range(1 << len(cells)):
                        edges = frozenset(cells[t] for t in range(len(cells)) if mask >> t & 1)
                        for mr in row_ms:
                            for mc in col_ms:
                                yield Supercore(rows, cols, edges, mr, mc)


# ---------------------------------------------------------------------------
# Solving the core


class _Var:
    """An unknown vector held as the solution set of its linear constraints."""

    __slots__ = ("k", "rows", "rhs", "value")

    def __init__(self, k):
        self.k = k
        self.rows, self.rhs = [], []
        self.value = None

    def add(self, row, b) -> bool:
        self.rows.append(tuple(row))
        self.rhs.append(Fraction(b))
        return self.refresh()

    def refresh(self) -> bool:
        aug = [r + (b,) for r, b in zip(self.rows, self.rhs)]
        red, piv = rref(aug, self.k + 1)
        if piv and piv[-1] == self.k:
            return False
        if len(red) == self.k:
            self.value = tuple(r[self.k] for r in red)
        return True

    def fill(self, generic: bool):
        """Fix the remaining freedom: minimum norm, or a generic point of the solution set."""
        x0 = solve_min_norm(self.rows, self.rhs, self.k)
        if generic:
            for t, n in enumerate(nullspace(self.rows, self.k) if self.rows else
                                  [unit_vec(self.k, i) for i in range(self.k)]):
                x0 = tuple(a + (t + 2) * b for a, b in zip(x0, n))
        self.value = x0


def _propagate(us: dict, ws: dict, edges, A) -> bool:
    """Turn bilinear equations into linear ones whenever one side is known."""
    pending = set(edges)
    progress = True
    while progress:
        progress = False
        for i, j in sorted(pending):
            u, w = us[i], ws[j]
            if u.value is not None and w.value is not None:
                if dot(u.value, w.value) != A[i, j]:
                    return False
                pending.discard((i, j))
                progress = True
            elif u.value is not None:
                if not w.add(u.value, A[i, j]):
                    return False
                pending.discard((i, j))
                progress = True
            elif w.value is not None:
                if not u.add(w.value, A[i, j]):
                    return False
                pending.discard((i, j))
                progress = True
    return True


def _fundamental_circuit(m: MatroidDescriptor, basis: tuple, e: int) -> tuple:
    """Smallest subset C of ``basis`` with C + e dependent (the circuit minus e)."""
    for r in range(len(basis) + 1):
        for c in combinations(basis, r):
            if not m.is_independent(set(c) | {e}):
                return c
    return tuple(basis)


def _assign_extras(ws: list, m: MatroidDescriptor, r: int, k: int):
    """Use coordinates r..k-1 (invisible to the core rows) to realize the column matroid."""
    if r >= k or not ws:
        return ws
    basis = m.first_basis()
    ws = [list(w) for w in ws]
    used = r
    chosen = []
    for b in basis:
        if not _indep([ws[x] for x in chosen] + [ws[b]], k):
            if used >= k:
                return None
            ws[b][used] = Fraction(1)
            used += 1
        chosen.append(b)
    for e in range(len(ws)):
        if e in basis:
            continue
        circ = _fundamental_circuit(m, basis, e)
        if not circ:
            ws[e] = [Fraction(0)] * k
            continue
        eqs = [tuple(ws[b][t] for b in circ) for t in range(r)]
        coeff = solve_min_norm(eqs, ws[e][:r], len(circ)) if r else zero_vec(len(circ))
        if coeff is None:
            return None
        for t in range(r, k):
            ws[e][t] = sum((c * ws[b][t] for c, b in zip(coeff, circ)), Fraction(0))
    return [tuple(w) for w in ws]


def _indep(vs, k) -> bool:
    return len(rref(vs, k)[0]) == len(vs)


def _matroid_of(vectors: list) -> MatroidDescriptor:
    return MatroidDescriptor.from_vectors(vectors) if vectors else MatroidDescriptor(0, frozenset({frozenset()}))


def _rigid_linear(A, sc: Supercore, cons: ProjectionConstraints, k: int):
    us = {i: _Var(k) for i in sc.rows}
    ws = {j: _Var(k) for j in sc.cols}
    for p, i in enumerate(sc.rows):
        rows, rhs = cons.row_system(i)
        for r, b in zip(rows, rhs):
            if not us[i].add(r, b):
                return None
    for q, j in enumerate(sc.cols):
        rows, rhs = cons.col_system(j)
        for r, b in zip(rows, rhs):
            if not ws[j].add(r, b):
                return None
    normalized = cons.trivial
    r = sc.row_matroid.rank
    if normalized:
        # Change of basis: the first row basis becomes e_1..e_r, every other
        # core row lives on the coordinates of its fundamental circuit.
        basis = sc.row_matroid.first_basis()
        pos = {b: t for t, b in enumerate(basis)}
        for p, i in enumerate(sc.rows):
            if p in pos:
                for t in range(k):
                    us[i].add(unit_vec(k, t), int(t == pos[p]))
            else:
                circ = {pos[b] for b in _fundamental_circuit(sc.row_matroid, basis, p)}
                for t in range(k):
                    if t not in circ:
                        us[i].add(unit_vec(k, t), 0)
        # Coordinates past r never meet a core row; park them at zero for now.
        for j in sc.cols:
            for t in range(r, k):
                ws[j].add(unit_vec(k, t), 0)
    for m, side in ((sc.row_matroid, [us[i] for i in sc.rows]),
                    (sc.col_matroid, [ws[j] for j in sc.cols])):
        for p, var in enumerate(side):
            if not m.is_independent({p}):
                for t in range(k):
                    if not var.add(unit_vec(k, t), 0):
                        return None
    if not _propagate(us, ws, sc.edges, A):
        return None
    for generic in (False, True):
        trial_u = {i: _clone(v) for i, v in us.items()}
        trial_w = {j: _clone(v) for j, v in ws.items()}
        ok = True
        while ok:
            free = [v for v in list(trial_u.values()) + list(trial_w.values()) if v.value is None]
            if not free:
                break
            free[0].fill(generic)
            ok = _propagate(trial_u, trial_w, sc.edges, A)
        if not ok:
            continue
        U = [trial_u[i].value for i in sc.rows]
        W = [trial_w[j].value for j in sc.cols]
        if normalized and sc.col_matroid.rank > r:
            W = _assign_extras(W, sc.col_matroid, r, k)
            if W is None:
                continue
        if _matroid_of(U) == sc.row_matroid and _matroid_of(W) == sc.col_matroid:
            return dict(zip(sc.rows, U)), dict(zip(sc.cols, W))
    return None


def _clone(v: _Var) -> _Var:
    c = _Var(v.k)
    c.rows, c.rhs, c.value = list(v.rows), list(v.rhs), v.value
    return c


def _numeric(A, sc: Supercore, cons: ProjectionConstraints, k: int, starts: int = 8):
    import numpy as np
    from scipy.optimize import least_squares

    nr, nc = len(sc.rows), len(sc.cols)
    ri = {i: t for t, i in enumerate(sc.rows)}
    ci = {j: t for t, j in enumerate(sc.cols)}
    edges = sorted(sc.edges)

    def residual(x):
        U = x[:nr * k].reshape(nr, k)
        W = x[nr * k:].reshape(nc, k)
        res = [U[ri[i]] @ W[ci[j]] - float(A[i, j]) for i, j in edges]
        for i in sc.rows:
            for row, b in zip(*cons.row_system(i)):
                res.append(np.dot([float(a) for a in row], U[ri[i]]) - float(b))
        for j in sc.cols:
            for row, b in zip(*cons.col_system(j)):
                res.append(np.dot([float(a) for a in row], W[ci[j]]) - float(b))
        return np.array(res if res else [0.0])

    rng = np.random.default_rng(0)
    for _ in range(starts):
        x0 = rng.integers(-3, 4, size=(nr + nc) * k).astype(float)
        sol = least_squares(residual, x0, method="lm" if residual(x0).size >= x0.size else "trf")
        cand = [Fraction(float(v)).limit_denominator(64) for v in sol.x]
        U = [tuple(cand[t * k:(t + 1) * k]) for t in range(nr)]
        W = [tuple(cand[nr * k + t * k: nr * k + (t + 1) * k]) for t in range(nc)]
        if all(dot(U[ri[i]], W[ci[j]]) == A[i, j] for i, j in edges) and \
                _matroid_of(U) == sc.row_matroid and _matroid_of(W) == sc.col_matroid:
            pair = FactorPair(RationalMatrix(U, k), RationalMatrix(W, k))
            sub = ProjectionConstraints.build(
                k, cons.row_map, [cons.row_targets[i] for i in sc.rows] if cons.row_map else (),
                cons.col_map, [cons.col_targets[j] for j in sc.cols] if cons.col_map else ())
            if sub.satisfied(pair):
                return dict(zip(sc.rows, U)), dict(zip(sc.cols, W))
    return None


def solve_core_system(A, supercore: Supercore, constraints: ProjectionConstraints | None = None,
                      backend: str = "rigid-linear", k: int | None = None):
    """Vectors for the core rows and columns meeting E, the matroids and the constraints.

    ``rigid-linear`` fixes a row basis to unit vectors (when no projection
    constraints pin the frame) and then only ever solves linear systems,
    propagating each solved vector into the equations it touches.
    ``numeric`` runs damped least squares and keeps the answer only if its
    rational rounding verifies exactly. Returns ``(row_vectors,
    col_vectors)`` as dicts keyed by matrix index, or None.
    """
    A = as_matrix(A)
    if k is None:
        k = constraints.k if constraints is not None else max(
            supercore.row_matroid.rank, supercore.col_matroid.rank, 1)
    cons = constraints or ProjectionConstraints(k)
    if supercore.row_matroid.rank > k or supercore.col_matroid.rank > k:
        return None
    if backend == "rigid-linear":
        return _rigid_linear(A, supercore, cons, k)
    if backend == "numeric":
        return _numeric(A, supercore, cons, k)
    if backend == "auto":
        return _rigid_linear(A, supercore, cons, k) or _numeric(A, supercore, cons, k)
    raise ParameterError(f"unknown backend {backend!r}")


# ---------------------------------------------------------------------------
# Alphabets


def _span_families(sets: list, vectors: dict, k: int, max_sets: int) -> dict:
    """Intersections of spans of up to ``max_sets`` independent core sets.

    Maps each distinct intersection (by basis) to (subspace, sets used),
    keeping the smallest count. No set at all means no spanning condition.
    """
    spans = []
    for s in sets:
        S = Subspace.span([vectors[x] for x in s], k)
        if S not in spans:
            spans.append(S)
    full = Subspace.full(k)
    out = {full.basis: (full, 0)}
    frontier = [full]
    for used in range(1, max_sets + 1):
        nxt = []
        for S in frontier:
            for T in spans:
                X = S.intersect(T)
                if X.basis not in out:
                    out[X.basis] = (X, used)
                    nxt.append(X)
        frontier = nxt
    return out


def _union_families(sets: list, max_sets: int) -> dict:
    out = {frozenset(): 0}
    frontier = [frozenset()]
    for used in range(1, max_sets + 1):
        nxt = []
        for S in frontier:
            for s in sets:
                X = S | frozenset(s)
                if X not in out:
                    out[X] = used
                    nxt.append(X)
        frontier = nxt
    return out


def _side_alphabets(n: int, core: dict, other_core: dict, span_sets: list, eq_sets: list,
                    k: int, value, system, max_sets: int):
    spans = _span_families(span_sets, core, k, max_sets)
    unions = _union_families(eq_sets, max_sets)
    combos = [(S, J) for S, a in spans.values() for J, b in unions.items() if a + b <= max_sets]
    combos.sort(key=lambda c: (c[0].dim, c[0].basis, sorted(c[1])))
    alphabets, padded = [], []
    for p in range(n):
        if p in core:
            alphabets.append([core[p]])
            continue
        crow, crhs = system(p)
        found = []
        for S, J in combos:
            rows = list(crow) + [tuple(c) for c in S.complement_basis()]
            rhs = list(crhs) + [Fraction(0)] * (k - S.dim)
            for x in sorted(J):
                rows.append(other_core[x])
                rhs.append(value(p, x))
            sol = solve_min_norm(rows, rhs, k)
            if sol is not None:
                found.append(sol)
        if not found:
            fallback = solve_min_norm(crow, crhs, k)
            found = [fallback if fallback is not None else zero_vec(k)]
            padded.append(p)
        alphabets.append(found)
    return alphabets, padded


@dataclass
class AlphabetBuild:
    alphabets: AlphabetMap
    padded_rows: list = field(default_factory=list)
    padded_cols: list = field(default_factory=list)


def build_alphabets(A, supercore: Supercore, core_solution, constraints=None, k=None) -> AlphabetBuild:
    """Candidate vectors for every row and column from a solved core.

    Core rows and columns get their solved vector alone. Any other row p
    gets, for each family of at most 2k independent core sets, the
    minimum-norm u_p lying in the span of the row sets' vectors and
    matching A[p, q] on the column sets (plus any projection constraint).
    """
    A = as_matrix(A)
    us, ws = core_solution
    if k is None:
        k = len(next(iter(us.values()))) if us else (len(next(iter(ws.values()))) if ws else 1)
    cons = constraints or ProjectionConstraints(k)
    row_sets, col_sets = supercore.row_sets(), supercore.col_sets()
    rows, pr = _side_alphabets(A.n_rows, us, ws, row_sets, col_sets, k,
                               lambda p, q: A[p, q], cons.row_system, 2 * k)
    cols, pc = _side_alphabets(A.n_cols, ws, us, col_sets, row_sets, k,
                               lambda q, p: A[p, q], cons.col_system, 2 * k)
    return AlphabetBuild(AlphabetMap.build(k, rows, cols), pr, pc)


def additive_alphabets(A, k: int, supercores: Iterable, constraints=None,
                       backend: str = "rigid-linear"):
    """Yield ``(supercore, AlphabetBuild)`` for every supercore whose core system solves."""
    for sc in supercores:
        sol = solve_core_system(A, sc, constraints, backend, k)
        if sol is not None:
            yield sc, build_alphabets(A, sc, sol, constraints, k)


# ---------------------------------------------------------------------------
# Driver


@dataclass(frozen=True)
class Solution:
    pair: FactorPair
    error: int
    flags: tuple = ()
    detail: dict = field(default_factory=dict, compare=False, hash=False)


def run_additive(A, k: int, eps, constraints: ProjectionConstraints | None = None,
                 mode: str = "hinted", seed: int = 0, hints=None, kappa1: int = KAPPA1_DEFAULT,
                 budget: int = DEFAULT_BUDGET, max_supercores: int | None = None,
                 backend: str = "rigid-linear") -> Solution:
    """Best factorization over the supercores of ``mode``; the error is recomputed from the output."""
    A = as_matrix(A)
    eps = Fraction(eps)
    if not 0 < eps <= 1:
        raise ParameterError("eps must lie in (0, 1]")
    flags = []
    cores = enumerate_supercores(A.n_rows, A.n_cols, k, kappa1, mode, hints)
    best, tried, solved = None, 0, 0
    for sc in cores:
        if max_supercores is not None and tried >= max_supercores:
            flags.append("budget-exhausted")
            break
        tried += 1
        sol = solve_core_system(A, sc, constraints, backend, k)
        if sol is None:
            continue
        solved += 1
        built = build_alphabets(A, sc, sol, constraints, k)
        assignment = solve_additive(A, built.alphabets, eps, seed, budget)
        pair = assignment.to_pair(built.alphabets)
        err = l0_error(A, pair.product())
        if best is None or err < best[0]:
            best = (err, pair, sc, assignment.notes, built)
    if best is None:
        flags.append("no-feasible-supercore")
        pair = FactorPair(RationalMatrix.zeros(A.n_rows, k), RationalMatrix.zeros(A.n_cols, k))
        return Solution(pair, l0_error(A, pair.product()), tuple(flags),
                        {"tried": tried, "solved": 0})
    err, pair, sc, notes, built = best
    if notes:
        flags.append("sample-trimmed")
    if built.padded_rows or built.padded_cols:
        flags.append("alphabet-padded")
    return Solution(pair, err, tuple(flags), {"tried": tried, "solved": solved, "supercore": sc})


# ---------------------------------------------------------------------------
# Hints from a known solution


def agreement(A, pair: FactorPair) -> set:
    B = pair.product()
    return {(i, j) for i, j, a in A.entries() if B[i, j] == a}


def hinted_supercores(A, pair: FactorPair, constraints: ProjectionConstraints | None = None,
                      rows: Sequence[int] | None = None, cols: Sequence[int] | None = None) -> list:
    """Supercores that a known near-optimal solution certifies.

    Picks core rows forming a basis of the solution's row vectors and core
    columns forming a basis of its column vectors such that the solution
    agrees with A on the whole core block; the least-corrupted lines are
    preferred. ``rows``/``cols`` restrict where the core may sit.
    """
    A = as_matrix(A)
    k = pair.k
    G = agreement(A, pair)
    U, W = pair.U.rows, pair.W.rows
    cons = constraints or ProjectionConstraints(k)

    def ok_row(i):
        r, b = cons.row_system(i)
        return all(dot(x, U[i]) == y for x, y in zip(r, b))

    def ok_col(j):
        r, b = cons.col_system(j)
        return all(dot(x, W[j]) == y for x, y in zip(r, b))

    row_pool = [i for i in (rows if rows is not None else range(A.n_rows)) if ok_row(i)]
    col_pool = [j for j in (cols if cols is not None else range(A.n_cols)) if ok_col(j)]
    bad_r = {i: sum((i, j) not in G for j in range(A.n_cols)) for i in row_pool}
    bad_c = {j: sum((i, j) not in G for i in range(A.n_rows)) for j in col_pool}
    row_pool.sort(key=lambda i: (bad_r[i], i))
    col_pool.sort(key=lambda j: (bad_c[j], j))
    r_target = len(rref([U[i] for i in row_pool], k)[0]) if row_pool else 0
    c_target = len(rref([W[j] for j in col_pool], k)[0]) if col_pool else 0

    def greedy(pool, vecs, target, accept):
        chosen = []
        for x in pool:
            if len(chosen) == target:
                break
            if accept(x) and _indep([vecs[y] for y in chosen] + [vecs[x]], k):
                chosen.append(x)
        return chosen if len(chosen) == target else None

    out = []
    for start in range(len(row_pool)):
        R = greedy(row_pool[start:] + row_pool[:start], U, r_target, lambda i: True)
        if R is None:
            continue
        C = greedy(col_pool, W, c_target, lambda j: all((i, j) in G for i in R))
        if C is None:
            continue
        R, C = tuple(sorted(R)), tuple(sorted(C))
        sc = Supercore(R, C, frozenset((i, j) for i in R for j in C),
                       _matroid_of([U[i] for i in R]), _matroid_of([W[j] for j in C]))
        out.append(sc)
        break
    return out


# ---------------------------------------------------------------------------
# Combinatorial helpers


def count_bicliques(adj: Sequence[Iterable[int]], a: int, b: int, n_right: int | None = None) -> int:
    """Number of K_{a,b} subgraphs with a vertices on the left and b on the right.

    ``adj[x]`` lists the right neighbours of left vertex x. Subsets are
    enumerated on whichever side gives fewer of them.
    """
    if a < 0 or b < 0:
        raise ParameterError("biclique sides must be nonnegative")
    left = [frozenset(s) for s in adj]
    if n_right is None:
        n_right = 1 + max((max(s) for s in left if s), default=-1)
    right = [frozenset(x for x, s in enumerate(left) if y in s) for y in range(n_right)]
    if math.comb(len(left), a) <= math.comb(n_right, b):
        side, other, small, big = left, n_right, a, b
    else:
        side, other, small, big = right, len(left), b, a
    total = 0
    universe = frozenset(range(other))
    for combo in combinations(range(len(side)), small):
        common = universe
        for x in combo:
            common &= side[x]
        total += math.comb(len(common), big)
    return total


def lemma_linear_check(M1, M2, a, b, u1, w1, u2, w2) -> bool:
    """Inner products are pinned down by the linear data.

    If M1 u = a, M2 w = b, u lies in the row space of M2 and w in the row
    space of M1 (for both pairs), then <u1, w1> = <u2, w2>. Preconditions
    are checked and raise ParameterError when they fail.
    """
    M1, M2 = as_matrix(M1), as_matrix(M2)
    a, b = vec(a), vec(b)
    u1, w1, u2, w2 = map(vec, (u1, w1, u2, w2))
    k = M1.n_cols
    if M2.n_cols != k or any(len(v) != k for v in (u1, w1, u2, w2)):
        raise DimensionError("all vectors must live in the same space")
    span1 = Subspace.span(M1.rows, k)
    span2 = Subspace.span(M2.rows, k)
    for u in (u1, u2):
        if tuple(dot(r, u) for r in M1.rows) != a:
            raise ParameterError("M1 u != a")
        if not span2.contains(u):
            raise ParameterError("u is outside the row space of M2")
    for w in (w1, w2):
        if tuple(dot(r, w) for r in M2.rows) != b:
            raise ParameterError("M2 w != b")
        if not span1.contains(w):
            raise ParameterError("w is outside the row space of M1")
    return dot(u1, w1) == dot(u2, w2)
