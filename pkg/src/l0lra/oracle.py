"""Exact solvers for small instances, used as ground truth.

``exact_rank1`` and ``min_over_patterns`` solve the rank-1 problem by two
unrelated searches so that each can check the other.
"""
from __future__ import annotations

from fractions import Fraction
from itertools import combinations, product

from .core import FactorPair, RationalMatrix, as_matrix, l0_error, rank, rref
from .csp import AlphabetMap, Assignment, mismatch_tables
from .errors import BudgetExhausted, ParameterError, ScaleError

RANK1_MAX_ENTRIES = 30
FINITE_ALPHABET_BUDGET = 10 ** 7


# ---------------------------------------------------------------------------
# Rank 1: depth-first search over keep/flag decisions.
#
# Kept nonzero entries link a row node to a column node; each connected
# component carries concrete values (u_i, w_j) fixed up to one scale, so a
# new edge inside a component is a cycle-product test. Kept zeros force
# u_i = 0 or w_j = 0, which only bites once one endpoint is known nonzero.


class _State:
    __slots__ = ("comp", "val", "forced_zero", "pending")

    def __init__(self, n):
        self.comp = [None] * n
        self.val = [None] * n
        self.forced_zero = [False] * n
        self.pending = [()] * n

    def copy(self):
        s = _State.__new__(_State)
        s.comp = self.comp[:]
        s.val = self.val[:]
        s.forced_zero = self.forced_zero[:]
        s.pending = self.pending[:]
        return s


def _merge(st: _State, x: int, y: int, a: Fraction, n_rows: int) -> _State:
    s = st.copy()
    cx, cy = s.comp[x], s.comp[y]
    if cx is None and cy is None:
        s.comp[x] = s.comp[y] = x
        s.val[x], s.val[y] = Fraction(1), a
    elif cy is None:
        s.comp[y] = cx
        s.val[y] = a / s.val[x]
    elif cx is None:
        s.comp[x] = cy
        s.val[x] = a / s.val[y]
    else:
        lam = s.val[x] * s.val[y] / a
        for z, c in enumerate(s.comp):
            if c == cy:
                s.comp[z] = cx
                s.val[z] = s.val[z] * lam if z < n_rows else s.val[z] / lam
    for z in (x, y):
        for p in s.pending[z]:
            s.forced_zero[p] = True
        s.pending[z] = ()
    return s


def _rank1_search(entries, n_rows, n_nodes, budget):
    def dfs(idx, left, st):
        if idx == len(entries):
            return st
        i, j, a = entries[idx]
        x, y = i, n_rows + j
        keep = None
        if a != 0:
            if st.forced_zero[x] or st.forced_zero[y]:
                pass
            elif st.comp[x] is not None and st.comp[x] == st.comp[y]:
                if st.val[x] * st.val[y] == a:
                    return dfs(idx + 1, left, st)
            else:
                keep = _merge(st, x, y, a, n_rows)
        else:
            if st.forced_zero[x] or st.forced_zero[y]:
                return dfs(idx + 1, left, st)
            nx, ny = st.comp[x] is not None, st.comp[y] is not None
            if not (nx and ny):
                keep = st.copy()
                if nx:
                    keep.forced_zero[y] = True
                elif ny:
                    keep.forced_zero[x] = True
                else:
                    keep.pending[x] = keep.pending[x] + (y,)
                    keep.pending[y] = keep.pending[y] + (x,)
        if keep is not None:
            r = dfs(idx + 1, left, keep)
            if r is not None:
                return r
        if left == 0:
            return None
        return dfs(idx + 1, left - 1, st)

    for t in range(budget + 1):
        st = dfs(0, t, _State(n_nodes))
        if st is not None:
            return st
    return None


def exact_rank1(A, max_entries: int | None = RANK1_MAX_ENTRIES, budget: int | None = None):
    """Optimal rank-1 approximation under the entry-count error.

    Searches flag sets by increasing size, so the first completion found
    is optimal. Returns ``(FactorPair, error)``.

    Raises:
        ScaleError: if the matrix has more than ``max_entries`` entries
            (pass ``max_entries=None`` to lift the guard).
        BudgetExhausted: if ``budget`` is given and the optimum exceeds it.
    """
    A = as_matrix(A)
    n_rows, n_cols = A.shape
    if max_entries is not None and n_rows * n_cols > max_entries:
        raise ScaleError(f"{n_rows}x{n_cols} exceeds the {max_entries}-entry guard")
    limit = n_rows * n_cols if budget is None else min(budget, n_rows * n_cols)
    st = _rank1_search(list(A.entries()), n_rows, n_rows + n_cols, limit)
    if st is None:
        raise BudgetExhausted(f"rank-1 optimum exceeds {limit}")
    u = [[st.val[i] if st.comp[i] is not None else Fraction(0)] for i in range(n_rows)]
    w = [[st.val[n_rows + j] if st.comp[n_rows + j] is not None else Fraction(0)]
         for j in range(n_cols)]
    pair = FactorPair(RationalMatrix(u, 1), RationalMatrix(w, 1))
    return pair, l0_error(A, pair.product())


# ---------------------------------------------------------------------------
# Pattern enumeration.
#
# A pattern is the set of flagged entries. For k = 1 a pattern is checked
# by the zero-structure rule plus fill-in closure on the nonzero part; when
# the check fails it returns an obstruction (kept entries that cannot all
# be kept), and the search branches on which of its entries to flag.


def _bit(i, j, n_cols):
    return 1 << (i * n_cols + j)


def _small_obstructions(A: RationalMatrix, kept: int) -> list:
    n_rows, n_cols = A.shape
    kept_at = [[(kept >> (i * n_cols + j)) & 1 for j in range(n_cols)] for i in range(n_rows)]
    obs = []
    for i in range(n_rows):
        for j in range(n_cols):
            if not kept_at[i][j] or A[i, j] != 0:
                continue
            row_nz = [j2 for j2 in range(n_cols) if kept_at[i][j2] and A[i, j2] != 0]
            col_nz = [i2 for i2 in range(n_rows) if kept_at[i2][j] and A[i2, j] != 0]
            for j2 in row_nz:
                for i2 in col_nz:
                    obs.append(_bit(i, j, n_cols) | _bit(i, j2, n_cols) | _bit(i2, j, n_cols))
    for i, i2 in combinations(range(n_rows), 2):
        for j, j2 in combinations(range(n_cols), 2):
            if not (kept_at[i][j] and kept_at[i][j2] and kept_at[i2][j] and kept_at[i2][j2]):
                continue
            a, b, c, d = A[i, j], A[i, j2], A[i2, j], A[i2, j2]
            if a and b and c and d and a * d != b * c:
                obs.append(_bit(i, j, n_cols) | _bit(i, j2, n_cols)
                           | _bit(i2, j, n_cols) | _bit(i2, j2, n_cols))
    return obs


def _closure(A: RationalMatrix, kept: int):
    """Fill-in closure of the kept nonzero entries.

    Returns ``(filled, None)`` where ``filled`` maps (i, j) to its forced
    value, or ``(None, obstruction)`` on a conflict.
    """
    n_rows, n_cols = A.shape
    known = {}
    for i, j, a in A.entries():
        if a != 0 and (kept >> (i * n_cols + j)) & 1:
            known[(i, j)] = (a, _bit(i, j, n_cols))
    changed = True
    while changed:
        changed = False
        items = list(known.items())
        for (i, j), (v1, m1) in items:
            for (i2, j2), (v2, m2) in items:
                if i2 == i or j2 == j or (i2, j) not in known:
                    continue
                v3, m3 = known[(i2, j)]
                val, mask = v1 * v2 / v3, m1 | m2 | m3
                cur = known.get((i, j2))
                if cur is None:
                    known[(i, j2)] = (val, mask)
                    changed = True
                elif cur[0] != val:
                    return None, cur[1] | mask
    return {ij: v for ij, (v, _) in known.items()}, None


def _rank1_witness(A: RationalMatrix, filled: dict) -> FactorPair:
    n_rows, n_cols = A.shape
    adj = {}
    for i, j in filled:
        adj.setdefault(("r", i), []).append(("c", j))
        adj.setdefault(("c", j), []).append(("r", i))
    u = [Fraction(0)] * n_rows
    w = [Fraction(0)] * n_cols
    seen = set()
    for start in sorted(adj):
        if start in seen or start[0] != "r":
            continue
        stack, comp = [start], []
        seen.add(start)
        while stack:
            node = stack.pop()
            comp.append(node)
            for nb in adj[node]:
                if nb not in seen:
                    seen.add(nb)
                    stack.append(nb)
        rows = sorted(i for s, i in comp if s == "r")
        cols = sorted(j for s, j in comp if s == "c")
        block = RationalMatrix([[filled[(i, j)] for j in cols] for i in rows], len(cols))
        if rank(block) != 1:
            raise AssertionError("closure left a component that is not rank 1")
        r0 = rows[0]
        for j in cols:
            w[j] = filled[(r0, j)]
        for i in rows:
            u[i] = filled[(i, cols[0])] / w[cols[0]]
    return FactorPair(RationalMatrix([[x] for x in u], 1), RationalMatrix([[x] for x in w], 1))


def _check_rank1_pattern(A: RationalMatrix, kept: int):
    obs = _small_obstructions(A, kept)
    if obs:
        return None, obs
    filled, conflict = _closure(A, kept)
    if conflict is not None:
        return None, [conflict]
    return _rank1_witness(A, filled), []


def _min_patterns_rank1(A: RationalMatrix, budget: int):
    n = A.n_rows * A.n_cols
    full = (1 << n) - 1
    for t in range(budget + 1):
        seen = set()

        def search(flags, used):
            pair, obs = _check_rank1_pattern(A, full & ~flags)
            if pair is not None:
                return pair
            obs.sort(key=lambda m: bin(m).count("1"))
            # Disjoint obstructions each need their own flag.
            covered, lower = 0, 0
            for m in obs:
                if not m & covered:
                    covered |= m
                    lower += 1
            if used + lower > t:
                return None
            rest = obs[0]
            while rest:
                b = rest & -rest
                rest ^= b
                nxt = flags | b
                if nxt in seen:
                    continue
                seen.add(nxt)
                found = search(nxt, used + 1)
                if found is not None:
                    return found
            return None

        pair = search(0, 0)
        if pair is not None:
            return t, pair
    return None, None


def _nonsingular_minors(A: RationalMatrix, size: int) -> list:
    n_rows, n_cols = A.shape
    out = []
    for rs in combinations(range(n_rows), size):
        for cs in combinations(range(n_cols), size):
            if rank(A.submatrix(rs, cs)) == size:
                m = 0
                for i in rs:
                    for j in cs:
                        m |= _bit(i, j, n_cols)
                out.append(m)
    return out


def _pivot_rows_complete(A: RationalMatrix, kept: int, k: int) -> bool:
    """Sufficient test: some <= k fully kept rows explain every other row on its kept entries."""
    n_rows, n_cols = A.shape

    def row_kept(i):
        return [j for j in range(n_cols) if (kept >> (i * n_cols + j)) & 1]

    full_rows = [i for i in range(n_rows) if len(row_kept(i)) == n_cols]
    for size in range(0, k + 1):
        for piv in combinations(full_rows, size):
            ok = True
            for i in range(n_rows):
                if i in piv:
                    continue
                js = row_kept(i)
                if not js:
                    continue
                eqs = [tuple(A[p, j] for p in piv) + (A[i, j],) for j in js]
                red, pivots = rref(eqs, size + 1)
                if pivots and pivots[-1] == size:
                    ok = False
                    break
            if ok:
                return True
    return False


def _kept_transpose(kept: int, n_rows: int, n_cols: int) -> int:
    out = 0
    for i in range(n_rows):
        for j in range(n_cols):
            if (kept >> (i * n_cols + j)) & 1:
                out |= 1 << (j * n_rows + i)
    return out


def min_over_patterns(A, k: int, budget: int):
    """Smallest number of flagged entries whose complement completes to rank <= k.

    Exact for k = 1. For k >= 2 the completability test is only
    sufficient (pivot rows or pivot columns), so the result is an upper
    bound on the optimum. Returns None when nothing within ``budget``
    flags works.
    """
    A = as_matrix(A)
    if k < 0 or budget < 0:
        raise ParameterError("k and budget must be nonnegative")
    n_rows, n_cols = A.shape
    n = n_rows * n_cols
    if rank(A) <= k:
        return 0
    if k == 0:
        nnz = sum(a != 0 for _, _, a in A.entries())
        return nnz if nnz <= budget else None
    if k == 1:
        return _min_patterns_rank1(A, budget)[0]
    minors = _nonsingular_minors(A, k + 1)
    full = (1 << n) - 1
    At = A.T
    for t in range(min(budget, n) + 1):
        for flagged in combinations(range(n), t):
            fl = 0
            for e in flagged:
                fl |= 1 << e
            if any(not (m & fl) for m in minors):
                continue
            kept = full & ~fl
            if _pivot_rows_complete(A, kept, k) or _pivot_rows_complete(
                    At, _kept_transpose(kept, n_rows, n_cols), k):
                return t
    return None


def minor_lower_bound(A, k: int, limit: int) -> int:
    """Certified lower bound on the rank-k optimum.

    Every nonsingular (k+1)x(k+1) submatrix needs at least one corrupted
    entry, so the minimum hitting set of those submatrices bounds the
    optimum from below. The hitting set search stops at ``limit`` and
    returns ``limit`` if it gets there.
    """
    A = as_matrix(A)
    if k >= min(A.shape):
        return 0
    minors = _nonsingular_minors(A, k + 1)
    if not minors:
        return 0

    seen = set()

    def hit(chosen: int, depth: int, t: int) -> bool:
        for m in minors:
            if not m & chosen:
                break
        else:
            return True
        if depth == t:
            return False
        rest = m
        while rest:
            b = rest & -rest
            rest ^= b
            nxt = chosen | b
            if nxt in seen:
                continue
            seen.add(nxt)
            if hit(nxt, depth + 1, t):
                return True
        return False

    for t in range(limit):
        seen.clear()
        if hit(0, 0, t):
            return t
    return limit


# ---------------------------------------------------------------------------


def exact_finite_alphabet(A, alphabets: AlphabetMap, budget: int = FINITE_ALPHABET_BUDGET):
    """Best assignment by exhaustive search.

    Once one side's choices are fixed the other side decouples, so only the
    side with fewer combinations is enumerated. Ties go to the
    lexicographically smallest (row choices, column choices).
    Returns ``(Assignment, error)``.
    """
    A = as_matrix(A)
    n_rows, n_cols = A.shape
    row_sizes = [len(a) for a in alphabets.row_alphabets]
    col_sizes = [len(a) for a in alphabets.col_alphabets]
    prod_rows, prod_cols = 1, 1
    for s in row_sizes:
        prod_rows *= s
    for s in col_sizes:
        prod_cols *= s
    if min(prod_rows, prod_cols) > budget:
        raise ScaleError(f"{min(prod_rows, prod_cols)} assignments exceed budget {budget}")
    tables = mismatch_tables(A, alphabets)
    best = None
    if prod_cols <= prod_rows:
        for cols in product(*(range(s) for s in col_sizes)):
            rows, cost = [], 0
            for p in range(n_rows):
                costs = [sum(int(tables[p][q][a, cols[q]]) for q in range(n_cols))
                         for a in range(row_sizes[p])]
                c = min(costs)
                rows.append(costs.index(c))
                cost += c
            key = (cost, tuple(rows), cols)
            if best is None or key < best:
                best = key
    else:
        for rows in product(*(range(s) for s in row_sizes)):
            cols, cost = [], 0
            for q in range(n_cols):
                costs = [sum(int(tables[p][q][rows[p], b]) for p in range(n_rows))
                         for b in range(col_sizes[q])]
                c = min(costs)
                cols.append(costs.index(c))
                cost += c
            key = (cost, rows, tuple(cols))
            if best is None or key < best:
                best = key
    cost, rows, cols = best
    return Assignment(tuple(rows), tuple(cols)), cost
