"""Multiplicative-error pipeline.

Rows and columns of an (unknown) optimal factorization are split into
layers (see ``l0lra.layers``); each row-layer x column-layer block is
classified by its size against the optimum. Large ("clean") blocks are
recovered by voting on samples, medium ("half-clean") groups of blocks go
through the additive scheme with projection constraints, and a final
sample-and-vote pass assembles the answer.

Everything the algorithm would guess comes from a ``GuessProvider``:
``PlantedHints`` reads the guesses off a known solution, while
``ExhaustiveGuesses`` enumerates them (tiny instances only).
"""
from __future__ import annotations

import logging
import math
import random
from dataclasses import dataclass, field
from fractions import Fraction
from itertools import combinations, product
from typing import Callable, Iterator

import numpy as np

from .additive import (ProjectionConstraints, Solution, additive_alphabets,
                       enumerate_supercores, hinted_supercores, supercore_count)
from .core import (FactorPair, RationalMatrix, Subspace, as_matrix, dot, inverse, l0_error,
                   project, rref, unit_vec, zero_vec)
from .csp import Assignment, AlphabetMap, _batch_greedy, _integer_weights, mismatch_tables
from .errors import ParameterError, ScaleError
from .layers import LayerDecomposition, decompose
from .voting import VoteInput, tau_good, vote

log = logging.getLogger(__name__)

T0_CAP = 20
REFINE_TOP = 4
FLOOR = Fraction(1, 1000)


# ---------------------------------------------------------------------------
# Parameters


def _ceil(x: float) -> int:
    return int(math.ceil(x - 1e-12))


@dataclass(frozen=True)
class ParamSet:
    k: int
    eps0: Fraction
    delta0: Fraction
    delta1: Fraction
    tau: Fraction
    t0: int
    eps1: Fraction
    delta2: Fraction
    eps2: Fraction
    overrides: tuple = ()

    @classmethod
    def from_defaults(cls, k: int, eps0, t0_cap: int = T0_CAP, floor=FLOOR, **overrides) -> "ParamSet":
        """Default schedule; any field can be pinned through ``overrides``.

        Dependent values are derived after overrides apply, so pinning t0
        also moves eps1 and delta2 unless those are pinned as well.
        """
        if k < 1:
            raise ParameterError("k must be at least 1")
        eps0 = Fraction(eps0)
        if not 0 < eps0 <= 1:
            raise ParameterError("eps0 must lie in (0, 1]")
        unknown = set(overrides) - {"delta0", "delta1", "tau", "t0", "eps1", "delta2", "eps2"}
        if unknown:
            raise ParameterError(f"unknown parameters {sorted(unknown)}")
        floor = Fraction(floor)

        def pick(name, default):
            return Fraction(overrides[name]) if name in overrides else default

        delta0 = pick("delta0", Fraction(1, 20 * k))
        delta1 = pick("delta1", eps0 / 100)
        tau = pick("tau", eps0 * delta0 / 100)
        if "t0" in overrides:
            t0 = int(overrides["t0"])
        else:
            t0 = min(t0_cap, max(_ceil(b) for b in _t0_bounds(k, eps0, delta0, delta1, tau)))
        eps1 = pick("eps1", max(floor, min(delta1 / (4 * k * k * t0 * t0), eps0 / (100 * k * k))))
        delta2 = pick("delta2", max(floor, min(eps1 * eps1 / 2, eps0 * delta0 / 100)))
        eps2 = pick("eps2", Fraction(1, 10))
        for name, v in (("delta0", delta0), ("delta1", delta1), ("tau", tau), ("eps1", eps1),
                        ("delta2", delta2), ("eps2", eps2)):
            if not 0 < v < 1:
                raise ParameterError(f"{name} must lie in (0, 1)")
        if t0 < 1:
            raise ParameterError("t0 must be positive")
        return cls(k, eps0, delta0, delta1, tau, t0, eps1, delta2, eps2, tuple(sorted(overrides)))

    def violations(self) -> tuple:
        """Names of the parameter constraints this set breaks."""
        k, out = self.k, []
        b_sample, b_tau, b_vote = _t0_bounds(k, self.eps0, self.delta0, self.delta1, self.tau)
        if self.t0 < b_sample:
            out.append("t0-sampling-bound")
        if self.t0 < b_tau:
            out.append("t0-tau-bound")
        if self.t0 < b_vote:
            out.append("t0-vote-bound")
        if self.eps1 * k * k * self.t0 * self.t0 > self.delta1 / 4:
            out.append("eps1-vs-t0")
        if k * k * self.eps1 > self.eps0 / 100:
            out.append("eps1-vs-eps0")
        if not self.delta2 < self.eps1 * self.eps1:
            out.append("delta2-vs-eps1")
        if self.delta2 / self.delta0 > self.eps0 / 100:
            out.append("delta2-vs-delta0")
        if not self.tau < self.delta0 / 100:
            out.append("tau-vs-delta0")
        if not self.composite_ok():
            out.append("composite-ratio")
        return tuple(out)

    def composite_ok(self) -> bool:
        k = self.k
        f = float
        # k eps2 / (delta2^(k^2) eps1^k), in log space to dodge overflow.
        log_term = math.log(k * f(self.eps2)) - k * k * math.log(f(self.delta2)) - k * math.log(f(self.eps1))
        if log_term > 700:
            return False
        total = (1 + f(self.eps0) / 8 + f(self.tau / self.delta0) + f(self.delta2 / self.delta0)
                 + math.exp(log_term) + k * k * f(self.eps1)) * (1 + 4 * f(self.delta1))
        return total <= 1 + f(self.eps0)


def _t0_bounds(k, eps0, delta0, delta1, tau):
    f = float
    return (
        2 * k * k * math.log(1 / f(delta1)) / f(delta0),
        k / f(tau) ** 2 * math.log(1 / f(tau)) + math.log(1 / f(delta1)),
        k / f(delta0 * eps0),
    )


# ---------------------------------------------------------------------------
# Blocks


@dataclass(frozen=True)
class Hyperblock:
    row_layers: tuple
    col_layers: tuple
    label: str


@dataclass(frozen=True)
class BlockStructure:
    """Classification of layer blocks. Layer indices are 0-based; ``m_row[i]``
    counts the column layers (a prefix) whose block with row layer i sits in a
    clean hyperblock, and ``br_row[i]`` is the last row layer with the same count."""

    row_sizes: tuple
    col_sizes: tuple
    labels: tuple
    row_superlayers: tuple
    col_superlayers: tuple
    hyperblocks: tuple
    m_row: tuple
    br_row: tuple
    m_col: tuple
    br_col: tuple

    def half_clean(self) -> list:
        return [h for h in self.hyperblocks if h.label == "half_clean"]


def _superlayers(sizes, delta2) -> tuple:
    groups, cur = [], []
    for j, n in enumerate(sizes):
        if cur and n < delta2 * sizes[j - 1]:
            groups.append(tuple(cur))
            cur = []
        cur.append(j)
    if cur:
        groups.append(tuple(cur))
    return tuple(groups)


def classify_blocks(row_sizes, col_sizes, opt_guess, params: ParamSet) -> BlockStructure:
    """Label blocks clean / dirty / half-clean and group them into hyperblocks."""
    opt = Fraction(opt_guess)
    if opt < 0:
        raise ParameterError("the optimum guess must be nonnegative")
    e1 = params.eps1

    def label(n, m):
        size = n * m
        if size > opt / e1:
            return "clean"
        if size < e1 * opt:
            return "dirty"
        return "half_clean"

    labels = tuple(tuple(label(n, m) for m in col_sizes) for n in row_sizes)
    rs, cs = _superlayers(row_sizes, params.delta2), _superlayers(col_sizes, params.delta2)

    def super_label(R, C):
        got = {labels[i][j] for i in R for j in C}
        return got.pop() if len(got) == 1 and got != {"half_clean"} else "half_clean"

    half = [(a, b) for a in range(len(rs)) for b in range(len(cs)) if super_label(rs[a], cs[b]) == "half_clean"]
    parent = {x: x for x in half}

    def find(x):
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    for x, y in combinations(half, 2):
        if x[0] == y[0] or x[1] == y[1]:
            parent[find(x)] = find(y)
    comps = {}
    for x in half:
        comps.setdefault(find(x), []).append(x)
    comp_list = sorted(comps.values(), key=lambda c: min(c))
    row_groups, col_groups = [], []
    used_r, used_c = set(), set()
    halves = []
    for comp in comp_list:
        ra = sorted({a for a, _ in comp})
        cb = sorted({b for _, b in comp})
        rg = tuple(i for a in ra for i in rs[a])
        cg = tuple(j for b in cb for j in cs[b])
        used_r.update(ra)
        used_c.update(cb)
        row_groups.append(rg)
        col_groups.append(cg)
        halves.append((rg, cg))
    row_groups += [rs[a] for a in range(len(rs)) if a not in used_r]
    col_groups += [cs[b] for b in range(len(cs)) if b not in used_c]
    row_groups.sort()
    col_groups.sort()
    hyper = []
    for rg in row_groups:
        for cg in col_groups:
            if (rg, cg) in halves:
                lab = "half_clean"
            else:
                got = {labels[i][j] for i in rg for j in cg}
                lab = got.pop() if len(got) == 1 else "mixed"
                if lab == "half_clean":
                    lab = "mixed"
            hyper.append(Hyperblock(rg, cg, lab))
    clean = {(i, j) for h in hyper if h.label == "clean" for i in h.row_layers for j in h.col_layers}
    m_row = tuple(1 + max((j for j in range(len(col_sizes)) if (i, j) in clean), default=-1)
                  for i in range(len(row_sizes)))
    m_col = tuple(1 + max((i for i in range(len(row_sizes)) if (i, j) in clean), default=-1)
                  for j in range(len(col_sizes)))
    br_row = tuple(max(t for t in range(len(m_row)) if m_row[t] == m_row[i]) for i in range(len(m_row)))
    br_col = tuple(max(t for t in range(len(m_col)) if m_col[t] == m_col[j]) for j in range(len(m_col)))
    return BlockStructure(tuple(row_sizes), tuple(col_sizes), labels, rs, cs, tuple(hyper),
                          m_row, br_row, m_col, br_col)


# ---------------------------------------------------------------------------
# Subspace bookkeeping


def prefix_space(spaces, m: int, k: int) -> Subspace:
    """Subspace of the first m layers (the zero space when m = 0)."""
    return spaces[m - 1] if m > 0 else Subspace.zero(k)


def cross_space(onto: Subspace, other: Subspace) -> Subspace:
    """Orthogonal projection of ``other`` onto ``onto``."""
    return Subspace.span([project(b, onto) for b in other.basis], onto.ambient_dim)


def claim_clean_check(u, w, row_spaces, col_spaces, i_br: int, m_i: int, j_br: int, m_j: int) -> bool:
    """For u in the row chain at ``i_br`` and w in the column chain at ``j_br``,
    with i_br < m_j and j_br < m_i, check that <u, w> equals the inner
    product of u's projection into the clean row space and w's projection
    into the clean column space. Preconditions raise ParameterError."""
    u, w = tuple(map(Fraction, u)), tuple(map(Fraction, w))
    k = len(u)
    for chain in (row_spaces, col_spaces):
        for a, b in zip(chain, chain[1:]):
            if not a.is_subspace_of(b):
                raise ParameterError("layer subspaces must be nested")
    if not (i_br < m_j and j_br < m_i):
        raise ParameterError("indices do not describe a clean pair")
    TI, TJ = row_spaces[i_br], col_spaces[j_br]
    if not TI.contains(u) or not TJ.contains(w):
        raise ParameterError("u or w lies outside its layer subspace")
    row_target = cross_space(TI, prefix_space(col_spaces, m_i, k))
    col_target = cross_space(prefix_space(row_spaces, m_j, k), TJ)
    return dot(u, w) == dot(project(u, row_target), project(w, col_target))


# ---------------------------------------------------------------------------
# Guesses


@dataclass
class Branch:
    """One full set of guesses, expressed in the working coordinate frame."""

    opt_guess: int
    row_sizes: tuple
    col_sizes: tuple
    row_spaces: tuple
    col_spaces: tuple
    row_samples: tuple
    col_samples: tuple
    col_values: dict
    supercores: Callable
    phase4_samples: tuple
    phase4_choices: Callable
    reference: FactorPair | None = None
    row_layers: LayerDecomposition | None = None
    col_layers: LayerDecomposition | None = None
    notes: dict = field(default_factory=dict)


class GuessProvider:
    def branches(self, A: RationalMatrix, k: int, params: ParamSet, rng: random.Random) -> Iterator[Branch]:
        raise NotImplementedError


def _best_choice(alphabet, target, scorer):
    if target in alphabet:
        return alphabet.index(target)
    scores = [scorer(v) for v in alphabet]
    return scores.index(min(scores))


def _consistent_choice(A, alph: AlphabetMap, s: int) -> int:
    """Column candidate whose entries most rows can reproduce from their own alphabets.

    Needs no reference, so it still works when an alphabet build chose its
    own coordinate frame.
    """
    best, best_hits = 0, -1
    for c, v in enumerate(alph.col_alphabets[s]):
        hits = sum(any(dot(u, v) == A[p, s] for u in alph.row_alphabets[p]) for p in range(A.n_rows))
        if hits > best_hits:
            best, best_hits = c, hits
    return best


class PlantedHints(GuessProvider):
    """Read every guess off a known solution (normally the planted one)."""

    def __init__(self, pair: FactorPair):
        self.pair = pair

    def branches(self, A, k, params, rng):
        pair = self.pair
        if pair.k != k:
            raise ParameterError(f"hint has rank {pair.k}, expected {k}")
        rl = decompose(pair.U.rows, params.delta0, k)
        cl = decompose(pair.W.rows, params.delta0, k)
        t0 = params.t0
        row_samples = tuple(tuple(rng.choices(J, k=t0)) for J in rl.layers)
        col_samples = tuple(tuple(rng.choices(J, k=t0)) for J in cl.layers)
        # Basis rows: sampled rows of each layer first, then the rest of the layer.
        chosen, vecs = [], []
        for J, samp in zip(rl.layers, row_samples):
            for p in list(dict.fromkeys(samp)) + list(J):
                if len(vecs) < k and len(rref(vecs + [pair.U.row(p)], k)[0]) > len(vecs):
                    chosen.append(p)
                    vecs.append(pair.U.row(p))
        for t in range(k):
            if len(vecs) < k and len(rref(vecs + [unit_vec(k, t)], k)[0]) > len(vecs):
                vecs.append(unit_vec(k, t))
        R = RationalMatrix(vecs, k)
        U = pair.U @ inverse(R)
        W = pair.W @ R.T
        ref = FactorPair(U, W)

        def chain(decomp, M):
            out, acc = [], []
            for J in decomp.layers:
                acc += [M.row(i) for i in J]
                out.append(Subspace.span(acc, k))
            return tuple(out)

        row_spaces, col_spaces = chain(rl, U), chain(cl, W)
        opt = l0_error(A, pair.product())
        col_values = {s: W.row(s) for samp in col_samples for s in samp}
        layer_of_row, layer_of_col = rl.layer_of(), cl.layer_of()

        def supercores(block: Hyperblock, constraints, phase2):
            adj = adjusted_reference(ref, phase2)
            rows = [p for p in range(A.n_rows) if layer_of_row[p] in block.row_layers]
            cols = [q for q in range(A.n_cols) if layer_of_col[q] in block.col_layers]
            return hinted_supercores(A, adj, constraints, rows, cols)

        p4 = tuple(tuple(rng.choices(J, k=t0)) for J in cl.layers)

        def phase4_choices(alph: AlphabetMap):
            pick = {}
            for samp in p4:
                for s in samp:
                    col = ref.W.row(s)
                    pick[s] = _best_choice(
                        list(alph.col_alphabets[s]), col,
                        lambda v: sum(dot(ref.U.row(p), v) != A[p, s] for p in range(A.n_rows)))
            yield pick
            # Alphabet builds can sit in a different frame from the reference.
            own = {s: _consistent_choice(A, alph, s) for s in pick}
            if own != pick:
                yield own

        notes = {"basis_rows": tuple(chosen)}
        yield Branch(opt, rl.sizes, cl.sizes, row_spaces, col_spaces, row_samples, col_samples,
                     col_values, supercores, p4, phase4_choices, ref, rl, cl, notes)


class ExhaustiveGuesses(GuessProvider):
    """Enumerate the guesses directly from A.

    Only one layer per side is enumerated: a second layer needs the first to
    hold at least 1/(2 k delta0) vectors, so below that size a single layer
    is the only decomposition there is. Samples are whole layers, basis rows
    are tried over every subset of at most k rows, and column sample values
    are read off A at the basis rows. Phase-3 cores come from the exhaustive
    supercore family with ``kappa1`` rows and columns. ``max_work`` caps
    branches times supercores per branch; larger inputs raise ScaleError
    before any work starts.
    """

    def __init__(self, kappa1: int = 1, phase4_budget: int = 2000, max_work: int = 10_000):
        self.kappa1 = kappa1
        self.phase4_budget = phase4_budget
        self.max_work = max_work

    def branches(self, A, k, params, rng):
        n_rows, n_cols = A.shape
        bound = math.ceil(1 / (2 * k * params.delta0))
        if max(n_rows, n_cols) > bound:
            raise ScaleError(f"exhaustive guesses handle at most {bound} rows and columns")
        seen = set()
        structures = []
        for opt in range(n_rows * n_cols + 1):
            st = classify_blocks((n_rows,), (n_cols,), opt, params)
            key = (st.labels, st.hyperblocks)
            if key not in seen:
                seen.add(key)
                structures.append(opt)
        n_bases = sum(math.comb(n_rows, d) for d in range(min(k, n_rows) + 1))
        work = len(structures) * n_bases * supercore_count(n_rows, n_cols, self.kappa1, k)
        if work > self.max_work:
            raise ScaleError(f"exhaustive guesses need about {work} supercore runs, cap is {self.max_work}")
        all_rows, all_cols = tuple(range(n_rows)), tuple(range(n_cols))
        for opt in structures:
            for d in range(min(k, n_rows), -1, -1):
                for basis in combinations(range(n_rows), d):
                    vals = {s: tuple(A[r, s] for r in basis) + zero_vec(k - d) for s in all_cols}
                    row_space = Subspace.span([unit_vec(k, t) for t in range(d)], k)
                    col_space = Subspace.span(list(vals.values()), k)
                    kappa1 = self.kappa1
                    budget = self.phase4_budget

                    def supercores(block, constraints, phase2, kappa1=kappa1):
                        return enumerate_supercores(n_rows, n_cols, k, kappa1, "exhaustive")

                    def phase4_choices(alph, budget=budget):
                        sizes = [len(a) for a in alph.col_alphabets]
                        for t, combo in enumerate(product(*(range(s) for s in sizes))):
                            if t >= budget:
                                return
                            yield dict(enumerate(combo))

                    yield Branch(opt, (n_rows,), (n_cols,), (row_space,), (col_space,),
                                 (all_rows,), (all_cols,), vals, supercores, (all_cols,),
                                 phase4_choices, notes={"basis_rows": basis})


# ---------------------------------------------------------------------------
# Phases


@dataclass
class Phase2Result:
    row_vectors: dict  # (p, i) -> vector
    col_vectors: dict  # (q, j) -> vector
    mistaken_rows: list = field(default_factory=list)  # (p, home layer)
    mistaken_cols: list = field(default_factory=list)
    extra_error: int = 0


def phase2_clean(A, structure: BlockStructure, branch: Branch, k: int) -> Phase2Result:
    """Vote every row's (and column's) projection onto its clean subspace."""
    A = as_matrix(A)
    n_rows, n_cols = A.shape
    rows_out, cols_out = {}, {}
    for i in range(len(structure.row_sizes)):
        m = structure.m_row[i]
        base = branch.row_spaces[structure.br_row[i]]
        target = cross_space(base, prefix_space(branch.col_spaces, m, k))
        samples = [[(project(branch.col_values[s], base), None) for s in branch.col_samples[j]]
                   for j in range(m)]
        for p in range(n_rows):
            if m == 0:
                rows_out[(p, i)] = zero_vec(k)
                continue
            inp = VoteInput.build(k, structure.col_sizes[:m], [
                [(u, A[p, s]) for (u, _), s in zip(samples[j], branch.col_samples[j])]
                for j in range(m)])
            rows_out[(p, i)] = vote(inp, target)[0]
    for j in range(len(structure.col_sizes)):
        m = structure.m_col[j]
        base = branch.col_spaces[structure.br_col[j]]
        target = cross_space(prefix_space(branch.row_spaces, m, k), base)
        for q in range(n_cols):
            if m == 0:
                cols_out[(q, j)] = zero_vec(k)
                continue
            samples = []
            for i in range(m):
                onto = cross_space(branch.row_spaces[i], base)
                samples.append([(project(rows_out[(r, i)], onto), A[r, q])
                                for r in branch.row_samples[i]])
            inp = VoteInput.build(k, structure.row_sizes[:m], samples)
            cols_out[(q, j)] = vote(inp, target)[0]
    res = Phase2Result(rows_out, cols_out)
    if branch.reference is not None and branch.row_layers is not None:
        _mark_mistakes(res, structure, branch, k)
    return res


def _mark_mistakes(res: Phase2Result, structure, branch, k):
    ref = branch.reference
    for i, J in enumerate(branch.row_layers.layers):
        m = structure.m_row[i]
        target = cross_space(branch.row_spaces[structure.br_row[i]], prefix_space(branch.col_spaces, m, k))
        wide = sum(structure.col_sizes[m:])
        for p in J:
            if res.row_vectors[(p, i)] != project(ref.U.row(p), target):
                res.mistaken_rows.append((p, i))
                res.extra_error += wide
    for j, J in enumerate(branch.col_layers.layers):
        m = structure.m_col[j]
        target = cross_space(prefix_space(branch.row_spaces, m, k), branch.col_spaces[structure.br_col[j]])
        tall = sum(structure.row_sizes[m:])
        for q in J:
            if res.col_vectors[(q, j)] != project(ref.W.row(q), target):
                res.mistaken_cols.append((q, j))
                res.extra_error += tall


def adjusted_reference(ref: FactorPair, phase2: Phase2Result | None) -> FactorPair:
    """Reference solution with each mistaken line replaced by its voted vector."""
    if phase2 is None or not (phase2.mistaken_rows or phase2.mistaken_cols):
        return ref
    us = list(ref.U.rows)
    ws = list(ref.W.rows)
    for p, i in phase2.mistaken_rows:
        us[p] = phase2.row_vectors[(p, i)]
    for q, j in phase2.mistaken_cols:
        ws[q] = phase2.col_vectors[(q, j)]
    return FactorPair(RationalMatrix(us, ref.k), RationalMatrix(ws, ref.k))


def block_constraints(structure: BlockStructure, block: Hyperblock, branch: Branch,
                      phase2: Phase2Result, n_rows: int, n_cols: int, k: int) -> ProjectionConstraints:
    """Side conditions that tie the half-clean block to what voting already fixed."""
    i_e, j_e = block.row_layers[0], block.col_layers[0]
    row_home = branch.row_spaces[structure.br_row[i_e]]
    row_fixed = cross_space(row_home, prefix_space(branch.col_spaces, structure.m_row[i_e], k))
    col_home = branch.col_spaces[structure.br_col[j_e]]
    col_fixed = cross_space(prefix_space(branch.row_spaces, structure.m_col[j_e], k), col_home)

    def side(home, fixed, n, vectors, layer):
        comp = [tuple(c) for c in home.complement_basis()]
        rows = comp + list(fixed.basis)
        targets = []
        for p in range(n):
            v = vectors[(p, layer)]
            targets.append(tuple([Fraction(0)] * len(comp) + [dot(b, v) for b in fixed.basis]))
        return rows, targets

    rm, rt = side(row_home, row_fixed, n_rows, phase2.row_vectors, i_e)
    cm, ct = side(col_home, col_fixed, n_cols, phase2.col_vectors, j_e)
    return ProjectionConstraints.build(k, rm, rt, cm, ct)


def phase3_half_clean(A, structure: BlockStructure, branch: Branch, phase2: Phase2Result,
                      params: ParamSet, k: int, max_supercores: int | None = None) -> list:
    """Alphabets from the additive scheme on every half-clean hyperblock."""
    A = as_matrix(A)
    builds = []
    for block in structure.half_clean():
        cons = block_constraints(structure, block, branch, phase2, A.n_rows, A.n_cols, k)
        cores = branch.supercores(block, cons, phase2)
        if max_supercores is not None:
            cores = (sc for t, sc in enumerate(cores) if t < max_supercores)
        for _, built in additive_alphabets(A, k, cores, cons):
            builds.append(built)
    return builds


def _assemble(A, k, structure, phase2, builds) -> AlphabetMap:
    rows = [[phase2.row_vectors[(p, i)] for i in range(len(structure.row_sizes))]
            for p in range(A.n_rows)]
    cols = [[phase2.col_vectors[(q, j)] for j in range(len(structure.col_sizes))]
            for q in range(A.n_cols)]
    for b in builds:
        for p, a in enumerate(b.alphabets.row_alphabets):
            rows[p].extend(a)
        for q, a in enumerate(b.alphabets.col_alphabets):
            cols[q].extend(a)
    return AlphabetMap.build(k, rows, cols)


def _best_response_cols(A, k, us) -> list:
    ws = []
    for q in range(A.n_cols):
        inp = VoteInput.build(k, (A.n_rows,), [[(us[p], A[p, q]) for p in range(A.n_rows)]])
        ws.append(vote(inp)[0])
    return ws


def _best_response_rows(A, k, ws) -> list:
    us = []
    for p in range(A.n_rows):
        inp = VoteInput.build(k, (A.n_cols,), [[(ws[q], A[p, q]) for q in range(A.n_cols)]])
        us.append(vote(inp)[0])
    return us


def _vote_rows(A, k, structure, branch, vals) -> list:
    samples = branch.phase4_samples
    us = []
    for p in range(A.n_rows):
        inp = VoteInput.build(k, structure.col_sizes,
                              [[(vals[s], A[p, s]) for s in samp] for samp in samples])
        us.append(vote(inp)[0])
    return us


def _polish(A, k, pair: FactorPair) -> FactorPair:
    us = _best_response_rows(A, k, pair.W.rows)
    better = FactorPair(RationalMatrix(us, k), RationalMatrix(_best_response_cols(A, k, us), k))
    return better if l0_error(A, better.product()) < l0_error(A, pair.product()) else pair


def phase4_finish(A, k, structure: BlockStructure, branch: Branch, alph: AlphabetMap,
                  polish: bool = True, refine: int = REFINE_TOP):
    """Seed sampled columns from their alphabets and finish greedily.

    Every seed goes through the alphabet greedy in one batch. The ``refine``
    best seeds also get a second route (rows vote over all of Q^k against the
    seeded columns, columns best-respond), and with ``polish`` one more round
    of exact best responses. Returns ``(error, pair)`` or None without seeds.
    """
    A = as_matrix(A)
    weights = {}
    for j, samp in enumerate(branch.phase4_samples):
        if samp:
            w = Fraction(structure.col_sizes[j], len(samp))
            for s in samp:
                weights[s] = weights.get(s, 0) + w
    picks = list(branch.phase4_choices(alph))
    if not picks:
        return None
    cols = sorted(weights)
    tables = mismatch_tables(A, alph)
    choices = np.array([[pk[c] for c in cols] for pk in picks], dtype=np.int64).reshape(len(picks), len(cols))
    totals, rp, cp = _batch_greedy(tables, cols, choices, _integer_weights(cols, weights))
    order = sorted(range(len(picks)), key=lambda t: (int(totals[t]), t))[:max(1, refine)]
    best = None
    for t in order:
        g = Assignment(tuple(int(r[t]) for r in rp), tuple(int(c[t]) for c in cp))
        cands = [g.to_pair(alph)]
        vals = {s: alph.col_alphabets[s][c] for s, c in picks[t].items()}
        us = _vote_rows(A, k, structure, branch, vals)
        cands.append(FactorPair(RationalMatrix(us, k), RationalMatrix(_best_response_cols(A, k, us), k)))
        for pair in cands:
            if polish:
                pair = _polish(A, k, pair)
            err = l0_error(A, pair.product())
            if best is None or err < best[0]:
                best = (err, pair)
    return best


def perfect_events(A, structure: BlockStructure, branch: Branch, params: ParamSet, k: int) -> dict:
    """Check which sampling events held for a branch that carries a reference solution."""
    ref, rl, cl = branch.reference, branch.row_layers, branch.col_layers
    if ref is None or rl is None:
        return {}
    B = ref.product()
    spans_rows = all(
        Subspace.span([ref.U.row(p) for t in range(i + 1) for p in branch.row_samples[t]], k)
        == branch.row_spaces[i] for i in range(len(rl.layers)))
    spans_cols = all(
        Subspace.span([ref.W.row(q) for t in range(j + 1) for q in branch.col_samples[t]], k)
        == branch.col_spaces[j] for j in range(len(cl.layers)))
    clean_ok = True
    for i in range(len(rl.layers)):
        for j in range(len(cl.layers)):
            if structure.labels[i][j] != "clean":
                continue
            for p in branch.row_samples[i]:
                for q in branch.col_samples[j]:
                    if B[p, q] != A[p, q]:
                        clean_ok = False
    good = (tau_good(ref.U.rows, rl, branch.row_samples, params.tau)
            and tau_good(ref.W.rows, cl, branch.col_samples, params.tau))
    return {"row_samples_span": spans_rows, "col_samples_span": spans_cols,
            "clean_samples_correct": clean_ok, "tau_good": good}


def run_ptas(A, k: int, eps0, mode: str = "hinted", planted: FactorPair | None = None,
             provider: GuessProvider | None = None, params: ParamSet | None = None,
             seed: int = 0, max_branches: int | None = None, max_supercores: int | None = None,
             diagnostics: bool = False) -> Solution:
    """Run all four phases for every branch of guesses and keep the best result."""
    A = as_matrix(A)
    if params is None:
        params = ParamSet.from_defaults(k, eps0)
    if provider is None:
        if mode == "hinted":
            if planted is None:
                raise ParameterError("hinted mode needs a planted factor pair")
            provider = PlantedHints(planted)
        elif mode == "exhaustive":
            provider = ExhaustiveGuesses()
        else:
            raise ParameterError(f"unknown mode {mode!r}")
    flags = list(f"param:{v}" for v in params.violations())
    if params.overrides:
        flags.append("params-overridden")
    rng = random.Random(seed)
    best, tried, detail = None, 0, {}
    for branch in provider.branches(A, k, params, rng):
        if max_branches is not None and tried >= max_branches:
            flags.append("budget-exhausted")
            break
        tried += 1
        structure = classify_blocks(branch.row_sizes, branch.col_sizes, branch.opt_guess, params)
        phase2 = phase2_clean(A, structure, branch, k)
        builds = phase3_half_clean(A, structure, branch, phase2, params, k, max_supercores)
        alph = _assemble(A, k, structure, phase2, builds)
        got = phase4_finish(A, k, structure, branch, alph)
        if got is None:
            continue
        err, pair = got
        if best is None or err < best[0]:
            best = (err, pair)
            detail = {"opt_guess": branch.opt_guess, "structure": structure,
                      "mistaken_rows": len(phase2.mistaken_rows),
                      "mistaken_cols": len(phase2.mistaken_cols),
                      "extra_error": phase2.extra_error, "half_clean_blocks": len(structure.half_clean()),
                      "alphabet_builds": len(builds), "notes": branch.notes}
            if diagnostics:
                detail["perfect"] = perfect_events(A, structure, branch, params, k)
    if best is None:
        flags.append("no-branch")
        pair = FactorPair(RationalMatrix.zeros(A.n_rows, k), RationalMatrix.zeros(A.n_cols, k))
        return Solution(pair, l0_error(A, pair.product()), tuple(flags), {"branches": tried})
    err, pair = best
    detail["branches"] = tried
    return Solution(pair, l0_error(A, pair.product()), tuple(flags), detail)
