"""Layered decomposition of a family of vectors into nested subspaces.

Layer j collects the remaining vectors captured by the subspace T_j, where
T_j is the "full" subspace (no proper subspace above T_{j-1} keeps a
(1 - delta0) share of its vectors) that captures the most vectors.

Zero vectors lie in every subspace and carry no direction; they always
join the first layer and are left out of the capture counts.
"""
from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from itertools import combinations
from math import gcd, lcm
from typing import Sequence

from .core import Subspace, vec
from .errors import DimensionError, ParameterError


@dataclass(frozen=True)
class LayerDecomposition:
    k: int
    layers: tuple
    subspaces: tuple
    ambient_completed: bool = False

    @property
    def n_layers(self) -> int:
        return len(self.layers)

    @property
    def sizes(self) -> tuple:
        return tuple(len(J) for J in self.layers)

    def layer_of(self) -> dict:
        return {i: j for j, J in enumerate(self.layers) for i in J}


def _primitive(v) -> tuple:
    """Integer direction of v, scaled so that its first nonzero entry is positive."""
    d = lcm(*(a.denominator for a in v))
    ints = [int(a * d) for a in v]
    g = 0
    for x in ints:
        g = gcd(g, x)
    ints = [x // g for x in ints]
    lead = next(x for x in ints if x)
    if lead < 0:
        ints = [-x for x in ints]
    return tuple(ints)


class _SpanIndex:
    """Every subspace spanned by a base subspace plus some of the given directions."""

    def __init__(self, base: Subspace, dirs: list, max_dim: int):
        self.base = base
        self.dirs = dirs
        self.entries = {}  # basis -> (Subspace, bitmask of dirs inside)
        k = base.ambient_dim
        frontier = [base]
        self.entries[base.basis] = (base, self._mask(base))
        while frontier:
            nxt = []
            for S in frontier:
                if S.dim >= max_dim:
                    continue
                inside = self.entries[S.basis][1]
                for t, d in enumerate(dirs):
                    if inside >> t & 1:
                        continue
                    # One more direction outside S fills the ambient space.
                    T = Subspace.full(k) if S.dim + 1 == k else S.add(d)
                    if T.basis not in self.entries:
                        self.entries[T.basis] = (T, self._mask(T))
                        nxt.append(T)
            frontier = nxt

    def _mask(self, S: Subspace) -> int:
        comp = [_primitive(c) for c in S.complement_basis()] if S.dim < S.ambient_dim else []
        m = 0
        for t, d in enumerate(self.dirs):
            if all(sum(a * b for a, b in zip(c, d)) == 0 for c in comp):
                m |= 1 << t
        return m


def _count(mask: int, weights: list) -> int:
    total, t = 0, 0
    while mask:
        if mask & 1:
            total += weights[t]
        mask >>= 1
        t += 1
    return total


def _group_directions(vectors: list, indices) -> tuple:
    dirs, members = [], []
    pos = {}
    for i in indices:
        d = _primitive(vectors[i])
        if d not in pos:
            pos[d] = len(dirs)
            dirs.append(d)
            members.append([])
        members[pos[d]].append(i)
    return dirs, members


def _full_in_index(index: _SpanIndex, T: Subspace, weights: list, delta0: Fraction) -> bool:
    _, mask_T = index.entries[T.basis]
    cap = _count(mask_T, weights)
    need = (1 - delta0) * cap
    for S, mask_S in index.entries.values():
        if S.dim >= T.dim or mask_S & ~mask_T:
            continue
        if _count(mask_S, weights) >= need:
            return False
    return True


def _as_vectors(vectors, k):
    vs = [vec(v) for v in vectors]
    if k is None:
        if not vs:
            raise ParameterError("cannot infer k from an empty family")
        k = len(vs[0])
    for v in vs:
        if len(v) != k:
            raise DimensionError(f"vector of length {len(v)}, expected {k}")
    return vs, k


def is_full(T: Subspace, prev: Subspace, vectors: Sequence, delta0) -> bool:
    """True when no subspace from ``prev`` (inclusive) up to but excluding T
    keeps at least a (1 - delta0) share of the nonzero vectors captured by T."""
    delta0 = Fraction(delta0)
    vs, k = _as_vectors(vectors, T.ambient_dim)
    if not prev.is_subspace_of(T):
        raise ParameterError("prev must be contained in T")
    idx = [i for i, v in enumerate(vs) if any(v) and T.contains(v)]
    dirs, members = _group_directions(vs, idx)
    index = _SpanIndex(prev, dirs, T.dim)
    weights = [len(m) for m in members]
    need = (1 - delta0) * len(idx)
    return not any(
        S.dim < T.dim and _count(mask, weights) >= need for S, mask in index.entries.values()
    )


def decompose(vectors: Sequence, delta0, k: int | None = None) -> LayerDecomposition:
    """Split ``vectors`` into at most k layers with nested subspaces.

    Ties between full subspaces of equal capture go to the one with the
    smaller dimension, then the lexicographically smaller canonical basis.
    When the vectors do not span Q^k the last subspace is their span and
    ``ambient_completed`` is set.
    """
    delta0 = Fraction(delta0)
    if not 0 < delta0 < 1:
        raise ParameterError("delta0 must lie in (0, 1)")
    vs, k = _as_vectors(vectors, k)
    zeros = [i for i, v in enumerate(vs) if not any(v)]
    remaining = [i for i, v in enumerate(vs) if any(v)]
    if not vs:
        return LayerDecomposition(k, (), (), False)
    prev = Subspace.zero(k)
    layers, subspaces = [], []
    while remaining:
        dirs, members = _group_directions(vs, remaining)
        weights = [len(m) for m in members]
        index = _SpanIndex(prev, dirs, k)
        ranked = sorted(
            (S for S in index.entries.values() if S[0].dim > prev.dim),
            key=lambda e: (-_count(e[1], weights), e[0].dim, e[0].basis),
        )
        chosen = next(S for S, _ in ranked if _full_in_index(index, S, weights, delta0))
        mask = index.entries[chosen.basis][1]
        layer = sorted(i for t, m in enumerate(members) if mask >> t & 1 for i in m)
        layers.append(layer)
        subspaces.append(chosen)
        taken = set(layer)
        remaining = [i for i in remaining if i not in taken]
        prev = chosen
    if not layers:
        layers, subspaces = [[]], [Subspace.zero(k)]
    layers[0] = sorted(layers[0] + zeros)
    completed = subspaces[-1].dim < k
    return LayerDecomposition(k, tuple(tuple(J) for J in layers), tuple(subspaces), completed)


def verify_report(decomp: LayerDecomposition, vectors: Sequence, delta0) -> list:
    """Every violated property, as human-readable strings (empty when valid)."""
    delta0 = Fraction(delta0)
    vs, k = _as_vectors(vectors, decomp.k)
    problems = []
    flat = sorted(i for J in decomp.layers for i in J)
    if flat != list(range(len(vs))):
        problems.append("layers do not partition the index set")
        return problems
    if not vs:
        return problems
    if decomp.n_layers > k and any(any(v) for v in vs):
        problems.append(f"{decomp.n_layers} layers exceed k={k}")
    if len(decomp.subspaces) != decomp.n_layers:
        problems.append("one subspace per layer is required")
        return problems
    prev = Subspace.zero(k)
    for j, (J, T) in enumerate(zip(decomp.layers, decomp.subspaces)):
        if not prev.is_subspace_of(T) or (j and T.dim <= prev.dim):
            problems.append(f"subspace {j} does not strictly contain its predecessor")
        for i in J:
            if not T.contains(vs[i]):
                problems.append(f"vector {i} lies outside subspace {j}")
            elif j and prev.contains(vs[i]):
                problems.append(f"vector {i} already lies in subspace {j - 1}")
        if j and len(J) > 2 * k * delta0 * len(decomp.layers[j - 1]):
            problems.append(f"layer {j} is too large relative to layer {j - 1}")
        # Proper subspaces above prev: spans of prev plus fewer than
        # dim(T) - dim(prev) of the layer's own vectors.
        nz = [i for i in J if any(vs[i])]
        dirs, members = _group_directions(vs, nz)
        limit = (1 - delta0) * len(nz)
        for r in range(0, T.dim - prev.dim):
            for combo in combinations(range(len(dirs)), r):
                S = Subspace.span(list(prev.basis) + [dirs[t] for t in combo], k)
                if S.dim >= T.dim:
                    continue
                inside = sum(len(members[t]) for t in range(len(dirs)) if S.contains(dirs[t]))
                if inside >= limit:
                    problems.append(f"layer {j} is not full: a {S.dim}-dim subspace keeps {inside}")
                    break
            else:
                continue
            break
        prev = T
    last = decomp.subspaces[-1]
    if decomp.ambient_completed:
        if last != Subspace.span(vs, k):
            problems.append("completed layering must end at the span of all vectors")
    elif last.dim != k:
        problems.append("last subspace is not the whole space")
    return problems


def verify(decomp: LayerDecomposition, vectors: Sequence, delta0) -> bool:
    return not verify_report(decomp, vectors, delta0)
